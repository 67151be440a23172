#include "wce/condexp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wce {

Partition::Partition(MeasureSpace space,
                     std::vector<std::vector<std::size_t>> blocks)
    : space_(std::move(space)), blocks_(std::move(blocks)) {
  const std::size_t n = space_.size();
  std::vector<char> seen(n, 0);
  for (auto& b : blocks_) {
    if (b.empty()) throw UsageError("Partition: empty block");
    std::sort(b.begin(), b.end());
    for (std::size_t i : b) {
      if (i >= n) throw UsageError("Partition: atom index out of range");
      if (seen[i])
        throw UsageError("Partition: overlapping blocks (atom " +
                         std::to_string(i) + ")");
      seen[i] = 1;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i])
      throw UsageError("Partition: blocks do not cover atom " + std::to_string(i));
  std::sort(blocks_.begin(), blocks_.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  block_of_.assign(n, 0);
  for (std::size_t b = 0; b < blocks_.size(); ++b)
    for (std::size_t i : blocks_[b]) block_of_[i] = b;
}

Partition Partition::trivial(const MeasureSpace& s) {
  std::vector<std::size_t> all(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) all[i] = i;
  return {s, {all}};
}

Partition Partition::discrete(const MeasureSpace& s) {
  std::vector<std::vector<std::size_t>> blocks;
  for (std::size_t i = 0; i < s.size(); ++i) blocks.push_back({i});
  return {s, std::move(blocks)};
}

double Partition::block_measure(std::size_t b) const {
  double m = 0.0;
  for (std::size_t i : blocks_[b]) m += space_.weight(i);
  return m;
}

LinOperator cond_expect(const Partition& p) {
  const MeasureSpace& s = p.space();
  const std::size_t n = s.size();
  CMatrix e(n, n);
  for (std::size_t b = 0; b < p.num_blocks(); ++b) {
    const double mb = p.block_measure(b);
    for (std::size_t i : p.blocks()[b])
      for (std::size_t j : p.blocks()[b]) e(i, j) = s.weight(j) / mb;
  }
  return {s, std::move(e)};
}

bool is_measurable(const Partition& p, const MFunction& f,
                   const Tolerances& tol) {
  require_same_space(p.space(), f.space(), "is_measurable");
  const double scale = max_abs(f);
  for (const auto& block : p.blocks()) {
    for (std::size_t a : block)
      for (std::size_t b : block)
        if (std::abs(f[a] - f[b]) > tol.orth * scale) return false;
  }
  return true;
}

bool refines(const Partition& q, const Partition& p) {
  require_same_space(q.space(), p.space(), "refines");
  for (const auto& block : q.blocks()) {
    const std::size_t target = p.block_of(block.front());
    for (std::size_t i : block)
      if (p.block_of(i) != target) return false;
  }
  return true;
}

bool tower_check(const Partition& a, const Partition& b, const MFunction& u,
                 const Tolerances& tol) {
  require_same_space(a.space(), u.space(), "tower_check");
  if (!refines(b, a))
    throw UsageError("tower_check: B must refine A (A contained in B)");
  if (!is_measurable(a, u, tol))
    throw UsageError("tower_check: u must be A-measurable");
  const LinOperator ea = cond_expect(a);
  const LinOperator eb = cond_expect(b);
  const LinOperator mu = multiplication(u);
  const CMatrix lhs = (ea * mu * eb).matrix();
  const CMatrix rhs = (eb * ea * mu).matrix();
  const double scale = std::max(1.0, max_abs(u));
  return max_abs_diff(lhs, rhs) <= 1e-12 * scale;
}

}  // namespace wce
