#include <algorithm>
#include <cmath>

#include "wce/harness.hpp"

namespace wce::harness {

std::uint64_t Rng::next() {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double Rng::unif01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::unif(double lo, double hi) { return lo + (hi - lo) * unif01(); }

long Rng::int_in(long lo, long hi) {
  return lo + static_cast<long>(next() % static_cast<std::uint64_t>(hi - lo + 1));
}

cplx Rng::unit_box() { return {2.0 * unif01() - 1.0, 2.0 * unif01() - 1.0}; }

const char* to_string(Profile p) {
  switch (p) {
    case Profile::generic:
      return "generic";
    case Profile::homogeneous:
      return "homogeneous";
    case Profile::nilpotent:
      return "nilpotent";
    case Profile::nonneg:
      return "nonneg";
    default:
      return "rank-one";
  }
}

Profile profile_from_string(const std::string& s) {
  if (s == "generic") return Profile::generic;
  if (s == "homogeneous") return Profile::homogeneous;
  if (s == "nilpotent") return Profile::nilpotent;
  if (s == "nonneg") return Profile::nonneg;
  if (s == "rank-one" || s == "rank_one") return Profile::rank_one;
  throw UsageError("unknown profile: " + s);
}

MFunction random_measurable(const Partition& p, Rng& rng, bool nonneg) {
  std::vector<cplx> v(p.space().size());
  for (const auto& block : p.blocks()) {
    const cplx val = nonneg ? cplx(rng.unif(0.2, 2.0)) : rng.unit_box();
    for (std::size_t i : block) v[i] = val;
  }
  return {p.space(), std::move(v)};
}

namespace {

std::vector<std::vector<std::size_t>> random_blocks(Rng& rng, int n,
                                                    int num_blocks,
                                                    int min_size) {
  std::vector<std::size_t> atoms(n);
  for (int i = 0; i < n; ++i) atoms[i] = static_cast<std::size_t>(i);
  for (int i = n - 1; i > 0; --i)
    std::swap(atoms[i], atoms[rng.int_in(0, i)]);
  std::vector<int> sizes(num_blocks, min_size);
  int rest = n - num_blocks * min_size;
  while (rest > 0) {
    sizes[rng.int_in(0, num_blocks - 1)] += 1;
    --rest;
  }
  std::vector<std::vector<std::size_t>> blocks;
  std::size_t at = 0;
  for (int b = 0; b < num_blocks; ++b) {
    std::vector<std::size_t> block(atoms.begin() + at, atoms.begin() + at + sizes[b]);
    at += sizes[b];
    blocks.push_back(std::move(block));
  }
  return blocks;
}

double block_mass(const MeasureSpace& s, const std::vector<std::size_t>& block,
                  const std::vector<cplx>& f) {
  double acc = 0.0;
  for (std::size_t i : block) acc += s.weight(i) * std::norm(f[i]);
  return acc;
}

// w = a ubar + g p with p a weighted-unit vector orthogonal to ubar inside
// the block, chosen so E(|w|^2) = cw and |E(uw)| = cr exactly.
void homogeneous_block_weight(const MeasureSpace& s,
                              const std::vector<std::size_t>& block,
                              const std::vector<cplx>& u, double cu, double cw,
                              double cr, Rng& rng, std::vector<cplx>& w) {
  const double mb = [&] {
    double acc = 0.0;
    for (std::size_t i : block) acc += s.weight(i);
    return acc;
  }();
  std::vector<cplx> ubar(u.size(), 0.0);
  for (std::size_t i : block) ubar[i] = std::conj(u[i]);
  // orthogonal unit direction inside the block
  std::vector<cplx> p(u.size(), 0.0);
  for (int attempt = 0; attempt < 64; ++attempt) {
    for (std::size_t i : block) p[i] = rng.unit_box();
    cplx c = 0.0;
    double nb2 = 0.0;
    for (std::size_t i : block) {
      c += s.weight(i) * p[i] * std::conj(ubar[i]);
      nb2 += s.weight(i) * std::norm(ubar[i]);
    }
    for (std::size_t i : block) p[i] -= (c / nb2) * ubar[i];
    const double np = std::sqrt(block_mass(s, block, p));
    if (np > 1e-6) {
      for (std::size_t i : block) p[i] /= np;
      break;
    }
  }
  const double phase = rng.unif(0.0, 6.283185307179586);
  const cplx a = std::polar(cr / cu, phase);
  const double g2 = mb * (cw - cr * cr / cu);
  const cplx g = std::polar(std::sqrt(std::max(g2, 0.0)),
                            rng.unif(0.0, 6.283185307179586));
  for (std::size_t i : block) w[i] = a * ubar[i] + g * p[i];
}

}  // namespace

MFunction homogeneous_weight(const MeasureSpace& s, const Partition& p,
                             const MFunction& u, double cu, double cw,
                             double cr, Rng& rng) {
  if (cr * cr > cu * cw)
    throw UsageError("homogeneous_weight: need cr^2 <= cu*cw");
  std::vector<cplx> w(s.size(), 0.0);
  for (const auto& block : p.blocks())
    homogeneous_block_weight(s, block, u.values(), cu, cw, cr, rng, w);
  return {s, std::move(w)};
}

Instance gen_instance(std::uint64_t seed, Profile profile, GenOptions opts) {
  Rng rng(seed * 0x2545F4914F6CDD1Dull + static_cast<std::uint64_t>(profile));
  const bool wide_blocks =
      profile == Profile::homogeneous || profile == Profile::nilpotent;
  const int min_size = wide_blocks ? 2 : 1;
  int n = opts.n > 0 ? opts.n : static_cast<int>(rng.int_in(wide_blocks ? 4 : 2, 10));
  int num_blocks = opts.num_blocks > 0
                       ? opts.num_blocks
                       : static_cast<int>(rng.int_in(
                             1, std::min<long>(4, n / min_size)));
  if (num_blocks > n) throw UsageError("gen_instance: more blocks than atoms");
  if (num_blocks * min_size > n && opts.num_blocks == 0)
    num_blocks = std::max(1, n / min_size);
  int eff_min = min_size;
  if (num_blocks * eff_min > n) eff_min = std::max(1, n / num_blocks);

  std::vector<double> weights(n);
  for (auto& w : weights) w = rng.unif(0.2, 2.0);
  MeasureSpace space(weights);
  Partition partition(space, random_blocks(rng, n, num_blocks, eff_min));

  std::vector<cplx> u(n), w(n);
  switch (profile) {
    case Profile::generic:
    case Profile::rank_one: {
      for (auto& v : u) v = rng.unif01() < 0.08 ? cplx(0.0) : rng.unit_box();
      for (auto& v : w) v = rng.unif01() < 0.08 ? cplx(0.0) : rng.unit_box();
      break;
    }
    case Profile::nonneg: {
      for (auto& v : u) v = rng.unif(0.15, 1.6);
      for (auto& v : w) v = rng.unif(0.15, 1.6);
      break;
    }
    case Profile::nilpotent: {
      for (auto& v : u) v = rng.unit_box();
      for (auto& v : w) v = rng.unit_box();
      for (const auto& block : partition.blocks()) {
        const double su2 = block_mass(space, block, u);
        if (su2 == 0.0) continue;
        if (block.size() == 1)
          throw GenerationError(
              "nilpotent profile infeasible: singleton block with nonzero u");
        cplx suw = 0.0;
        for (std::size_t i : block) suw += space.weight(i) * u[i] * w[i];
        // project w so that sum mu u w = 0 on the block
        for (std::size_t i : block) w[i] -= (suw / su2) * std::conj(u[i]);
      }
      break;
    }
    case Profile::homogeneous: {
      const double su = rng.unif(2.8, 3.2);
      const double sw = rng.unif(2.8, 3.2);
      const double cu = su * su, cw = sw * sw;
      const double cr = rng.unif(0.02, 0.1);
      for (const auto& block : partition.blocks()) {
        double su2 = 0.0;
        for (int attempt = 0; attempt < 64; ++attempt) {
          for (std::size_t i : block) u[i] = rng.unit_box();
          su2 = block_mass(space, block, u);
          double mb = 0.0;
          for (std::size_t i : block) mb += space.weight(i);
          if (su2 / mb > 0.05) {
            const double f = std::sqrt(cu * mb / su2);
            for (std::size_t i : block) u[i] *= f;
            break;
          }
        }
        homogeneous_block_weight(space, block, u, cu, cw, cr, rng, w);
      }
      break;
    }
  }

  Instance inst{space,
                partition,
                MFunction(space, std::move(u)),
                MFunction(space, std::move(w)),
                {},
                {}};

  if (profile == Profile::rank_one) {
    std::vector<cplx> xv(n), y0(n);
    for (auto& v : xv) v = rng.unit_box();
    MFunction x(space, std::move(xv));
    x = cplx(1.0 / norm(x)) * x;
    for (auto& v : y0) v = rng.unit_box();
    MFunction yp(space, std::move(y0));
    yp = yp - inner(yp, x) * x;
    yp = cplx(1.0 / norm(yp)) * yp;
    const double s = rng.unif(1.0, 1.5);
    const bool orthogonal = rng.next() % 2 == 0;
    MFunction y = MFunction::zero(space);
    if (orthogonal) {
      y = cplx(s) * yp;
    } else {
      const double eps = rng.unif(0.0, 2e-3);
      MFunction dir = yp + cplx(eps) * x;
      dir = cplx(1.0 / norm(dir)) * dir;
      y = cplx(s) * dir;
    }
    inst.vectors.emplace_back("x", std::move(x));
    inst.vectors.emplace_back("y", std::move(y));
  }
  return inst;
}

// -- constructed membership test operators ---------------------------------------

LinOperator block_operator(const BlockDecomp& d, const CMatrix& x,
                           const CMatrix& y, const CMatrix& z,
                           const CMatrix& w) {
  const MeasureSpace& s = d.h1.space();
  LinOperator out = LinOperator::zero(s);
  const auto& b1 = d.h1.basis();
  const auto& b2 = d.h2.basis();
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j)
      if (x(i, j) != 0.0) out = out + x(i, j) * rank_one(b1[i], b1[j]);
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j)
      if (y(i, j) != 0.0) out = out + y(i, j) * rank_one(b1[i], b2[j]);
  for (std::size_t i = 0; i < z.rows(); ++i)
    for (std::size_t j = 0; j < z.cols(); ++j)
      if (z(i, j) != 0.0) out = out + z(i, j) * rank_one(b2[i], b1[j]);
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j)
      if (w(i, j) != 0.0) out = out + w(i, j) * rank_one(b2[i], b2[j]);
  return out;
}

namespace {

CMatrix random_block(Rng& rng, std::size_t rows, std::size_t cols) {
  CMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.unit_box();
  return m;
}

}  // namespace

std::vector<LinOperator> make_bt_members(const WCEOp& t, const BlockDecomp& d,
                                         Rng& rng) {
  const std::size_t k1 = d.h1.dim(), k2 = d.h2.dim();
  std::vector<LinOperator> out;
  out.push_back(multiplication(random_measurable(t.partition(), rng, false)));
  {
    MFunction a = random_measurable(t.partition(), rng, true);
    out.push_back(wce_matrix(t.partition(), t.u(),
                             pointwise(a, conjugate(t.u()))));
  }
  out.push_back(block_operator(d, random_block(rng, k1, k1), CMatrix(k1, k2),
                               CMatrix(k2, k1), random_block(rng, k2, k2)));
  out.push_back(block_operator(d, random_block(rng, k1, k1), CMatrix(k1, k2),
                               CMatrix(k2, k1), CMatrix(k2, k2)));
  out.push_back(LinOperator::identity(t.space()) +
                block_operator(d, CMatrix(k1, k1), CMatrix(k1, k2),
                               random_block(rng, k2, k1), CMatrix(k2, k2)));
  return out;
}

std::vector<LinOperator> make_bt_nonmembers(const WCEOp& t,
                                            const BlockDecomp& d, Rng& rng,
                                            const Tolerances& tol) {
  const std::size_t k1 = d.h1.dim(), k2 = d.h2.dim();
  if (k1 == 0 || k2 == 0)
    throw UsageError("make_bt_nonmembers: needs a proper decomposition");
  std::vector<LinOperator> out;
  out.push_back(rank_one(d.h1.basis()[rng.int_in(0, k1 - 1)],
                         d.h2.basis()[rng.int_in(0, k2 - 1)]));
  {
    // dense random with a guaranteed Y component
    LinOperator s = block_operator(d, random_block(rng, k1, k1),
                                   random_block(rng, k1, k2),
                                   random_block(rng, k2, k1),
                                   random_block(rng, k2, k2));
    for (int attempt = 0; attempt < 8; ++attempt) {
      if (op_norm(d.p1 * s * d.p2, tol) >= 0.05 * op_norm(s, tol)) break;
      s = s + rank_one(d.h1.basis().front(), d.h2.basis().front());
    }
    out.push_back(s);
  }
  {
    // multiplication by a non-measurable symbol: force a jump inside a block
    std::vector<cplx> a(t.space().size());
    for (auto& v : a) v = rng.unit_box();
    for (const auto& block : t.partition().blocks()) {
      if (block.size() >= 2) {
        a[block[0]] = 0.3;
        a[block[1]] = 1.7;
        break;
      }
    }
    out.push_back(multiplication(MFunction(t.space(), std::move(a))));
  }
  {
    LinOperator s = adjoint(t.matrix());
    for (int attempt = 0; attempt < 4; ++attempt) {
      if (op_norm(d.p1 * s * d.p2, tol) >= 0.05 * op_norm(s, tol)) break;
      s = s + rank_one(d.h1.basis().front(), d.h2.basis().front());
    }
    out.push_back(s);
  }
  out.push_back(block_operator(d, CMatrix(k1, k1), random_block(rng, k1, k2),
                               CMatrix(k2, k1), random_block(rng, k2, k2)));
  return out;
}

std::vector<LinOperator> make_qt_members(const BlockDecomp& d, Rng& rng) {
  const std::size_t k1 = d.h1.dim(), k2 = d.h2.dim();
  std::vector<LinOperator> out;
  out.push_back(LinOperator::zero(d.h1.space()));
  for (int k = 0; k < 4; ++k)
    out.push_back(block_operator(d, CMatrix(k1, k1), CMatrix(k1, k2),
                                 random_block(rng, k2, k1), CMatrix(k2, k2)));
  return out;
}

std::vector<LinOperator> make_qt_nonmembers(const BlockDecomp& d, Rng& rng) {
  const std::size_t k1 = d.h1.dim(), k2 = d.h2.dim();
  if (k1 == 0 || k2 == 0)
    throw UsageError("make_qt_nonmembers: needs a proper decomposition");
  std::vector<LinOperator> out;
  out.push_back(block_operator(d, CMatrix(k1, k1), random_block(rng, k1, k2),
                               CMatrix(k2, k1), CMatrix(k2, k2)));
  out.push_back(block_operator(d, CMatrix(k1, k1), CMatrix(k1, k2),
                               CMatrix(k2, k1), random_block(rng, k2, k2)));
  out.push_back(block_operator(d, CMatrix(k1, k1), random_block(rng, k1, k2),
                               CMatrix(k2, k1), random_block(rng, k2, k2)));
  out.push_back(block_operator(d, CMatrix(k1, k1), CMatrix(k1, k2),
                               random_block(rng, k2, k1),
                               random_block(rng, k2, k2)));
  out.push_back(block_operator(d, CMatrix(k1, k1), random_block(rng, k1, k2),
                               random_block(rng, k2, k1), CMatrix(k2, k2)));
  return out;
}

}  // namespace wce::harness
