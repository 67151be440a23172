#include "wce/wceop.hpp"

#include <algorithm>
#include <cmath>

namespace wce {

namespace {

LinOperator build_matrix(const Partition& p, const std::vector<cplx>& u,
                         const std::vector<cplx>& w) {
  const MeasureSpace& s = p.space();
  const std::size_t n = s.size();
  CMatrix t(n, n);
  for (std::size_t b = 0; b < p.num_blocks(); ++b) {
    const double mb = p.block_measure(b);
    for (std::size_t i : p.blocks()[b]) {
      if (w[i] == 0.0) continue;
      for (std::size_t j : p.blocks()[b])
        t(i, j) = w[i] * ((s.weight(j) * u[j]) / mb);
    }
  }
  return {s, std::move(t)};
}

}  // namespace

WCEOp::WCEOp(Partition p, MFunction u, MFunction w)
    : partition_(std::move(p)),
      u_(std::move(u)),
      w_(std::move(w)),
      matrix_(build_matrix(partition_, u_.values(), w_.values())) {
  require_same_space(partition_.space(), u_.space(), "WCEOp");
  require_same_space(partition_.space(), w_.space(), "WCEOp");
  const MeasureSpace& s = partition_.space();
  const std::size_t n = s.size();
  e_u2_.assign(n, 0.0);
  e_w2_.assign(n, 0.0);
  e_uw_.assign(n, 0.0);
  for (std::size_t b = 0; b < partition_.num_blocks(); ++b) {
    const double mb = partition_.block_measure(b);
    double su2 = 0.0, sw2 = 0.0;
    cplx suw = 0.0;
    for (std::size_t i : partition_.blocks()[b]) {
      su2 += s.weight(i) * std::norm(u_[i]);
      sw2 += s.weight(i) * std::norm(w_[i]);
      suw += s.weight(i) * u_[i] * w_[i];
    }
    blk_u2_.push_back(su2 / mb);
    blk_w2_.push_back(sw2 / mb);
    blk_uw_.push_back(suw / mb);
    for (std::size_t i : partition_.blocks()[b]) {
      e_u2_[i] = blk_u2_[b];
      e_w2_[i] = blk_w2_[b];
      e_uw_[i] = blk_uw_[b];
    }
  }
}

WCEOp wce_build(const Partition& p, const MFunction& u, const MFunction& w) {
  return {p, u, w};
}

LinOperator wce_matrix(const Partition& p, const MFunction& u,
                       const MFunction& w) {
  require_same_space(p.space(), u.space(), "wce_matrix");
  require_same_space(p.space(), w.space(), "wce_matrix");
  return build_matrix(p, u.values(), w.values());
}

double wce_norm(const WCEOp& t) {
  double best = 0.0;
  for (std::size_t b = 0; b < t.block_e_u2().size(); ++b)
    best = std::max(best, t.block_e_w2()[b] * t.block_e_u2()[b]);
  return std::sqrt(best);
}

LinOperator wce_power(const WCEOp& t, int n) {
  if (n < 0) throw UsageError("wce_power: n must be nonnegative");
  if (n == 0) return LinOperator::identity(t.space());
  if (n == 1) return t.matrix();
  const std::size_t dim = t.space().size();
  CMatrix m = t.matrix().matrix();
  for (std::size_t i = 0; i < dim; ++i) {
    const cplx f = std::pow(t.e_uw()[i], n - 1);
    for (std::size_t j = 0; j < dim; ++j) m(i, j) *= f;
  }
  return {t.space(), std::move(m)};
}

LinOperator wce_adjoint_power(const WCEOp& t, int n) {
  if (n < 0) throw UsageError("wce_adjoint_power: n must be nonnegative");
  if (n == 0) return LinOperator::identity(t.space());
  const std::size_t dim = t.space().size();
  std::vector<cplx> weight(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const cplx f = n == 1 ? cplx(1.0) : std::pow(std::conj(t.e_uw()[i]), n - 1);
    weight[i] = f * std::conj(t.u()[i]);
  }
  MFunction wfun(t.space(), std::move(weight));
  return build_matrix(t.partition(), conjugate(t.w()).values(), wfun.values());
}

double spectral_radius(const WCEOp& t) {
  double r = 0.0;
  for (const cplx& v : t.block_e_uw()) r = std::max(r, std::abs(v));
  return r;
}

double gelfand_estimate(const WCEOp& t, int k) {
  if (k < 1) throw UsageError("gelfand_estimate: k must be positive");
  double best = 0.0;
  for (std::size_t b = 0; b < t.block_e_uw().size(); ++b) {
    const double r2 = std::norm(t.block_e_uw()[b]);
    const double prod = t.block_e_w2()[b] * t.block_e_u2()[b];
    if (prod <= 0.0) continue;
    double logval;
    if (k == 1) {
      logval = std::log(prod) / 2.0;
    } else {
      if (r2 <= 0.0) continue;
      logval = ((k - 1) * std::log(r2) + std::log(prod)) / (2.0 * k);
    }
    best = std::max(best, std::exp(logval));
  }
  return best;
}

PolarParts polar(const LinOperator& t, const Tolerances& tol) {
  EigenSystem sys = eig_selfadjoint(adjoint(t) * t, tol);
  LinOperator abs = LinOperator::zero(t.space());
  LinOperator pinv_abs = LinOperator::zero(t.space());
  double sigma_max = 0.0;
  for (double lam : sys.values)
    sigma_max = std::max(sigma_max, std::sqrt(std::max(lam, 0.0)));
  for (std::size_t k = 0; k < sys.values.size(); ++k) {
    const double sigma = std::sqrt(std::max(sys.values[k], 0.0));
    if (sigma <= tol.rank * sigma_max) continue;
    abs = abs + cplx(sigma) * rank_one(sys.vectors[k], sys.vectors[k]);
    pinv_abs =
        pinv_abs + cplx(1.0 / sigma) * rank_one(sys.vectors[k], sys.vectors[k]);
  }
  return {t * pinv_abs, abs};
}

MFunction aluthge_weight(const WCEOp& t, const Tolerances& tol) {
  double top = 0.0;
  for (double v : t.e_u2()) top = std::max(top, v);
  const std::size_t n = t.space().size();
  std::vector<cplx> w(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (t.e_u2()[i] > tol.supp * top)
      w[i] = t.e_uw()[i] * std::conj(t.u()[i]) / t.e_u2()[i];
  }
  return {t.space(), std::move(w)};
}

LinOperator aluthge(const WCEOp& t, const Tolerances& tol) {
  return wce_matrix(t.partition(), t.u(), aluthge_weight(t, tol));
}

WCEOp aluthge_wce(const WCEOp& t, const Tolerances& tol) {
  return {t.partition(), t.u(), aluthge_weight(t, tol)};
}

LinOperator aluthge_from_polar(const LinOperator& t, const Tolerances& tol) {
  PolarParts parts = polar(t, tol);
  LinOperator half = sqrt_positive(parts.abs, tol);
  return half * parts.partial_isometry * half;
}

}  // namespace wce
