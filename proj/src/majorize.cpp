#include "wce/majorize.hpp"

#include <algorithm>
#include <cmath>

namespace wce {

namespace {

struct SplitMix64 {
  std::uint64_t s;
  explicit SplitMix64(std::uint64_t seed) : s(seed) {}
  std::uint64_t next() {
    s += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double unif01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  cplx unit_box() { return {2.0 * unif01() - 1.0, 2.0 * unif01() - 1.0}; }
};

// Projected Gram matrix <A b_j, b_i> over a basis, as an operator on a
// uniform auxiliary space (coefficients of a weighted-orthonormal basis carry
// the standard inner product).
LinOperator project_to_basis(const LinOperator& a,
                             const std::vector<MFunction>& basis) {
  const std::size_t k = basis.size();
  CMatrix m(k, k);
  for (std::size_t j = 0; j < k; ++j) {
    const MFunction img = a.apply(basis[j]);
    for (std::size_t i = 0; i < k; ++i) m(i, j) = inner(img, basis[i]);
  }
  MeasureSpace aux(std::vector<double>(k, 1.0));
  return {aux, std::move(m)};
}

MFunction from_coefficients(const std::vector<MFunction>& basis,
                            const std::vector<cplx>& coeff) {
  MFunction out = MFunction::zero(basis.front().space());
  for (std::size_t i = 0; i < basis.size(); ++i)
    out = out + coeff[i] * basis[i];
  return out;
}

}  // namespace

MajorizationResult majorizes(const LinOperator& t, const LinOperator& s,
                             const Tolerances& tol) {
  require_same_space(t.space(), s.space(), "majorizes");
  MajorizationResult out;
  const Subspace ker_t = kernel(t, tol);
  const Subspace ker_s = kernel(s, tol);
  const double sine = containment_sine(ker_t, ker_s);
  out.holds = sine <= 1e-8;

  if (!out.holds) {
    // witness: the kernel-of-T direction that S stretches the most
    const LinOperator ss = project_to_basis(adjoint(s) * s, ker_t.basis());
    const TopEigen top = top_eigen(ss, tol);
    out.witness = from_coefficients(ker_t.basis(), top.vector.values());
    return out;
  }

  const Subspace comp = orthocomplement(ker_t, tol);
  if (comp.dim() == 0) {
    // T = 0 and kernel inclusion forces S = 0; the bound is vacuous
    out.constant = 0.0;
    return out;
  }
  const LinOperator at = project_to_basis(adjoint(s) * s, comp.basis());
  const LinOperator bt = project_to_basis(adjoint(t) * t, comp.basis());
  // generalized Rayleigh quotient via B^{-1/2} A B^{-1/2}
  const EigenSystem bsys = eig_selfadjoint(bt, tol);
  LinOperator binv_half = LinOperator::zero(bt.space());
  for (std::size_t k = 0; k < bsys.values.size(); ++k) {
    const double lam = std::max(bsys.values[k], 0.0);
    if (lam <= 0.0)
      throw NumericalFailure(
          "majorizes: T*T is singular on the kernel complement", lam);
    binv_half = binv_half + cplx(1.0 / std::sqrt(lam)) *
                                rank_one(bsys.vectors[k], bsys.vectors[k]);
  }
  const double lam_max =
      std::max(top_eigen(binv_half * at * binv_half, tol).value, 0.0);
  const double m = std::sqrt(lam_max);
  out.constant = m;

  // Monte-Carlo spot check on 100 seeded directions in the complement.
  SplitMix64 rng(tol.seed ^ 0x6d616a6f72697aull);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<cplx> coeff(comp.dim());
    for (auto& c : coeff) c = rng.unit_box();
    const MFunction x = from_coefficients(comp.basis(), coeff);
    const double sx = norm(s.apply(x));
    const double tx = norm(t.apply(x));
    if (sx > (m + 1e-9) * tx * (1.0 + 1e-8))
      throw NumericalFailure("majorizes: sampled direction violates the bound",
                             tx > 0.0 ? sx / tx : sx);
  }
  return out;
}

bool closed_range_hypothesis(const WCEOp& t, double delta,
                             const Tolerances& tol) {
  if (!(delta > 0.0)) throw UsageError("closed_range_hypothesis: delta > 0");
  const std::size_t n = t.space().size();
  std::vector<cplx> eu(n, 0.0);
  for (std::size_t b = 0; b < t.partition().num_blocks(); ++b) {
    cplx acc = 0.0;
    for (std::size_t i : t.partition().blocks()[b])
      acc += t.space().weight(i) * t.u()[i];
    acc /= t.partition().block_measure(b);
    for (std::size_t i : t.partition().blocks()[b]) eu[i] = acc;
  }
  double top_eu = 0.0, top_u2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    top_eu = std::max(top_eu, std::abs(eu[i]));
    top_u2 = std::max(top_u2, t.e_u2()[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const bool in_z_eu = std::abs(eu[i]) > tol.supp * top_eu;
    const bool in_z_u2 = t.e_u2()[i] > tol.supp * top_u2;
    if (in_z_eu != in_z_u2) return false;                   // z(E(u)) = z(E(|u|^2))
    if (in_z_u2) {
      if (std::abs(eu[i].imag()) > tol.supp * std::max(top_eu, 1.0))
        return false;
      if (eu[i].real() < delta) return false;               // E(u) >= delta there
    }
  }
  return true;
}

QtMajorization qt_majorization_suite(const WCEOp& t, const LinOperator& s,
                                     const Tolerances& tol) {
  for (std::size_t i = 0; i < t.space().size(); ++i)
    if (t.u()[i].real() < 0.0 || std::abs(t.u()[i].imag()) > 0.0)
      throw UsageError("qt_majorization_suite: u must be nonnegative");
  double delta = 0.0;
  {
    double min_pos = 0.0;
    double top = 0.0;
    for (const cplx& v : t.block_e_uw()) top = std::max(top, std::abs(v));
    for (std::size_t b = 0; b < t.partition().num_blocks(); ++b) {
      cplx acc = 0.0;
      for (std::size_t i : t.partition().blocks()[b])
        acc += t.space().weight(i) * t.u()[i];
      const double eu = (acc / t.partition().block_measure(b)).real();
      if (eu > 0.0) min_pos = min_pos == 0.0 ? eu : std::min(min_pos, eu);
    }
    delta = min_pos;
  }
  if (!(delta > 0.0))
    throw UsageError("qt_majorization_suite: E(u) vanishes everywhere");

  QtMajorization out;
  out.qt_member = qt_member(t, s, default_m_grid(), tol).criterion;
  if (out.qt_member) {
    const LinOperator emu =
        wce_matrix(t.partition(), t.u(), MFunction::one(t.space()));
    out.majorizes_holds = majorizes(emu, s, tol).holds;
    out.implication = out.majorizes_holds;
  }
  return out;
}

RankOneMajorization rank_one_majorization(const MFunction& x,
                                          const MFunction& y,
                                          const LinOperator& s,
                                          const Tolerances& tol) {
  if (norm(x) == 0.0 || norm(y) == 0.0)
    throw UsageError("rank_one_majorization: x, y must be nonzero");
  RankOneMajorization out;
  out.qt_member = rank_one_qt(x, y, s, tol);
  if (out.qt_member) {
    out.majorizes_holds = majorizes(rank_one(x, y), s, tol).holds;
    out.implication = out.majorizes_holds;
  }
  return out;
}

}  // namespace wce
