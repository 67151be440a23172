#include "wce/sra.hpp"

#include <algorithm>
#include <cmath>

namespace wce {

namespace {

double block_norm2(const MeasureSpace& s, const std::vector<std::size_t>& block,
                   const std::vector<cplx>& vals) {
  double acc = 0.0;
  for (std::size_t i : block) acc += s.weight(i) * std::norm(vals[i]);
  return acc;
}

// Blockwise E(u f), one value per partition block.
std::vector<cplx> block_euf(const WCEOp& t, const MFunction& f) {
  std::vector<cplx> out;
  const MeasureSpace& s = t.space();
  for (std::size_t b = 0; b < t.partition().num_blocks(); ++b) {
    cplx acc = 0.0;
    for (std::size_t i : t.partition().blocks()[b])
      acc += s.weight(i) * t.u()[i] * f[i];
    out.push_back(acc / t.partition().block_measure(b));
  }
  return out;
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Member:
      return "Member";
    case Verdict::NonMember:
      return "NonMember";
    default:
      return "Inconclusive";
  }
}

std::vector<long> default_m_grid(long m_max) {
  std::vector<long> grid;
  for (long m = 1; m <= m_max; m *= 2) grid.push_back(m);
  return grid;
}

Verdict classify_evidence(const std::vector<std::pair<long, double>>& g,
                          double scale) {
  if (g.empty()) return Verdict::Inconclusive;
  const double floor = 1e-12 * std::max(1.0, scale);
  bool all_tiny = true;
  for (const auto& [m, val] : g) all_tiny = all_tiny && val <= floor;
  if (scale <= 0.0 || all_tiny) return Verdict::Member;

  if (g.size() >= 3) {
    double lo = g[g.size() - 3].second, hi = lo;
    for (std::size_t k = g.size() - 3; k < g.size(); ++k) {
      lo = std::min(lo, g[k].second);
      hi = std::max(hi, g[k].second);
    }
    if (hi - lo <= 0.01 * hi) return Verdict::Member;
  }
  if (g.size() >= 4) {
    // least-squares slope of (ln m, ln g) over the last four samples
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    bool ok = true;
    for (std::size_t k = g.size() - 4; k < g.size(); ++k) {
      if (g[k].second <= floor) {
        ok = false;
        break;
      }
      const double x = std::log(static_cast<double>(g[k].first));
      const double y = std::log(g[k].second);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    if (ok) {
      const double slope = (4 * sxy - sx * sy) / (4 * sxx - sx * sx);
      const bool increasing = g.back().second > g[g.size() - 4].second;
      if (slope > 0.25 && increasing) return Verdict::NonMember;
    }
  }
  return Verdict::Inconclusive;
}

// -- block decomposition --------------------------------------------------------

BlockDecomp block_decompose(const WCEOp& t, const Tolerances& tol) {
  const MeasureSpace& s = t.space();
  const Partition& p = t.partition();
  const std::size_t n = s.size();

  double u2_top = 0.0;
  for (double v : t.block_e_u2()) u2_top = std::max(u2_top, v);

  std::vector<std::vector<cplx>> h1_raw;
  std::vector<std::size_t> h1_block;
  std::vector<std::vector<cplx>> h2_raw;
  for (std::size_t b = 0; b < p.num_blocks(); ++b) {
    const auto& block = p.blocks()[b];
    const bool supported = t.block_e_u2()[b] > tol.supp * u2_top;
    std::vector<cplx> ub(n, 0.0);
    if (supported) {
      for (std::size_t i : block) ub[i] = std::conj(t.u()[i]);
      const double nb = std::sqrt(block_norm2(s, block, ub));
      for (std::size_t i : block) ub[i] /= nb;
      h1_raw.push_back(ub);
      h1_block.push_back(b);
    }
    // local complement inside the block: coordinates orthogonal to ub
    std::vector<std::vector<cplx>> local;
    if (supported) local.push_back(ub);
    for (std::size_t i : block) {
      std::vector<cplx> e(n, 0.0);
      e[i] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : local) {
          cplx c = 0.0;
          for (std::size_t k : block) c += s.weight(k) * e[k] * std::conj(q[k]);
          for (std::size_t k : block) e[k] -= c * q[k];
        }
      }
      const double ne = std::sqrt(block_norm2(s, block, e));
      if (ne <= 1e-8 * std::sqrt(s.weight(i))) continue;
      for (std::size_t k : block) e[k] /= ne;
      local.push_back(e);
      h2_raw.push_back(e);
    }
  }

  Subspace h1 = orthonormalize(s, h1_raw, 1e-12, tol);
  Subspace h2 = orthonormalize(s, h2_raw, 1e-12, tol);

  // second route: kernel of E M_u by elimination; the two must agree
  Subspace h2_kernel = kernel(wce_matrix(p, t.u(), MFunction::one(s)), tol);
  if (h2_kernel.dim() != h2.dim() ||
      containment_sine(h2_kernel, h2) > 1e-8)
    throw NumericalFailure(
        "block_decompose: kernel route disagrees with the blockwise route",
        containment_sine(h2_kernel, h2));

  LinOperator p1 = project(h1);
  LinOperator p2 = project(h2);
  return {std::move(h1), std::move(h2), std::move(p1), std::move(p2),
          std::move(h1_block)};
}

// -- RmFamily ---------------------------------------------------------------------

RmFamily::RmFamily(MeasureSpace s, LinOperator src)
    : space_(std::move(s)), source_(std::move(src)) {}

RmFamily RmFamily::from_wce(const WCEOp& t, const Tolerances& tol) {
  RmFamily f(t.space(), t.matrix());
  f.rank_one_ = false;
  f.wce_ = t;
  f.r_ = spectral_radius(t);
  const MeasureSpace& s = t.space();
  double u2_top = 0.0;
  for (double v : t.block_e_u2()) u2_top = std::max(u2_top, v);
  for (std::size_t b = 0; b < t.partition().num_blocks(); ++b) {
    if (t.block_e_u2()[b] > tol.supp * u2_top && t.block_e_u2()[b] > 0.0) {
      const auto& block = t.partition().blocks()[b];
      std::vector<cplx> ub(s.size(), 0.0);
      for (std::size_t i : block) ub[i] = std::conj(t.u()[i]);
      const double nb = std::sqrt(block_norm2(s, block, ub));
      for (std::size_t i : block) ub[i] /= nb;
      f.block_units_.emplace_back(MFunction(s, std::move(ub)));
    } else {
      f.block_units_.emplace_back(std::nullopt);
    }
  }
  return f;
}

RmFamily RmFamily::from_rank_one(const MFunction& x, const MFunction& y,
                                 const Tolerances&) {
  require_same_space(x.space(), y.space(), "RmFamily::from_rank_one");
  RmFamily f(x.space(), rank_one(x, y));
  f.rank_one_ = true;
  f.r_ = std::abs(inner(x, y));
  f.nx2_ = norm(x);
  f.nx2_ *= f.nx2_;
  const double ny = norm(y);
  f.ny2_ = ny * ny;
  if (ny > 0.0) f.yhat_ = (cplx(1.0 / ny)) * y;
  return f;
}

double RmFamily::d(long m) const {
  if (m < 1) throw UsageError("RmFamily: m must be positive");
  return 1.0 / (1.0 / static_cast<double>(m) + r_);
}

std::vector<double> RmFamily::v(long m) const {
  if (rank_one_) throw UsageError("RmFamily::v: rank-one family has no v_m");
  const double dm = d(m);
  const WCEOp& t = *wce_;
  std::vector<double> out(space_.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = dm * dm * t.e_w2()[i] / (1.0 - dm * dm * std::norm(t.e_uw()[i]));
  return out;
}

std::vector<double> RmFamily::q(long m) const {
  std::vector<double> out = v(m);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = 1.0 + out[i] * wce_->e_u2()[i];
  return out;
}

std::vector<double> RmFamily::q_blocks(long m) const {
  if (rank_one_) throw UsageError("RmFamily::q_blocks: rank-one family");
  const double dm = d(m);
  const WCEOp& t = *wce_;
  std::vector<double> out(t.partition().num_blocks());
  for (std::size_t b = 0; b < out.size(); ++b) {
    const double vb = dm * dm * t.block_e_w2()[b] /
                      (1.0 - dm * dm * std::norm(t.block_e_uw()[b]));
    out[b] = 1.0 + vb * t.block_e_u2()[b];
  }
  return out;
}

double RmFamily::lambda(long m) const {
  if (!rank_one_) throw UsageError("RmFamily::lambda: WCE family");
  const double dm = d(m);
  const double c = dm * dm * nx2_ / (1.0 - dm * dm * r_ * r_);
  return std::sqrt(1.0 + c * ny2_);
}

LinOperator RmFamily::rm(long m) const {
  LinOperator out = LinOperator::identity(space_);
  if (rank_one_) {
    if (!yhat_) return out;
    return out + cplx(lambda(m) - 1.0) * rank_one(*yhat_, *yhat_);
  }
  const std::vector<double> qb = q_blocks(m);
  for (std::size_t b = 0; b < block_units_.size(); ++b) {
    if (!block_units_[b]) continue;
    out = out + cplx(std::sqrt(qb[b]) - 1.0) *
                    rank_one(*block_units_[b], *block_units_[b]);
  }
  return out;
}

LinOperator RmFamily::rm_inverse(long m) const {
  LinOperator out = LinOperator::identity(space_);
  if (rank_one_) {
    if (!yhat_) return out;
    return out + cplx(1.0 / lambda(m) - 1.0) * rank_one(*yhat_, *yhat_);
  }
  const std::vector<double> qb = q_blocks(m);
  for (std::size_t b = 0; b < block_units_.size(); ++b) {
    if (!block_units_[b]) continue;
    out = out + cplx(1.0 / std::sqrt(qb[b]) - 1.0) *
                    rank_one(*block_units_[b], *block_units_[b]);
  }
  return out;
}

// -- series route ------------------------------------------------------------------

LinOperator rm_series_operator(const LinOperator& t, double radius, long m,
                               const Tolerances& tol, long k_max) {
  if (m < 1) throw UsageError("rm_series: m must be positive");
  const double dm = 1.0 / (1.0 / static_cast<double>(m) + radius);
  const LinOperator scaled = cplx(dm) * t;
  LinOperator accum = LinOperator::identity(t.space());
  LinOperator power = LinOperator::identity(t.space());
  const double asym = dm * radius * dm * radius;  // true geometric tail ratio
  double t_prev = 0.0;
  for (long n = 1; n <= k_max; ++n) {
    power = power * scaled;  // (d T)^n
    accum = accum + adjoint(power) * power;
    const double tn = wfrobenius(power) * wfrobenius(power);
    if (tn == 0.0) break;  // nilpotent: the series terminates exactly
    if (n >= 2) {
      const double rho = std::max(tn / t_prev, asym);
      if (rho < 0.9999 && tn * rho / (1.0 - rho) < 1e-12) break;
    }
    t_prev = tn;
    if (n == k_max)
      throw NumericalFailure("rm_series: tail bound unattainable", tn);
  }
  return sqrt_positive(accum, tol);
}

LinOperator rm_series(const WCEOp& t, long m, const Tolerances& tol) {
  return rm_series_operator(t.matrix(), spectral_radius(t), m, tol);
}

LinOperator rm_series(const MFunction& x, const MFunction& y, long m,
                      const Tolerances& tol) {
  return rm_series_operator(rank_one(x, y), std::abs(inner(x, y)), m, tol);
}

LinOperator rm_closed(const WCEOp& t, long m, const Tolerances& tol) {
  return RmFamily::from_wce(t, tol).rm(m);
}

LinOperator rm_inverse(const WCEOp& t, long m, const Tolerances& tol) {
  return RmFamily::from_wce(t, tol).rm_inverse(m);
}

LinOperator rank_one_rm(const MFunction& x, const MFunction& y, long m,
                        const Tolerances& tol) {
  return RmFamily::from_rank_one(x, y, tol).rm(m);
}

LinOperator rank_one_rm_inverse(const MFunction& x, const MFunction& y, long m,
                                const Tolerances& tol) {
  return RmFamily::from_rank_one(x, y, tol).rm_inverse(m);
}

// -- membership -----------------------------------------------------------------

MembershipVerdict bt_member_definitional(const RmFamily& family,
                                         const LinOperator& s,
                                         const std::vector<long>& grid,
                                         const Tolerances& tol) {
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (grid[k] <= grid[k - 1])
      throw UsageError("bt_member_definitional: m grid must be increasing");
  MembershipVerdict out;
  const double s_norm = op_norm(s, tol);
  for (long m : grid) {
    const LinOperator g = family.rm(m) * s * family.rm_inverse(m);
    out.evidence.emplace_back(m, op_norm(g, tol));
  }
  out.verdict = classify_evidence(out.evidence, s_norm);
  return out;
}

bool bt_member_kernel_criterion(const BlockDecomp& d, const LinOperator& s,
                                const Tolerances& tol) {
  const double s_norm = op_norm(s, tol);
  if (s_norm == 0.0) return true;
  for (const auto& h : d.h2.basis()) {
    const MFunction image = d.p1.apply(s.apply(h));
    if (norm(image) > tol.inv * s_norm) return false;
  }
  return true;
}

bool bt_member_kernel_criterion(const WCEOp& t, const LinOperator& s,
                                const Tolerances& tol) {
  return bt_member_kernel_criterion(block_decompose(t, tol), s, tol);
}

QtResult qt_member(const WCEOp& t, const LinOperator& s,
                   const std::vector<long>& grid, const Tolerances& tol) {
  QtResult out;
  const BlockDecomp d = block_decompose(t, tol);
  const double s_norm = op_norm(s, tol);
  out.h2_invariant = bt_member_kernel_criterion(d, s, tol);
  out.h2_in_nullspace = true;
  for (const auto& h : d.h2.basis()) {
    if (norm(s.apply(h)) > tol.inv * std::max(s_norm, 1e-300)) {
      out.h2_in_nullspace = false;
      break;
    }
  }
  if (s_norm == 0.0) out.h2_in_nullspace = true;
  out.criterion = out.h2_invariant && out.h2_in_nullspace;
  out.x_block_norm = op_norm(d.p1 * s * d.p1, tol);

  const RmFamily family = RmFamily::from_wce(t, tol);
  for (long m : grid) {
    const LinOperator g = family.rm(m) * s * family.rm_inverse(m);
    out.evidence.evidence.emplace_back(m, op_norm(g, tol));
  }
  out.evidence.verdict = classify_evidence(out.evidence.evidence, s_norm);
  if (s_norm == 0.0) {
    out.decay_observed = true;
  } else {
    const auto& ev = out.evidence.evidence;
    bool decreasing = true;
    const std::size_t tail = ev.size() >= 4 ? ev.size() - 4 : 0;
    for (std::size_t k = tail + 1; k < ev.size(); ++k)
      decreasing = decreasing &&
                   ev[k].second <= ev[k - 1].second + 1e-9 * s_norm;
    out.decay_observed = decreasing && ev.back().second <= 1e-3 * s_norm;
  }
  out.evidence.criterion_flags = {
      {"h2_invariant", out.h2_invariant},
      {"h2_in_nullspace", out.h2_in_nullspace},
      {"decay_observed", out.decay_observed},
  };
  return out;
}

bool rank_one_qt(const MFunction& x, const MFunction& y, const LinOperator& s,
                 const Tolerances& tol) {
  require_same_space(x.space(), s.space(), "rank_one_qt");
  const double ny = norm(y);
  if (ny == 0.0) throw UsageError("rank_one_qt: y must be nonzero");
  const MFunction yhat = cplx(1.0 / ny) * y;
  const LinOperator p = rank_one(yhat, yhat);
  const LinOperator ip = LinOperator::identity(y.space()) - p;
  const double s_norm = op_norm(s, tol);
  if (s_norm == 0.0) return true;
  return op_norm(s - ip * s * p, tol) <= 1e-9 * s_norm;
}

bool rank_one_bt_criterion(const MFunction& w, const LinOperator& s,
                           const Tolerances& tol) {
  const double nw = norm(w);
  if (nw == 0.0) throw UsageError("rank_one_bt_criterion: w must be nonzero");
  const MFunction what = cplx(1.0 / nw) * w;
  const LinOperator p = rank_one(what, what);
  const LinOperator ip = LinOperator::identity(w.space()) - p;
  const double s_norm = op_norm(s, tol);
  if (s_norm == 0.0) return true;
  return op_norm(p * s * ip, tol) <= 1e-9 * s_norm;
}

bool rank_one_bt_invariance(const MFunction& w, const MFunction& x,
                            const MFunction& y,
                            const std::vector<LinOperator>& batch,
                            const Tolerances& tol) {
  if (std::abs(norm(x) - 1.0) > 1e-9 || std::abs(norm(y) - 1.0) > 1e-9 ||
      std::abs(norm(w) - 1.0) > 1e-9)
    throw UsageError("rank_one_bt_invariance: unit vectors required");
  // Derive the criterion subspace from each operator independently:
  // H1 = N(u (x) w)^perp, which is span{w} whatever the left factor is.
  const Subspace h1_xw = orthocomplement(kernel(rank_one(x, w), tol), tol);
  const Subspace h1_yw = orthocomplement(kernel(rank_one(y, w), tol), tol);
  if (h1_xw.dim() != 1 || h1_yw.dim() != 1)
    throw UsageError("rank_one_bt_invariance: degenerate rank-one operator");
  const LinOperator id = LinOperator::identity(w.space());
  const LinOperator p_xw = project(h1_xw);
  const LinOperator p_yw = project(h1_yw);
  for (const auto& s : batch) {
    const double s_norm = op_norm(s, tol);
    const bool in_xw =
        s_norm == 0.0 ||
        op_norm(p_xw * s * (id - p_xw), tol) <= 1e-9 * s_norm;
    const bool in_yw =
        s_norm == 0.0 ||
        op_norm(p_yw * s * (id - p_yw), tol) <= 1e-9 * s_norm;
    if (in_xw != in_yw) return false;
  }
  return true;
}

RankOneBtWce rank_one_in_bt_wce(const WCEOp& t, const MFunction& f,
                                const MFunction& g,
                                const std::vector<long>& grid,
                                const Tolerances& tol) {
  require_same_space(t.space(), f.space(), "rank_one_in_bt_wce");
  require_same_space(t.space(), g.space(), "rank_one_in_bt_wce");
  RankOneBtWce out;
  const RmFamily family = RmFamily::from_wce(t, tol);
  const double nf2 = norm(f) * norm(f);
  const double ng2 = norm(g) * norm(g);
  const std::vector<cplx> euf = block_euf(t, f);
  const std::vector<cplx> eug = block_euf(t, g);
  const Partition& p = t.partition();
  for (long m : grid) {
    const double dm = family.d(m);
    double rf2 = nf2, rg2 = ng2;
    for (std::size_t b = 0; b < p.num_blocks(); ++b) {
      const double mb = p.block_measure(b);
      const double vb = dm * dm * t.block_e_w2()[b] /
                        (1.0 - dm * dm * std::norm(t.block_e_uw()[b]));
      const double qb = 1.0 + vb * t.block_e_u2()[b];
      rf2 += mb * vb * std::norm(euf[b]);
      rg2 -= mb * (vb / qb) * std::norm(eug[b]);
    }
    out.values.emplace_back(
        m, std::sqrt(std::max(rf2, 0.0)) * std::sqrt(std::max(rg2, 0.0)));
  }
  out.verdict = classify_evidence(out.values, norm(f) * norm(g));
  // printed variant alpha_m = v_m / (v_m E(|u|^2) - 1) at the top of the grid
  {
    const long m = grid.back();
    const double dm = family.d(m);
    double acc = 0.0;
    for (std::size_t b = 0; b < p.num_blocks(); ++b) {
      const double vb = dm * dm * t.block_e_w2()[b] /
                        (1.0 - dm * dm * std::norm(t.block_e_uw()[b]));
      const double den = vb * t.block_e_u2()[b] - 1.0;
      if (den != 0.0)
        acc += p.block_measure(b) * (vb / den) * std::norm(eug[b]);
    }
    out.printed_variant_top = acc;
  }
  return out;
}

// -- algebra-level checks -----------------------------------------------------------

namespace {

std::vector<std::pair<long, double>> sup_condition_samples(
    const WCEOp& t, const std::vector<long>& grid, const Tolerances& tol) {
  const RmFamily family = RmFamily::from_wce(t, tol);
  std::vector<std::pair<long, double>> out;
  for (long m : grid) {
    const std::vector<double> vm = family.v(m);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < vm.size(); ++i) {
      const double uv = t.e_u2()[i] * vm[i];
      a = std::max(a, uv);
      const double q = 1.0 + uv;
      b = std::max(b, uv / q);  // audited variant of the printed quotient
    }
    out.emplace_back(m, a + b * (1.0 + a));
  }
  return out;
}

}  // namespace

BtFullResult bt_equals_full(const WCEOp& t, const std::vector<long>& grid,
                            const Tolerances& tol) {
  BtFullResult out;
  const BlockDecomp d = block_decompose(t, tol);
  out.dim_h2 = d.h2.dim();
  const std::size_t n = t.space().size();
  out.structural = out.dim_h2 == 0 || out.dim_h2 == n;
  out.sup_sequence = sup_condition_samples(t, grid, tol);
  out.sup_verdict = classify_evidence(out.sup_sequence, 1.0);
  if (!out.structural && !d.h1.basis().empty() && !d.h2.basis().empty()) {
    // pick an h1 block vector whose q_m diverges, so the evidence grows
    const double r = spectral_radius(t);
    std::optional<std::size_t> pick;
    for (std::size_t k = 0; k < d.h1_block.size(); ++k) {
      const std::size_t b = d.h1_block[k];
      const bool diverges =
          t.block_e_u2()[b] > 0.0 && t.block_e_w2()[b] > 0.0 &&
          (r == 0.0 || std::abs(t.block_e_uw()[b]) >= r * (1.0 - 1e-9));
      if (diverges) {
        pick = k;
        break;
      }
    }
    if (pick)
      out.counterexample =
          rank_one(d.h1.basis()[*pick], d.h2.basis().front());
  }
  return out;
}

IsometryResult isometry_multiple_check(const WCEOp& t,
                                       const std::vector<long>& grid,
                                       const Tolerances& tol) {
  IsometryResult out;
  const LinOperator b = adjoint(t.matrix()) * t.matrix();
  const std::size_t n = t.space().size();
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += b.matrix()(i, i).real();
  out.c = trace / static_cast<double>(n);
  out.residual =
      op_norm(b - cplx(out.c) * LinOperator::identity(t.space()), tol);
  const double scale = wce_norm(t) * wce_norm(t);
  out.is_constant_multiple = out.residual <= 1e-9 * std::max(scale, 1e-300) ||
                             (scale == 0.0 && out.residual == 0.0);
  out.sup_sequence = sup_condition_samples(t, grid, tol);
  out.sup_verdict = classify_evidence(out.sup_sequence, 1.0);
  return out;
}

}  // namespace wce
