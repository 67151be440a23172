#include "wce/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wce {

namespace {

// splitmix64: tiny, portable, deterministic.
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

cplx winner(const std::vector<double>& mu, const std::vector<cplx>& x,
            const std::vector<cplx>& y) {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) acc += mu[i] * x[i] * std::conj(y[i]);
  return acc;
}

double wnorm(const std::vector<double>& mu, const std::vector<cplx>& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) acc += mu[i] * std::norm(x[i]);
  return std::sqrt(acc);
}

void scale_vec(std::vector<cplx>& x, cplx s) {
  for (auto& v : x) v *= s;
}

// x -= <x, b> b for each b (one pass).
void project_out(const std::vector<double>& mu, std::vector<cplx>& x,
                 const std::vector<std::vector<cplx>>& basis) {
  for (const auto& b : basis) {
    const cplx c = winner(mu, x, b);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= c * b[i];
  }
}

struct PowerOut {
  double lam = 0.0;
  std::vector<cplx> v;
  double residual = 0.0;
  bool converged = false;
};

// Plain power iteration on a weighted-self-adjoint PSD matrix, deflated
// against `prior`. Stops when the eigen-residual ||Av - lam v|| drops below
// res_target * scale, or when progress stalls (a cluster: the Ritz step over
// the restarts resolves those). Returns the best-residual Rayleigh pair seen.
PowerOut power_once(const CMatrix& a, const std::vector<double>& mu,
                    const std::vector<std::vector<cplx>>& prior,
                    std::uint64_t seed, double res_target, int max_iter) {
  const std::size_t n = mu.size();
  SplitMix64 rng(seed);
  std::vector<cplx> v(n);
  for (int attempt = 0; attempt < 16; ++attempt) {
    for (auto& e : v) e = rng.unit_box();
    project_out(mu, v, prior);
    const double nv = wnorm(mu, v);
    if (nv > 1e-8) {
      scale_vec(v, 1.0 / nv);
      break;
    }
  }
  PowerOut out;
  out.v = v;
  out.residual = 1e300;
  double last_check = 1e300;
  std::vector<cplx> resid(n);
  for (int it = 0; it < max_iter; ++it) {
    std::vector<cplx> w = a.apply(v);
    project_out(mu, w, prior);
    const double lam = winner(mu, w, v).real();
    for (std::size_t i = 0; i < n; ++i) resid[i] = w[i] - lam * v[i];
    const double res = wnorm(mu, resid);
    if (res < out.residual) {
      out.lam = lam;
      out.v = v;
      out.residual = res;
    }
    const double scale = std::max(std::abs(lam), 1e-280);
    if (res <= res_target * scale) {
      out.converged = true;
      return out;
    }
    const double nw = wnorm(mu, w);
    if (nw <= 1e-280) {  // v is (numerically) in the kernel
      out.lam = 0.0;
      out.v = v;
      out.residual = 0.0;
      out.converged = true;
      return out;
    }
    scale_vec(w, 1.0 / nw);
    v = std::move(w);
    if (it % 128 == 127) {  // geometric progress check
      if (out.residual > 0.85 * last_check) return out;  // stalled
      last_check = out.residual;
    }
  }
  return out;
}

struct TopOut {
  double value = 0.0;
  std::vector<cplx> v;
  double residual = 0.0;
  bool converged = false;
};

// Three seeded restarts aggregated by a Rayleigh-Ritz step over the collected
// iterates. The Ritz step resolves clustered top eigenvalues that a single
// power run cannot separate.
TopOut top_eigen_impl(const CMatrix& a, const std::vector<double>& mu,
                      const std::vector<std::vector<cplx>>& prior,
                      const Tolerances& tol, std::uint64_t seed,
                      double res_target, double scale_floor) {
  const std::size_t n = mu.size();
  bool any_conv = false;
  std::vector<std::vector<cplx>> pool;
  for (int k = 0; k < 3; ++k) {
    PowerOut r = power_once(a, mu, prior, seed + static_cast<std::uint64_t>(k),
                            res_target, tol.max_iter);
    any_conv = any_conv || r.converged;
    pool.push_back(std::move(r.v));
  }
  // Krylov enrichment: at these dimensions the Ritz block over {v, Av, A^2 v}
  // per restart resolves slow near-degenerate spectra the single-vector runs
  // cannot separate
  std::vector<std::vector<cplx>> candidates;
  for (auto& v : pool) {
    std::vector<cplx> av = a.apply(v);
    std::vector<cplx> aav = a.apply(av);
    candidates.push_back(std::move(v));
    candidates.push_back(std::move(av));
    candidates.push_back(std::move(aav));
  }
  std::vector<std::vector<cplx>> basis;
  for (auto& v : candidates) {
    const double n0 = wnorm(mu, v);
    if (n0 <= 1e-280) continue;
    scale_vec(v, 1.0 / n0);
    project_out(mu, v, prior);
    project_out(mu, v, basis);
    project_out(mu, v, prior);
    project_out(mu, v, basis);
    const double nv = wnorm(mu, v);
    if (nv > 1e-8) {
      scale_vec(v, 1.0 / nv);
      basis.push_back(std::move(v));
    }
  }
  TopOut out;
  if (basis.empty()) {  // prior spans everything that is left
    out.v.assign(n, 0.0);
    out.converged = true;
    return out;
  }
  const std::size_t s = basis.size();
  std::vector<std::vector<cplx>> images(s);
  for (std::size_t j = 0; j < s; ++j) images[j] = a.apply(basis[j]);
  CMatrix ritz(s, s);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) ritz(i, j) = winner(mu, images[j], basis[i]);
  for (std::size_t i = 0; i < s; ++i)  // hermitianize against rounding
    for (std::size_t j = i; j < s; ++j) {
      const cplx m = 0.5 * (ritz(i, j) + std::conj(ritz(j, i)));
      ritz(i, j) = m;
      ritz(j, i) = std::conj(m);
    }
  std::vector<double> vals;
  CMatrix vecs;
  eig_hermitian(ritz, vals, vecs);
  std::vector<cplx> v(n, 0.0);
  for (std::size_t j = 0; j < s; ++j)
    for (std::size_t i = 0; i < n; ++i) v[i] += vecs(j, 0) * basis[j][i];
  const double nv = wnorm(mu, v);
  if (nv > 0.0) scale_vec(v, 1.0 / nv);
  std::vector<cplx> av = a.apply(v);
  project_out(mu, av, prior);
  double res = 0.0;
  {
    std::vector<cplx> d = av;
    for (std::size_t i = 0; i < n; ++i) d[i] -= vals[0] * v[i];
    res = wnorm(mu, d);
  }
  out.value = vals[0];
  out.v = std::move(v);
  out.residual = res;
  // clustered top eigenvalues leave a width-sized vector residual while the
  // Ritz value itself is accurate; accept small residuals relative to the
  // caller-supplied scale
  out.converged =
      any_conv || res <= 1e-6 * std::max(std::abs(vals[0]), scale_floor);
  return out;
}

}  // namespace

// -- basic types --------------------------------------------------------------

MeasureSpace::MeasureSpace(std::vector<double> weights) : w_(std::move(weights)) {
  if (w_.empty()) throw UsageError("MeasureSpace: needs at least one atom");
  for (std::size_t i = 0; i < w_.size(); ++i)
    if (!(w_[i] > 0.0) || !std::isfinite(w_[i]))
      throw UsageError("MeasureSpace: weights must be positive (atom " +
                       std::to_string(i) + ")");
}

double MeasureSpace::total() const {
  double t = 0.0;
  for (double w : w_) t += w;
  return t;
}

MFunction::MFunction(MeasureSpace space, std::vector<cplx> values)
    : space_(std::move(space)), v_(std::move(values)) {
  if (v_.size() != space_.size())
    throw UsageError("MFunction: value count does not match the space");
}

MFunction MFunction::zero(const MeasureSpace& s) {
  return {s, std::vector<cplx>(s.size(), 0.0)};
}

MFunction MFunction::one(const MeasureSpace& s) {
  return {s, std::vector<cplx>(s.size(), 1.0)};
}

MFunction MFunction::coordinate(const MeasureSpace& s, std::size_t i) {
  std::vector<cplx> v(s.size(), 0.0);
  v.at(i) = 1.0;
  return {s, std::move(v)};
}

LinOperator::LinOperator(MeasureSpace space, CMatrix m)
    : space_(std::move(space)), m_(std::move(m)) {
  if (m_.rows() != space_.size() || m_.cols() != space_.size())
    throw UsageError("LinOperator: matrix dimension does not match the space");
  for (std::size_t i = 0; i < m_.rows(); ++i)
    for (std::size_t j = 0; j < m_.cols(); ++j)
      if (!std::isfinite(m_(i, j).real()) || !std::isfinite(m_(i, j).imag()))
        throw UsageError("LinOperator: entries must be finite");
}

LinOperator LinOperator::identity(const MeasureSpace& s) {
  return {s, CMatrix::identity(s.size())};
}

LinOperator LinOperator::zero(const MeasureSpace& s) {
  return {s, CMatrix(s.size(), s.size())};
}

MFunction LinOperator::apply(const MFunction& f) const {
  require_same_space(space_, f.space(), "LinOperator::apply");
  return {space_, m_.apply(f.values())};
}

LinOperator operator*(const LinOperator& a, const LinOperator& b) {
  require_same_space(a.space(), b.space(), "operator*");
  return {a.space(), a.matrix() * b.matrix()};
}

LinOperator operator+(const LinOperator& a, const LinOperator& b) {
  require_same_space(a.space(), b.space(), "operator+");
  return {a.space(), a.matrix() + b.matrix()};
}

LinOperator operator-(const LinOperator& a, const LinOperator& b) {
  require_same_space(a.space(), b.space(), "operator-");
  return {a.space(), a.matrix() - b.matrix()};
}

LinOperator operator*(cplx s, const LinOperator& a) {
  return {a.space(), s * a.matrix()};
}

Subspace::Subspace(MeasureSpace space, std::vector<MFunction> basis,
                   const Tolerances& tol)
    : space_(std::move(space)), basis_(std::move(basis)) {
  for (const auto& b : basis_)
    require_same_space(space_, b.space(), "Subspace");
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    for (std::size_t j = i; j < basis_.size(); ++j) {
      const cplx ip = inner(basis_[i], basis_[j]);
      const double target = (i == j) ? 1.0 : 0.0;
      if (std::abs(ip - target) > tol.orth)
        throw UsageError("Subspace: basis is not orthonormal");
    }
  }
}

void require_same_space(const MeasureSpace& a, const MeasureSpace& b,
                        const char* who) {
  if (!(a == b))
    throw UsageError(std::string(who) + ": operands live on different spaces");
}

// -- inner product layer -------------------------------------------------------

cplx inner(const MFunction& f, const MFunction& g) {
  require_same_space(f.space(), g.space(), "inner");
  return winner(f.space().weights(), f.values(), g.values());
}

double norm(const MFunction& f) {
  return wnorm(f.space().weights(), f.values());
}

MFunction operator+(const MFunction& f, const MFunction& g) {
  require_same_space(f.space(), g.space(), "operator+");
  std::vector<cplx> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f[i] + g[i];
  return {f.space(), std::move(v)};
}

MFunction operator-(const MFunction& f, const MFunction& g) {
  require_same_space(f.space(), g.space(), "operator-");
  std::vector<cplx> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f[i] - g[i];
  return {f.space(), std::move(v)};
}

MFunction operator*(cplx s, const MFunction& f) {
  std::vector<cplx> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = s * f[i];
  return {f.space(), std::move(v)};
}

MFunction pointwise(const MFunction& f, const MFunction& g) {
  require_same_space(f.space(), g.space(), "pointwise");
  std::vector<cplx> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f[i] * g[i];
  return {f.space(), std::move(v)};
}

MFunction conjugate(const MFunction& f) {
  std::vector<cplx> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::conj(f[i]);
  return {f.space(), std::move(v)};
}

double max_abs(const MFunction& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
  return m;
}

// -- operator layer -------------------------------------------------------------

LinOperator adjoint(const LinOperator& a) {
  const auto& mu = a.space().weights();
  const std::size_t n = mu.size();
  CMatrix t(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      t(i, j) = std::conj(a.matrix()(j, i)) * (mu[j] / mu[i]);
  return {a.space(), std::move(t)};
}

LinOperator multiplication(const MFunction& a) {
  const std::size_t n = a.size();
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = a[i];
  return {a.space(), std::move(m)};
}

LinOperator rank_one(const MFunction& f, const MFunction& g) {
  require_same_space(f.space(), g.space(), "rank_one");
  const auto& mu = f.space().weights();
  const std::size_t n = mu.size();
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = f[i] * mu[j] * std::conj(g[j]);
  return {f.space(), std::move(m)};
}

LinOperator project(const Subspace& v) {
  LinOperator p = LinOperator::zero(v.space());
  for (const auto& b : v.basis()) p = p + rank_one(b, b);
  return p;
}

double wfrobenius(const LinOperator& a) {
  const auto& mu = a.space().weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < mu.size(); ++j)
      acc += (mu[i] / mu[j]) * std::norm(a.matrix()(i, j));
  return std::sqrt(acc);
}

double op_norm(const LinOperator& a, const Tolerances& tol) {
  const LinOperator b = adjoint(a) * a;
  TopOut t = top_eigen_impl(b.matrix(), a.space().weights(), {}, tol, tol.seed,
                            1e-9, b.matrix().max_abs());
  const double lam = std::max(t.value, 0.0);
  if (!t.converged &&
      t.residual > 0.02 * std::max(t.value, b.matrix().max_abs()))
    throw NumericalFailure("op_norm: power iteration did not converge",
                           std::sqrt(lam));
  return std::sqrt(lam);
}

Subspace kernel(const LinOperator& a, const Tolerances& tol) {
  auto raw = null_space_raw(a.matrix(), tol.rank);
  return orthonormalize(a.space(), raw, 1e-12, tol);
}

TopEigen top_eigen(const LinOperator& a, const Tolerances& tol) {
  TopOut t = top_eigen_impl(a.matrix(), a.space().weights(), {}, tol, tol.seed,
                            1e-9, a.matrix().max_abs());
  if (!t.converged &&
      t.residual > 0.02 * std::max(std::abs(t.value), a.matrix().max_abs()))
    throw NumericalFailure("top_eigen: power iteration did not converge",
                           t.value);
  return {t.value, MFunction(a.space(), std::move(t.v)), t.residual};
}

EigenSystem eig_selfadjoint(const LinOperator& a, const Tolerances& tol) {
  const auto& mu = a.space().weights();
  const std::size_t n = mu.size();
  const double a0 = a.matrix().max_abs();
  CMatrix work = a.matrix();
  std::vector<std::vector<cplx>> found;
  EigenSystem sys;
  for (std::size_t k = 0; k < n; ++k) {
    if (work.max_abs() <= 1e-12 * a0 || a0 == 0.0) {
      // everything that remains is the (numerically exact) zero eigenspace
      for (std::size_t i = 0; i < n && found.size() < n; ++i) {
        std::vector<cplx> e(n, 0.0);
        e[i] = 1.0;
        project_out(mu, e, found);
        project_out(mu, e, found);
        const double ne = wnorm(mu, e);
        if (ne <= 1e-6 / std::sqrt(mu[i])) continue;
        scale_vec(e, 1.0 / ne);
        sys.values.push_back(0.0);
        sys.vectors.emplace_back(a.space(), e);
        found.push_back(std::move(e));
      }
      break;
    }
    TopOut t = top_eigen_impl(work, mu, found, tol,
                              tol.seed + 1000 + 3 * static_cast<std::uint64_t>(k),
                              3e-13, a0);
    // deflate: work -= lam * v v*
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        work(i, j) -= t.value * t.v[i] * mu[j] * std::conj(t.v[j]);
    sys.values.push_back(t.value);
    sys.vectors.emplace_back(a.space(), t.v);
    found.push_back(std::move(t.v));
  }
  {  // a-posteriori check of the whole decomposition
    CMatrix recon(n, n);
    for (std::size_t k = 0; k < sys.values.size(); ++k) {
      const auto& v = sys.vectors[k].values();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          recon(i, j) += sys.values[k] * v[i] * mu[j] * std::conj(v[j]);
    }
    const double resid = max_abs_diff(recon, a.matrix());
    if (resid > 1e-8 * std::max(a0, 1e-300))
      throw NumericalFailure("eig_selfadjoint: decomposition residual too large",
                             resid);
  }
  // deflation order can jitter among near-equal eigenvalues
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return sys.values[i] > sys.values[j];
  });
  EigenSystem out;
  for (std::size_t k : order) {
    out.values.push_back(sys.values[k]);
    out.vectors.push_back(sys.vectors[k]);
  }
  return out;
}

LinOperator sqrt_positive(const LinOperator& a, const Tolerances& tol) {
  EigenSystem sys = eig_selfadjoint(a, tol);
  LinOperator out = LinOperator::zero(a.space());
  for (std::size_t k = 0; k < sys.values.size(); ++k) {
    const double lam = std::max(sys.values[k], 0.0);
    if (lam == 0.0) continue;
    out = out + cplx(std::sqrt(lam)) * rank_one(sys.vectors[k], sys.vectors[k]);
  }
  return out;
}

// -- subspace utilities ----------------------------------------------------------

Subspace orthonormalize(const MeasureSpace& s,
                        const std::vector<std::vector<cplx>>& raw,
                        double drop_tol, const Tolerances& tol) {
  const auto& mu = s.weights();
  std::vector<std::vector<cplx>> basis;
  for (const auto& r : raw) {
    std::vector<cplx> v = r;
    const double n0 = wnorm(mu, v);
    if (n0 == 0.0) continue;
    project_out(mu, v, basis);
    project_out(mu, v, basis);  // second pass for stability
    const double nv = wnorm(mu, v);
    if (nv <= drop_tol * n0) continue;
    scale_vec(v, 1.0 / nv);
    basis.push_back(std::move(v));
  }
  std::vector<MFunction> funcs;
  funcs.reserve(basis.size());
  for (auto& b : basis) funcs.emplace_back(s, std::move(b));
  return Subspace(s, std::move(funcs), tol);
}

Subspace orthocomplement(const Subspace& v, const Tolerances& tol) {
  const MeasureSpace& s = v.space();
  const auto& mu = s.weights();
  std::vector<std::vector<cplx>> basis;
  for (const auto& b : v.basis()) basis.push_back(b.values());
  std::vector<std::vector<cplx>> extra;
  for (std::size_t i = 0; i < s.size() && basis.size() + extra.size() < s.size();
       ++i) {
    std::vector<cplx> e(s.size(), 0.0);
    e[i] = 1.0;
    project_out(mu, e, basis);
    project_out(mu, e, extra);
    project_out(mu, e, basis);
    project_out(mu, e, extra);
    const double ne = wnorm(mu, e);
    if (ne <= 1e-8 / std::sqrt(mu[i])) continue;
    scale_vec(e, 1.0 / ne);
    extra.push_back(std::move(e));
  }
  std::vector<MFunction> funcs;
  funcs.reserve(extra.size());
  for (auto& b : extra) funcs.emplace_back(s, std::move(b));
  return Subspace(s, std::move(funcs), tol);
}

double containment_sine(const Subspace& inner_sub, const Subspace& outer) {
  const std::size_t ka = inner_sub.dim();
  if (ka == 0) return 0.0;
  // residuals (I - P_outer) t_i: their Gram matrix has the squared principal
  // sines as eigenvalues, with no cancellation for nearly contained subspaces
  // (the cross-Gram cosine route cannot resolve angles below ~1e-8)
  const auto& mu = inner_sub.space().weights();
  std::vector<std::vector<cplx>> resid;
  std::vector<std::vector<cplx>> outer_raw;
  for (const auto& b : outer.basis()) outer_raw.push_back(b.values());
  for (const auto& t : inner_sub.basis()) {
    std::vector<cplx> r = t.values();
    project_out(mu, r, outer_raw);
    project_out(mu, r, outer_raw);
    resid.push_back(std::move(r));
  }
  CMatrix m(ka, ka);
  for (std::size_t i = 0; i < ka; ++i)
    for (std::size_t l = 0; l < ka; ++l) m(i, l) = winner(mu, resid[i], resid[l]);
  std::vector<double> vals;
  CMatrix vecs;
  eig_hermitian(m, vals, vecs);
  return std::sqrt(std::clamp(vals.front(), 0.0, 1.0));
}

}  // namespace wce
