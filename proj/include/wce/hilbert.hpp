#pragma once

#include <cstdint>
#include <vector>

#include "wce/errors.hpp"
#include "wce/linalg.hpp"

namespace wce {

/// Numerical knobs shared across the library. All of them are overridable
/// from the CLI (and through WCE_* environment variables).
struct Tolerances {
  double orth = 1e-10;  ///< orthonormality slack for subspace bases
  double rank = 1e-10;  ///< relative pivot / kernel threshold
  double iter = 1e-12;  ///< relative-change stop for power iteration
  double supp = 1e-12;  ///< relative support threshold for measurable quotients
  double inv = 1e-8;    ///< invariance slack in membership criteria
  int max_iter = 10000;            ///< power-iteration budget per restart
  std::uint64_t seed = 20240901;   ///< base seed; restarts use seed, seed+1, ...
};

/// Finite atomic measure space: atoms 0..n-1 with strictly positive weights.
class MeasureSpace {
 public:
  explicit MeasureSpace(std::vector<double> weights);

  std::size_t size() const { return w_.size(); }
  double weight(std::size_t i) const { return w_[i]; }
  const std::vector<double>& weights() const { return w_; }
  double total() const;

  friend bool operator==(const MeasureSpace& a, const MeasureSpace& b) {
    return a.w_ == b.w_;
  }

 private:
  std::vector<double> w_;
};

/// Complex measurable function: one value per atom. Immutable after
/// construction; all arithmetic returns new values.
class MFunction {
 public:
  MFunction(MeasureSpace space, std::vector<cplx> values);

  static MFunction zero(const MeasureSpace& s);
  static MFunction one(const MeasureSpace& s);
  /// Coordinate indicator of a single atom.
  static MFunction coordinate(const MeasureSpace& s, std::size_t i);

  const MeasureSpace& space() const { return space_; }
  std::size_t size() const { return v_.size(); }
  const cplx& operator[](std::size_t i) const { return v_[i]; }
  const std::vector<cplx>& values() const { return v_; }

 private:
  MeasureSpace space_;
  std::vector<cplx> v_;
};

/// Operator on the weighted L2 space, stored as the matrix acting on
/// coordinate vectors. Adjoints, norms and orthogonality are always taken in
/// the mu-weighted inner product; the matrix is representation only.
class LinOperator {
 public:
  LinOperator(MeasureSpace space, CMatrix m);

  static LinOperator identity(const MeasureSpace& s);
  static LinOperator zero(const MeasureSpace& s);

  const MeasureSpace& space() const { return space_; }
  std::size_t dim() const { return space_.size(); }
  const CMatrix& matrix() const { return m_; }

  MFunction apply(const MFunction& f) const;

 private:
  MeasureSpace space_;
  CMatrix m_;
};

LinOperator operator*(const LinOperator& a, const LinOperator& b);
LinOperator operator+(const LinOperator& a, const LinOperator& b);
LinOperator operator-(const LinOperator& a, const LinOperator& b);
LinOperator operator*(cplx s, const LinOperator& a);

/// Subspace described by a weighted-orthonormal basis (possibly empty).
/// The constructor enforces orthonormality within tol.orth.
class Subspace {
 public:
  Subspace(MeasureSpace space, std::vector<MFunction> basis,
           const Tolerances& tol = {});

  const MeasureSpace& space() const { return space_; }
  std::size_t dim() const { return basis_.size(); }
  const std::vector<MFunction>& basis() const { return basis_; }

 private:
  MeasureSpace space_;
  std::vector<MFunction> basis_;
};

// -- inner product layer ----------------------------------------------------

cplx inner(const MFunction& f, const MFunction& g);
double norm(const MFunction& f);

MFunction operator+(const MFunction& f, const MFunction& g);
MFunction operator-(const MFunction& f, const MFunction& g);
MFunction operator*(cplx s, const MFunction& f);
/// Pointwise product f*g.
MFunction pointwise(const MFunction& f, const MFunction& g);
MFunction conjugate(const MFunction& f);
double max_abs(const MFunction& f);

// -- operator layer ----------------------------------------------------------

/// Adjoint with respect to the weighted inner product:
/// in coordinates D^{-1} A^H D with D = diag(mu).
LinOperator adjoint(const LinOperator& a);

/// Multiplication operator M_a (diagonal in coordinates).
LinOperator multiplication(const MFunction& a);

/// Rank-one operator f (x) g: h -> <h,g> f.
LinOperator rank_one(const MFunction& f, const MFunction& g);

/// Orthogonal projection onto span(V) (weighted-self-adjoint, idempotent).
LinOperator project(const Subspace& v);

/// Largest singular value w.r.t. the weighted inner product, by power
/// iteration on A*A with deterministic seeded restarts (seed, seed+1, ...),
/// aggregated through a small Rayleigh-Ritz step over the restart iterates.
/// Throws NumericalFailure (carrying the best bound) on non-convergence.
double op_norm(const LinOperator& a, const Tolerances& tol = {});

/// Orthonormal basis of the numerical kernel, via Gauss-Jordan elimination
/// with pivot threshold tol.rank relative to the largest pivot, followed by
/// weighted orthonormalization. dim(kernel) + rank = n holds exactly.
Subspace kernel(const LinOperator& a, const Tolerances& tol = {});

/// Weighted Frobenius norm sqrt(sum (mu_i/mu_j)|A_ij|^2); dominates op_norm.
double wfrobenius(const LinOperator& a);

// -- spectral machinery (weighted-self-adjoint operands) ---------------------

struct EigenSystem {
  std::vector<double> values;     ///< descending
  std::vector<MFunction> vectors; ///< weighted-orthonormal
};

/// Top eigenvalue/vector of a weighted-self-adjoint positive semidefinite
/// operator (power iteration + seeded restarts + Ritz aggregation).
struct TopEigen {
  double value = 0.0;
  MFunction vector;
  double residual = 0.0;
};
TopEigen top_eigen(const LinOperator& a, const Tolerances& tol = {});

/// Full spectral decomposition by iterated deflated power iteration.
EigenSystem eig_selfadjoint(const LinOperator& a, const Tolerances& tol = {});

/// Positive square root of a positive semidefinite operator (eigenvalues are
/// clamped at zero before the root).
LinOperator sqrt_positive(const LinOperator& a, const Tolerances& tol = {});

// -- subspace utilities -------------------------------------------------------

/// Weighted modified Gram-Schmidt; vectors whose residual drops below
/// drop_tol * (original norm) are discarded.
Subspace orthonormalize(const MeasureSpace& s,
                        const std::vector<std::vector<cplx>>& raw,
                        double drop_tol, const Tolerances& tol = {});

/// Orthocomplement of V inside the full space.
Subspace orthocomplement(const Subspace& v, const Tolerances& tol = {});

/// Largest sine of the principal angles of `inner_sub` against `outer`
/// (0 when inner_sub is contained in outer, 1 when some direction is
/// orthogonal to all of outer). Computed from cross-Gram singular values.
double containment_sine(const Subspace& inner_sub, const Subspace& outer);

void require_same_space(const MeasureSpace& a, const MeasureSpace& b,
                        const char* who);

}  // namespace wce
