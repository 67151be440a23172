#pragma once

#include <vector>

#include "wce/condexp.hpp"
#include "wce/hilbert.hpp"

namespace wce {

/// Weighted conditional expectation operator T = M_w E M_u (f -> w E(uf)),
/// with the coordinate matrix and the derived A-measurable functions
/// E(|u|^2), E(|w|^2), E(uw) cached at construction.
class WCEOp {
 public:
  WCEOp(Partition p, MFunction u, MFunction w);

  const MeasureSpace& space() const { return partition_.space(); }
  const Partition& partition() const { return partition_; }
  const MFunction& u() const { return u_; }
  const MFunction& w() const { return w_; }
  const LinOperator& matrix() const { return matrix_; }

  /// Atomwise E(|u|^2), E(|w|^2), E(uw) (constant on each block).
  const std::vector<double>& e_u2() const { return e_u2_; }
  const std::vector<double>& e_w2() const { return e_w2_; }
  const std::vector<cplx>& e_uw() const { return e_uw_; }

  /// Per-block values (indexed like partition().blocks()).
  const std::vector<double>& block_e_u2() const { return blk_u2_; }
  const std::vector<double>& block_e_w2() const { return blk_w2_; }
  const std::vector<cplx>& block_e_uw() const { return blk_uw_; }

 private:
  Partition partition_;
  MFunction u_, w_;
  LinOperator matrix_;
  std::vector<double> e_u2_, e_w2_;
  std::vector<cplx> e_uw_;
  std::vector<double> blk_u2_, blk_w2_;
  std::vector<cplx> blk_uw_;
};

WCEOp wce_build(const Partition& p, const MFunction& u, const MFunction& w);

/// Matrix of M_w E M_u built directly from the blockwise formula
/// T_ij = w_i mu_j u_j / mu(B) for j in B(i).
LinOperator wce_matrix(const Partition& p, const MFunction& u,
                       const MFunction& w);

/// Closed-form operator norm ||(E|w|^2)^{1/2} (E|u|^2)^{1/2}||_inf.
double wce_norm(const WCEOp& t);

/// T^n via the closed form T^n f = (E(uw))^{n-1} w E(uf); n = 0 returns the
/// identity.
LinOperator wce_power(const WCEOp& t, int n);

/// (T*)^n via the closed form T*^n f = conj(E(uw))^{n-1} ubar E(wbar f).
LinOperator wce_adjoint_power(const WCEOp& t, int n);

/// Spectral radius r(T) = ||E(uw)||_inf.
double spectral_radius(const WCEOp& t);

/// ||T^k||^{1/k} from the closed-form norm of the WCE operator with weight
/// (E(uw))^{k-1} w, evaluated in log space.
double gelfand_estimate(const WCEOp& t, int k);

/// Polar decomposition T = U |T|: |T| is the positive square root of T*T by
/// deflated power iteration; U = T pinv(|T|) on the range, zero on the kernel.
struct PolarParts {
  LinOperator partial_isometry;
  LinOperator abs;
};
PolarParts polar(const LinOperator& t, const Tolerances& tol = {});

/// Aluthge weight w~ = chi_{z1} E(uw) ubar / E(|u|^2) with z1 the support of
/// E(|u|^2); quotients off the support are zero.
MFunction aluthge_weight(const WCEOp& t, const Tolerances& tol = {});

/// Closed-form Aluthge transform: the matrix of M_{w~} E M_u.
LinOperator aluthge(const WCEOp& t, const Tolerances& tol = {});

/// Aluthge transform as a WCE operator (u unchanged, weight w~), so its own
/// derived functions and spectral radius are available.
WCEOp aluthge_wce(const WCEOp& t, const Tolerances& tol = {});

/// Oracle route: |T|^{1/2} U |T|^{1/2} from the polar decomposition.
LinOperator aluthge_from_polar(const LinOperator& t, const Tolerances& tol = {});

}  // namespace wce
