#pragma once

#include <optional>

#include "wce/sra.hpp"
#include "wce/wceop.hpp"

namespace wce {

/// Outcome of a majorization test ||Sx|| <= M ||Tx||. When it holds, M is the
/// minimal constant (largest generalized Rayleigh quotient of (S*S, T*T) on
/// the orthocomplement of N(T)); when it fails, the witness is a kernel
/// direction of T that S does not annihilate.
struct MajorizationResult {
  bool holds = false;
  std::optional<double> constant;
  std::optional<MFunction> witness;
};

/// At finite dimension every range is closed, so T majorizes S iff
/// N(T) is contained in N(S) (principal-angle containment, tol 1e-8).
/// A seeded Monte-Carlo spot check on 100 directions confirms the bound;
/// a violation raises NumericalFailure.
MajorizationResult majorizes(const LinOperator& t, const LinOperator& s,
                             const Tolerances& tol = {});

/// The closed-range sufficient condition for EM_u: z(E(u)) = z(E(|u|^2)) and
/// E(u) >= delta on z(E(|u|^2)). At finite dimension the conclusion is
/// automatic; this evaluates the hypothesis clauses faithfully.
bool closed_range_hypothesis(const WCEOp& t, double delta,
                             const Tolerances& tol = {});

/// If u >= 0, E(u) >= delta on its support and S in Q_T, then EM_u majorizes S.
struct QtMajorization {
  bool qt_member = false;
  bool majorizes_holds = false;  ///< meaningful only when qt_member
  bool implication = true;       ///< qt_member => majorizes_holds
};
QtMajorization qt_majorization_suite(const WCEOp& t, const LinOperator& s,
                                     const Tolerances& tol = {});

/// If S in Q_{x(x)y}, then x(x)y majorizes S.
struct RankOneMajorization {
  bool qt_member = false;
  bool majorizes_holds = false;
  bool implication = true;
};
RankOneMajorization rank_one_majorization(const MFunction& x,
                                          const MFunction& y,
                                          const LinOperator& s,
                                          const Tolerances& tol = {});

}  // namespace wce
