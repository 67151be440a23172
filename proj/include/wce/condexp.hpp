#pragma once

#include <vector>

#include "wce/hilbert.hpp"

namespace wce {

/// Sigma-subalgebra of the finite power set, stored as a partition of the
/// atoms into blocks. Blocks are canonicalized on construction (each block
/// sorted, blocks ordered by least element) so equality and refinement checks
/// are deterministic.
class Partition {
 public:
  Partition(MeasureSpace space, std::vector<std::vector<std::size_t>> blocks);

  /// One block containing every atom.
  static Partition trivial(const MeasureSpace& s);
  /// Singleton blocks: the full sigma-algebra.
  static Partition discrete(const MeasureSpace& s);

  const MeasureSpace& space() const { return space_; }
  std::size_t num_blocks() const { return blocks_.size(); }
  const std::vector<std::vector<std::size_t>>& blocks() const { return blocks_; }
  /// Index of the block containing atom i.
  std::size_t block_of(std::size_t i) const { return block_of_[i]; }
  /// mu-measure of block b.
  double block_measure(std::size_t b) const;

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.space_ == b.space_ && a.blocks_ == b.blocks_;
  }

 private:
  MeasureSpace space_;
  std::vector<std::vector<std::size_t>> blocks_;
  std::vector<std::size_t> block_of_;
};

/// Conditional expectation onto the partition's measurable functions,
/// materialized as a matrix: (Ef)|_B = (sum_{i in B} mu_i f_i) / mu(B).
LinOperator cond_expect(const Partition& p);

/// True when f is constant on every block within tol.orth * max|f|.
bool is_measurable(const Partition& p, const MFunction& f,
                   const Tolerances& tol = {});

/// True when every block of q is contained in some block of p
/// (q refines p; as sigma-algebras, p's is contained in q's).
bool refines(const Partition& q, const Partition& p);

/// Verifies the commutation E^A M_u E^B = E^B E^A M_u for nested algebras
/// A within B and A-measurable u, as matrices within 1e-12.
/// Preconditions (B refines A; u A-measurable) violations raise UsageError.
bool tower_check(const Partition& a, const Partition& b, const MFunction& u,
                 const Tolerances& tol = {});

}  // namespace wce
