#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace wce {

using cplx = std::complex<double>;

/// Dense row-major complex matrix. Dimensions here are the number of atoms of
/// a finite measure space, so direct O(n^3) methods are used throughout.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols) {}

  static CMatrix identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const {
    return a_[i * cols_ + j];
  }

  CMatrix& operator+=(const CMatrix& o);
  CMatrix& operator-=(const CMatrix& o);
  CMatrix& operator*=(cplx s);

  std::vector<cplx> apply(const std::vector<cplx>& x) const;
  CMatrix conj_transpose() const;
  double max_abs() const;

  friend CMatrix operator+(CMatrix a, const CMatrix& b) {
    a += b;
    return a;
  }
  friend CMatrix operator-(CMatrix a, const CMatrix& b) {
    a -= b;
    return a;
  }
  friend CMatrix operator*(cplx s, CMatrix a) {
    a *= s;
    return a;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<cplx> a_;
};

CMatrix operator*(const CMatrix& a, const CMatrix& b);

/// Largest entrywise difference |a - b|.
double max_abs_diff(const CMatrix& a, const CMatrix& b);

/// Gauss-Jordan inverse with partial pivoting. Throws NumericalFailure on a
/// numerically singular input.
CMatrix gauss_inverse(const CMatrix& a);

/// Raw null-space vectors of `a` by Gauss-Jordan elimination with partial
/// pivoting. A column is declared free when its best remaining pivot is at
/// most `rank_tol` times the largest pivot accepted so far (the largest entry
/// of `a` before any pivot exists). Vectors are exact solutions of the
/// eliminated system; they are not orthonormalized.
std::vector<std::vector<cplx>> null_space_raw(CMatrix a, double rank_tol);

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix in the standard
/// inner product. Eigenvalues come back descending; eigenvectors are the
/// columns of `vecs`. Only ever used on small projected systems (Ritz blocks,
/// cross-Gram matrices).
void eig_hermitian(const CMatrix& h, std::vector<double>& vals, CMatrix& vecs);

}  // namespace wce
