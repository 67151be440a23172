#include "wce/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "wce/errors.hpp"

namespace wce {

CMatrix& CMatrix::operator+=(const CMatrix& o) {
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
  return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& o) {
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
  return *this;
}

CMatrix& CMatrix::operator*=(cplx s) {
  for (auto& v : a_) v *= s;
  return *this;
}

std::vector<cplx> CMatrix::apply(const std::vector<cplx>& x) const {
  std::vector<cplx> y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    cplx acc = 0.0;
    const cplx* row = &a_[i * cols_];
    for (std::size_t j = 0; j < cols_; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

CMatrix CMatrix::conj_transpose() const {
  CMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = std::conj((*this)(i, j));
  return t;
}

double CMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& v : a_) m = std::max(m, std::abs(v));
  return m;
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
  CMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

CMatrix gauss_inverse(const CMatrix& a) {
  const std::size_t n = a.rows();
  CMatrix w = a;
  CMatrix inv = CMatrix::identity(n);
  const double ref = a.max_abs();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t best = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::abs(w(i, col)) > std::abs(w(best, col))) best = i;
    const double p = std::abs(w(best, col));
    if (ref == 0.0 || p <= 1e-14 * ref)
      throw NumericalFailure("gauss_inverse: singular matrix", p);
    if (best != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(w(col, j), w(best, j));
        std::swap(inv(col, j), inv(best, j));
      }
    }
    const cplx s = 1.0 / w(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      w(col, j) *= s;
      inv(col, j) *= s;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col) continue;
      const cplx f = w(i, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        w(i, j) -= f * w(col, j);
        inv(i, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

std::vector<std::vector<cplx>> null_space_raw(CMatrix a, double rank_tol) {
  const std::size_t m = a.rows(), n = a.cols();
  const double ref = a.max_abs();
  double max_piv = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> pivots;  // (col, row)
  std::vector<char> pivot_col(n, 0);
  std::size_t r = 0;
  for (std::size_t col = 0; col < n; ++col) {
    if (r == m) continue;
    std::size_t best = r;
    for (std::size_t i = r; i < m; ++i)
      if (std::abs(a(i, col)) > std::abs(a(best, col))) best = i;
    const double p = std::abs(a(best, col));
    const double scale = max_piv > 0.0 ? max_piv : ref;
    if (scale == 0.0 || p <= rank_tol * scale) continue;  // free column
    if (best != r)
      for (std::size_t j = 0; j < n; ++j) std::swap(a(r, j), a(best, j));
    max_piv = std::max(max_piv, p);
    const cplx s = 1.0 / a(r, col);
    for (std::size_t j = 0; j < n; ++j) a(r, j) *= s;
    a(r, col) = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r) continue;
      const cplx f = a(i, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) a(i, j) -= f * a(r, j);
      a(i, col) = 0.0;
    }
    pivot_col[col] = 1;
    pivots.emplace_back(col, r);
    ++r;
  }
  std::vector<std::vector<cplx>> out;
  for (std::size_t col = 0; col < n; ++col) {
    if (pivot_col[col]) continue;
    std::vector<cplx> x(n, 0.0);
    x[col] = 1.0;
    for (const auto& [pc, pr] : pivots) x[pc] = -a(pr, col);
    out.push_back(std::move(x));
  }
  return out;
}

void eig_hermitian(const CMatrix& h, std::vector<double>& vals, CMatrix& vecs) {
  const std::size_t n = h.rows();
  CMatrix a = h;
  CMatrix v = CMatrix::identity(n);
  const double scale = a.max_abs();
  const double stop = 1e-15 * (scale > 0.0 ? scale : 1.0);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off <= stop) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx z = a(p, q);
        const double az = std::abs(z);
        if (az <= stop) continue;
        const cplx phase = z / az;
        const double alpha = a(p, p).real();
        const double beta = a(q, q).real();
        const double tau = (alpha - beta) / (2.0 * az);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // unitary U = [[c, -s*phase], [s*conj(phase), c]] zeroes a(p,q)
        const cplx upq = -s * phase;
        const cplx uqp = s * std::conj(phase);
        for (std::size_t k = 0; k < n; ++k) {  // A <- A U (columns p,q)
          const cplx kp = a(k, p), kq = a(k, q);
          a(k, p) = kp * c + kq * uqp;
          a(k, q) = kp * upq + kq * c;
        }
        for (std::size_t k = 0; k < n; ++k) {  // A <- U^H A (rows p,q)
          const cplx pk = a(p, k), qk = a(q, k);
          a(p, k) = c * pk + std::conj(uqp) * qk;
          a(q, k) = std::conj(upq) * pk + c * qk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {  // V <- V U
          const cplx kp = v(k, p), kq = v(k, q);
          v(k, p) = kp * c + kq * uqp;
          v(k, q) = kp * upq + kq * c;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a(i, i).real() > a(j, j).real();
  });
  vals.resize(n);
  vecs = CMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    vals[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) vecs(i, k) = v(i, order[k]);
  }
}

}  // namespace wce
