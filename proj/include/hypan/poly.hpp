#pragma once

// Dense univariate polynomials with real or complex coefficients, plus small
// matrices of real polynomials.  Coefficient vectors are ascending (index k
// holds the t^k coefficient); the zero polynomial is the empty vector.
//
// These carry the exact time dependence of analytic symbol data, so that
// discriminants, their derivatives and minors can be formed without grid
// differentiation.  Matrix determinants use cofactor expansion, which is the
// right tool at the m <= 6 orders this library targets.

#include <complex>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

#include "hypan/util.hpp"

namespace hypan {

template <typename T>
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(const T& constant) : c_{constant} { trim(); }
  Polynomial(std::initializer_list<T> coeffs) : c_(coeffs) { trim(); }
  explicit Polynomial(std::vector<T> coeffs) : c_(std::move(coeffs)) { trim(); }

  static Polynomial monomial(int k, T coeff) {
    std::vector<T> c(static_cast<std::size_t>(k) + 1, T(0));
    c.back() = coeff;
    return Polynomial(std::move(c));
  }

  int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for zero
  bool is_zero() const { return c_.empty(); }
  const std::vector<T>& coeffs() const { return c_; }

  T coeff(int k) const {
    if (k < 0 || k >= static_cast<int>(c_.size())) return T(0);
    return c_[static_cast<std::size_t>(k)];
  }

  T operator()(double t) const {
    T acc(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + *it;
    return acc;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<T> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
    return Polynomial(std::move(d));
  }

  Polynomial operator-() const {
    std::vector<T> d(c_);
    for (auto& v : d) v = -v;
    return Polynomial(std::move(d));
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<T> d(std::max(a.c_.size(), b.c_.size()), T(0));
    for (std::size_t k = 0; k < a.c_.size(); ++k) d[k] += a.c_[k];
    for (std::size_t k = 0; k < b.c_.size(); ++k) d[k] += b.c_[k];
    return Polynomial(std::move(d));
  }

  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<T> d(a.c_.size() + b.c_.size() - 1, T(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      for (std::size_t j = 0; j < b.c_.size(); ++j) d[i + j] += a.c_[i] * b.c_[j];
    }
    return Polynomial(std::move(d));
  }

  friend Polynomial operator*(const Polynomial& a, T s) {
    std::vector<T> d(a.c_);
    for (auto& v : d) v = v * s;
    return Polynomial(std::move(d));
  }

  friend Polynomial operator*(T s, const Polynomial& a) { return a * s; }

  Polynomial& operator+=(const Polynomial& o) { return *this = *this + o; }
  Polynomial& operator-=(const Polynomial& o) { return *this = *this - o; }
  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == T(0)) c_.pop_back();
  }

  std::vector<T> c_;
};

using Poly = Polynomial<double>;
using CPoly = Polynomial<std::complex<double>>;

// Monic polynomial with the given roots, ascending coefficients.
template <typename T>
Polynomial<T> poly_from_roots(const std::vector<T>& roots) {
  Polynomial<T> p{T(1)};
  for (const T& r : roots) p *= Polynomial<T>{-r, T(1)};
  return p;
}

// Bezout matrix of a monic polynomial and its derivative over a commutative
// ring R (double, or Poly for symbols with polynomial time dependence).
//
// Input: ascending coefficients f[0..m] of a monic degree-m polynomial in
// the spectral variable (f[m] must be the ring unit).  Output: the m x m
// matrix B with sum_{i,j} B[i][j] x^i y^j = (f(x)f'(y) - f(y)f'(x))/(x - y),
// stored row-major.  Built by synthetic division: with
// n_k(y) = f_k f'(y) - f'_k f(y), the rows satisfy c_{m-1} = n_m and
// c_{k-1} = n_k + y c_k; the y^m terms cancel identically and are dropped.
template <typename R>
std::vector<R> bezout_from_monic(const std::vector<R>& f) {
  const int m = static_cast<int>(f.size()) - 1;
  if (m < 1) throw ValidationError("bezout_from_monic: need degree >= 1");
  std::vector<R> g(static_cast<std::size_t>(m) + 1, R{});  // f', padded with 0 at index m
  for (int k = 1; k <= m; ++k) g[k - 1] = static_cast<double>(k) * f[k];

  std::vector<R> B(static_cast<std::size_t>(m) * m, R{});
  auto row = [&](int i) { return B.begin() + static_cast<std::ptrdiff_t>(i) * m; };

  // c_{m-1} = n_m = f_m g(y) - g_m f(y) = g(y).
  for (int j = 0; j < m; ++j) row(m - 1)[j] = g[j];
  for (int k = m - 1; k >= 1; --k) {
    // c_{k-1}[j] = n_k[j] + c_k[j-1] on the retained range j = 0..m-1.
    row(k - 1)[0] = f[k] * g[0] - g[k] * f[0];
    for (int j = 1; j < m; ++j) row(k - 1)[j] = f[k] * g[j] - g[k] * f[j] + row(k)[j - 1];
  }
  return B;
}

// Small dense matrix of real polynomials in t.
struct PolyMat {
  int rows = 0, cols = 0;
  std::vector<Poly> e;

  PolyMat() = default;
  PolyMat(int r, int c) : rows(r), cols(c), e(static_cast<std::size_t>(r) * c) {}

  Poly& at(int i, int j) { return e[static_cast<std::size_t>(i) * cols + j]; }
  const Poly& at(int i, int j) const { return e[static_cast<std::size_t>(i) * cols + j]; }

  PolyMat derivative() const {
    PolyMat d(rows, cols);
    for (std::size_t k = 0; k < e.size(); ++k) d.e[k] = e[k].derivative();
    return d;
  }

  Eigen::MatrixXd eval(double t) const {
    Eigen::MatrixXd M(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) M(i, j) = at(i, j)(t);
    return M;
  }

  PolyMat block(int i0, int j0, int r, int c) const {
    PolyMat b(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) b.at(i, j) = at(i0 + i, j0 + j);
    return b;
  }
};

// Determinant by cofactor expansion along the first row.
inline Poly poly_det(const PolyMat& M) {
  if (M.rows != M.cols) throw ValidationError("poly_det: matrix must be square");
  const int n = M.rows;
  if (n == 0) return Poly{1.0};
  if (n == 1) return M.at(0, 0);
  if (n == 2) return M.at(0, 0) * M.at(1, 1) - M.at(0, 1) * M.at(1, 0);
  Poly acc;
  for (int j = 0; j < n; ++j) {
    if (M.at(0, j).is_zero()) continue;
    PolyMat sub(n - 1, n - 1);
    for (int i = 1; i < n; ++i) {
      int cc = 0;
      for (int c = 0; c < n; ++c) {
        if (c == j) continue;
        sub.at(i - 1, cc++) = M.at(i, c);
      }
    }
    Poly term = M.at(0, j) * poly_det(sub);
    acc = (j % 2 == 0) ? acc + term : acc - term;
  }
  return acc;
}

// Cofactor matrix: co(i,j) = (-1)^{i+j} det(M with row i and column j removed).
inline PolyMat poly_cofactor(const PolyMat& M) {
  if (M.rows != M.cols) throw ValidationError("poly_cofactor: matrix must be square");
  const int n = M.rows;
  PolyMat co(n, n);
  if (n == 1) {
    co.at(0, 0) = Poly{1.0};
    return co;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      PolyMat sub(n - 1, n - 1);
      int rr = 0;
      for (int r = 0; r < n; ++r) {
        if (r == i) continue;
        int cc = 0;
        for (int c = 0; c < n; ++c) {
          if (c == j) continue;
          sub.at(rr, cc++) = M.at(r, c);
        }
        ++rr;
      }
      Poly d = poly_det(sub);
      co.at(i, j) = ((i + j) % 2 == 0) ? d : -d;
    }
  }
  return co;
}

// Determinant of the trailing (bottom-right) j x j block.
inline Poly poly_trailing_minor(const PolyMat& M, int j) {
  if (j < 1 || j > M.rows) throw ValidationError("poly_trailing_minor: bad order");
  return poly_det(M.block(M.rows - j, M.cols - j, j, j));
}

// tr(A * B) without forming the product matrix.
inline Poly poly_trace_product(const PolyMat& A, const PolyMat& B) {
  if (A.cols != B.rows || A.rows != B.cols)
    throw ValidationError("poly_trace_product: shape mismatch");
  Poly acc;
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) acc += A.at(i, k) * B.at(k, i);
  return acc;
}

}  // namespace hypan
