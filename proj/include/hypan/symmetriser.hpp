#pragma once

// The standard symmetriser of a companion symbol and its derived quantities.
//
// For the monic characteristic polynomial p(lambda) of the companion matrix
// A(t, xi), the symmetriser Q is the Bezout matrix of (p, p').  It is real
// symmetric, positive semi-definite exactly where the roots are real, and
// satisfies Q A = A^T Q.  Its determinant Delta equals the product of squared
// root differences (the discriminant), so Delta degenerates exactly at
// multiple characteristic roots.
//
// Derived objects:
//   - trailing minors Delta_1..Delta_m (Delta_j = det of the bottom-right
//     j x j block); their sign/vanishing pattern classifies hyperbolicity.
//   - Hamilton-Cayley coefficients d_0..d_m of det(lambda Q - dQ/dt)
//     = sum_j d_j lambda^{m-j}; d_0 = Delta, d_1 = -Delta', and the check
//     function psi = d_2 controls the spectrum of the pencil (dQ, Q).
//   - Delta~ = Delta + (Delta')^2 / Delta, defined away from zeros of Delta.
//
// SymmetriserPolys carries all of this exactly in t (polynomial coefficients)
// at a fixed frequency, so no grid differentiation is ever needed.

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hypan/operator_spec.hpp"
#include "hypan/poly.hpp"

namespace hypan {

struct Symmetriser {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd dQ;
  Eigen::VectorXd minors;  // Delta_1 .. Delta_m
  double delta = 0.0;      // Delta_m = det Q
  std::optional<double> delta_tilde;  // empty within the zero tolerance of Delta
  double psi = 0.0;
  Eigen::VectorXd hc;  // d_0 .. d_m, independent numeric evaluation
};

// Monic characteristic coefficients (ascending) of the companion matrix with
// last row `a`: det(lambda I - A) = lambda^m - a_m lambda^{m-1} - ... - a_1.
template <typename R>
std::vector<R> monic_from_row(const std::vector<R>& a) {
  std::vector<R> f(a.size() + 1);
  for (std::size_t k = 0; k < a.size(); ++k) f[k] = -a[k];
  f[a.size()] = R(1);
  return f;
}

// Numeric Bezout matrix of (p, p') for monic ascending coefficients.
Eigen::MatrixXd bezout_matrix(const Eigen::VectorXd& monic);

// Symmetriser of the frame's companion matrix.
Eigen::MatrixXd build_symmetriser(const SymbolFrame& frame);

// Exact time derivative of the symmetriser at (t, xi).
Eigen::MatrixXd differentiate_symmetriser(const OperatorSpec& spec, double t,
                                          const Eigen::VectorXd& xi);

// Trailing minors Delta_1..Delta_m of a symmetric matrix.
Eigen::VectorXd trailing_minors(const Eigen::MatrixXd& Q);

// Coefficients d_0..d_m of det(lambda Q - dQ) = sum_j d_j lambda^{m-j},
// recovered from determinant evaluations at m+1 integer nodes.
Eigen::VectorXd hamilton_cayley(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& dQ);

// Delta + (dDelta)^2 / Delta, or empty when |Delta| <= floor.
std::optional<double> delta_tilde_value(double delta, double ddelta, double floor);

// Exact-in-t symmetriser pipeline at a fixed nonzero frequency.
class SymmetriserPolys {
 public:
  SymmetriserPolys(const OperatorSpec& spec, const Eigen::VectorXd& xi);

  int order() const { return m_; }
  const Eigen::VectorXd& xi() const { return xi_; }
  const PolyMat& q() const { return q_; }
  const PolyMat& dq() const { return dq_; }
  const Poly& delta() const { return delta_; }
  const Poly& ddelta() const { return ddelta_; }
  const Poly& psi() const { return psi_; }
  const std::vector<Poly>& minors() const { return minors_; }

  // Sup of |Delta| over the operator's working window (dense grid sample).
  double delta_sup() const { return delta_sup_; }
  // Sup of the max-abs entry of Q over the working window.
  double q_sup() const { return q_sup_; }

  // Delta vanishes identically relative to the natural scale of Q (its
  // coefficients cancel to roundoff along this direction).
  bool degenerate(double zero_rel_tol = 1e-12) const {
    return delta_.is_zero() ||
           delta_sup_ <= zero_rel_tol * std::pow(std::max(1.0, q_sup_), m_);
  }

  Eigen::MatrixXd q_at(double t) const { return q_.eval(t); }
  Eigen::MatrixXd dq_at(double t) const { return dq_.eval(t); }
  double delta_at(double t) const { return delta_(t); }
  double ddelta_at(double t) const { return ddelta_(t); }
  double psi_at(double t) const { return psi_(t); }
  Eigen::VectorXd minors_at(double t) const;

  std::optional<double> delta_tilde_at(double t, double zero_rel_tol = 1e-12) const;

  // Full snapshot; hc comes from the independent numeric evaluation while
  // delta, minors and psi come from the exact polynomials.
  Symmetriser eval(double t, double zero_rel_tol = 1e-12) const;

 private:
  int m_ = 0;
  Eigen::VectorXd xi_;
  double work_lo_ = 0.0, work_hi_ = 0.0;
  PolyMat q_, dq_;
  Poly delta_, ddelta_, psi_;
  std::vector<Poly> minors_;
  double delta_sup_ = 0.0;
  double q_sup_ = 0.0;
};

}  // namespace hypan
