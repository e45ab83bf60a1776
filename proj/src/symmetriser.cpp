#include "hypan/symmetriser.hpp"

#include <cmath>

namespace hypan {

Eigen::MatrixXd bezout_matrix(const Eigen::VectorXd& monic) {
  std::vector<double> f(monic.data(), monic.data() + monic.size());
  const int m = static_cast<int>(f.size()) - 1;
  if (m < 1 || f.back() != 1.0) throw ValidationError("bezout_matrix: need monic coefficients");
  std::vector<double> B = bezout_from_monic(f);
  Eigen::MatrixXd Q(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) Q(i, j) = B[static_cast<std::size_t>(i) * m + j];
  return Q;
}

Eigen::MatrixXd build_symmetriser(const SymbolFrame& frame) {
  const Eigen::Index m = frame.A.rows();
  Eigen::VectorXd monic(m + 1);
  monic.head(m) = -frame.A.row(m - 1).transpose();
  monic[m] = 1.0;
  return bezout_matrix(monic);
}

Eigen::MatrixXd differentiate_symmetriser(const OperatorSpec& spec, double t,
                                          const Eigen::VectorXd& xi) {
  return SymmetriserPolys(spec, xi).dq_at(t);
}

Eigen::VectorXd trailing_minors(const Eigen::MatrixXd& Q) {
  const Eigen::Index m = Q.rows();
  Eigen::VectorXd minors(m);
  for (Eigen::Index j = 1; j <= m; ++j) {
    minors[j - 1] = Q.bottomRightCorner(j, j).determinant();
  }
  return minors;
}

Eigen::VectorXd hamilton_cayley(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& dQ) {
  const int m = static_cast<int>(Q.rows());
  // det(lambda Q - dQ) is a polynomial of degree <= m in lambda; sample it at
  // m+1 integer nodes centred at zero and solve the Vandermonde system for
  // the coefficients d_j of lambda^{m-j}.
  Eigen::MatrixXd V(m + 1, m + 1);
  Eigen::VectorXd y(m + 1);
  for (int k = 0; k <= m; ++k) {
    const double lam = k - m / 2;
    y[k] = (lam * Q - dQ).determinant();
    for (int j = 0; j <= m; ++j) V(k, j) = std::pow(lam, m - j);
  }
  return V.colPivHouseholderQr().solve(y);
}

std::optional<double> delta_tilde_value(double delta, double ddelta, double floor) {
  if (std::abs(delta) <= floor) return std::nullopt;
  return delta + ddelta * ddelta / delta;
}

SymmetriserPolys::SymmetriserPolys(const OperatorSpec& spec, const Eigen::VectorXd& xi)
    : m_(spec.m), xi_(xi), work_lo_(spec.work_lo), work_hi_(spec.work_hi) {
  std::vector<Poly> a = principal_row_polys(spec, xi);
  std::vector<Poly> monic = monic_from_row(a);
  std::vector<Poly> B = bezout_from_monic(monic);

  q_ = PolyMat(m_, m_);
  q_.e = std::move(B);
  dq_ = q_.derivative();
  delta_ = poly_det(q_);
  ddelta_ = delta_.derivative();

  // psi = d_2 = (1/2) tr(dQ/dt * d(cof Q)/dt); identically zero for m = 1
  // and for time-independent symbols.
  if (m_ >= 2) {
    PolyMat dcof = poly_cofactor(q_).derivative();
    psi_ = 0.5 * poly_trace_product(dq_, dcof);
  }

  minors_.resize(static_cast<std::size_t>(m_));
  for (int j = 1; j <= m_; ++j) {
    minors_[static_cast<std::size_t>(j - 1)] = poly_trailing_minor(q_, j);
  }

  constexpr int kSupNodes = 2048;
  for (int k = 0; k <= kSupNodes; ++k) {
    const double t = work_lo_ + (work_hi_ - work_lo_) * k / kSupNodes;
    delta_sup_ = std::max(delta_sup_, std::abs(delta_(t)));
    for (const Poly& entry : q_.e) q_sup_ = std::max(q_sup_, std::abs(entry(t)));
  }
}

Eigen::VectorXd SymmetriserPolys::minors_at(double t) const {
  Eigen::VectorXd v(m_);
  for (int j = 0; j < m_; ++j) v[j] = minors_[static_cast<std::size_t>(j)](t);
  return v;
}

std::optional<double> SymmetriserPolys::delta_tilde_at(double t, double zero_rel_tol) const {
  return delta_tilde_value(delta_(t), ddelta_(t), zero_rel_tol * delta_sup_);
}

Symmetriser SymmetriserPolys::eval(double t, double zero_rel_tol) const {
  Symmetriser s;
  s.Q = q_at(t);
  s.dQ = dq_at(t);
  s.minors = minors_at(t);
  s.delta = delta_(t);
  s.delta_tilde = delta_tilde_at(t, zero_rel_tol);
  s.psi = psi_(t);
  s.hc = hamilton_cayley(s.Q, s.dQ);
  return s;
}

}  // namespace hypan
