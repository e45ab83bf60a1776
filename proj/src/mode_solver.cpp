#include "hypan/mode_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace hypan {

namespace {

constexpr double kStepUnderflow = 1e-14;
constexpr double kOverflowGuard = 1e280;
constexpr std::complex<double> kI{0.0, 1.0};

// Right-hand side i(<xi> A + B)V exploiting the companion structure: only
// the last row carries coefficient work.
class ModeRhs {
 public:
  ModeRhs(const OperatorSpec& spec, const Eigen::VectorXd& xi)
      : spec_(&spec), xi_(xi), br_(bracket(xi)), m_(spec.m) {
    a_.assign(static_cast<std::size_t>(m_), Poly{});
    for (const auto& e : spec.principal) {
      a_[static_cast<std::size_t>(m_ - e.j)] +=
          e.poly * (xi_power(xi, e.nu) * std::pow(br_, -e.j));
    }
  }

  double xi_bracket() const { return br_; }

  void operator()(double t, double hint, const Eigen::VectorXcd& V, Eigen::VectorXcd& out) const {
    for (int i = 0; i + 1 < m_; ++i) out[i] = kI * (br_ * V[i + 1]);
    std::complex<double> acc{0.0, 0.0};
    for (int j = 0; j < m_; ++j) acc += (br_ * a_[static_cast<std::size_t>(j)](t)) * V[j];
    const Eigen::VectorXcd b = detail::eval_lower_row_any(*spec_, t, xi_, hint);
    for (int j = 0; j < m_; ++j) acc += b[j] * V[j];
    out[m_ - 1] = kI * acc;
  }

 private:
  const OperatorSpec* spec_;
  Eigen::VectorXd xi_;
  double br_;
  int m_;
  std::vector<Poly> a_;
};

struct StepCounters {
  long steps = 0;
  long rhs_evals = 0;
};

Eigen::VectorXcd rk4_step(const ModeRhs& rhs, double t, double hint, double h,
                          const Eigen::VectorXcd& V, StepCounters& ctr) {
  const Eigen::Index m = V.size();
  Eigen::VectorXcd k1(m), k2(m), k3(m), k4(m);
  rhs(t, hint, V, k1);
  rhs(t + 0.5 * h, hint, (V + 0.5 * h * k1).eval(), k2);
  rhs(t + 0.5 * h, hint, (V + 0.5 * h * k2).eval(), k3);
  rhs(t + h, hint, (V + h * k3).eval(), k4);
  ctr.rhs_evals += 4;
  return V + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void guard_state(const Eigen::VectorXcd& V, double t) {
  if (!V.allFinite()) {
    throw NumericalError("mode integration produced a non-finite state at t=" + fmt_g17(t));
  }
  if (V.norm() > kOverflowGuard) {
    throw OverflowAbort("mode amplitude exceeded the overflow guard at t=" + fmt_g17(t));
  }
}

// Advance V across one smooth segment [t0, t1] (no breakpoints inside).
void advance_segment(const ModeRhs& rhs, Eigen::VectorXcd& V, double t0, double t1,
                     const SolveOptions& opts, StepCounters& ctr) {
  if (t1 <= t0) return;
  const double hint = 0.5 * (t0 + t1);
  const double step_law = std::min(opts.h_max, 0.1 / rhs.xi_bracket());

  if (!opts.adaptive) {
    const long n = std::max<long>(1, static_cast<long>(std::ceil((t1 - t0) / step_law)));
    const double h = (t1 - t0) / static_cast<double>(n);
    for (long k = 0; k < n; ++k) {
      V = rk4_step(rhs, t0 + k * h, hint, h, V, ctr);
      ++ctr.steps;
    }
    guard_state(V, t1);
    return;
  }

  double t = t0;
  double h = std::min(step_law, t1 - t0);
  const double t_eps = 1e-14 * std::max(1.0, std::max(std::abs(t0), std::abs(t1)));
  while (t < t1 - t_eps) {
    h = std::min(h, t1 - t);
    if (h < kStepUnderflow) {
      throw NumericalError("step underflow (h < 1e-14) at t=" + fmt_g17(t) +
                           ", <xi>=" + fmt_g17(rhs.xi_bracket()));
    }
    const Eigen::VectorXcd full = rk4_step(rhs, t, hint, h, V, ctr);
    Eigen::VectorXcd half = rk4_step(rhs, t, hint, 0.5 * h, V, ctr);
    half = rk4_step(rhs, t + 0.5 * h, hint, 0.5 * h, half, ctr);
    const double scale = std::max({half.norm(), V.norm(), 1e-300});
    const double est = (half - full).norm() / 15.0;  // Richardson local error of `half`
    if (est <= opts.rel_tol * scale) {
      V = half;  // no extrapolation: keep the plain two-half-step value
      t += h;
      ++ctr.steps;
      guard_state(V, t);
      const double grow = (est > 0.0) ? 0.9 * std::pow(opts.rel_tol * scale / est, 0.2) : 2.0;
      h = std::min(step_law, h * std::clamp(grow, 0.25, 2.0));
    } else {
      h *= std::clamp(0.9 * std::pow(opts.rel_tol * scale / est, 0.2), 0.1, 0.9);
    }
  }
}

std::vector<double> segment_bounds(const OperatorSpec& spec, double lo, double hi) {
  std::vector<double> bounds;
  for (double b : spec.breakpoints()) {
    if (b > lo && b < hi) bounds.push_back(b);
  }
  return bounds;
}

}  // namespace

std::vector<Eigen::VectorXcd> integrate_to(const OperatorSpec& spec, const Eigen::VectorXd& xi,
                                           const Eigen::VectorXcd& V0, double t_from,
                                           const std::vector<double>& t_targets,
                                           const SolveOptions& opts, long* steps,
                                           long* rhs_evals) {
  if (!V0.allFinite()) throw ValidationError("initial mode vector must be finite");
  if (V0.size() != spec.m) throw ValidationError("initial mode vector must have length m");
  for (std::size_t k = 0; k < t_targets.size(); ++k) {
    if (t_targets[k] < t_from - 1e-15) {
      throw ValidationError("mode targets must not precede the start time");
    }
    if (k > 0 && t_targets[k] < t_targets[k - 1]) {
      throw ValidationError("mode targets must be ascending");
    }
  }

  const ModeRhs rhs(spec, xi);
  StepCounters ctr;
  Eigen::VectorXcd V = V0;
  std::vector<Eigen::VectorXcd> out;
  out.reserve(t_targets.size());

  double t = t_from;
  const std::vector<double> breaks =
      t_targets.empty() ? std::vector<double>{}
                        : segment_bounds(spec, t_from, t_targets.back());
  std::size_t next_break = 0;
  for (double target : t_targets) {
    while (next_break < breaks.size() && breaks[next_break] < target) {
      advance_segment(rhs, V, t, breaks[next_break], opts, ctr);
      t = breaks[next_break++];
    }
    advance_segment(rhs, V, t, target, opts, ctr);
    t = std::max(t, target);
    out.push_back(V);
  }
  if (steps) *steps = ctr.steps;
  if (rhs_evals) *rhs_evals = ctr.rhs_evals;
  return out;
}

ModeTrace integrate_mode(const OperatorSpec& spec, const Eigen::VectorXd& xi,
                         const Eigen::VectorXcd& V0, std::pair<double, double> t_span,
                         const SolveOptions& opts) {
  const auto [lo, hi] = t_span;
  if (!(lo >= spec.work_lo - 1e-12 && hi <= spec.work_hi + 1e-12 && lo < hi)) {
    throw ValidationError("mode span must lie inside the working window");
  }
  ModeTrace trace;
  trace.xi = xi;
  trace.t_begin = lo;
  trace.t_end = hi;
  const int n = std::max(512, opts.min_output_nodes);
  trace.t_nodes.resize(n);
  for (int k = 0; k < n; ++k) trace.t_nodes[k] = lo + (hi - lo) * k / (n - 1);

  trace.V = integrate_to(spec, xi, V0, lo, trace.t_nodes, opts, &trace.steps, &trace.rhs_evals);
  trace.E_kov.resize(n);
  for (int k = 0; k < n; ++k) trace.E_kov[k] = trace.V[k].squaredNorm();
  trace.E_hyp.assign(n, std::numeric_limits<double>::quiet_NaN());
  trace.bound_slack.assign(n, std::numeric_limits<double>::quiet_NaN());
  return trace;
}

double qb_commutator_bound(const SymbolFrame& frame, const Eigen::MatrixXd& Q) {
  const int m = static_cast<int>(Q.rows());
  const Eigen::MatrixXcd D1 = Q * frame.B - frame.B.adjoint() * Q;
  Eigen::MatrixXcd D2(m, m);
  const Eigen::VectorXcd b = frame.B.row(m - 1).transpose();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      D2(i, j) = Q(i, m - 1) * b[j] - std::conj(b[i]) * Q(j, m - 1);
    }
  }
  const double norm1 = D1.cwiseAbs().maxCoeff();
  const double mismatch = (D1 - D2).cwiseAbs().maxCoeff();
  if (mismatch > 1e-12 * std::max(1.0, norm1)) {
    throw NumericalError("commutator formula mismatch: " + fmt_g17(mismatch));
  }
  return norm1;
}

namespace {

// Exact integral of |Delta'|/Delta over [u, v] by telescoping log Delta
// between the sign changes of Delta' (cuts).
double log_integral(const Poly& delta, const std::vector<double>& cuts, double u, double v) {
  if (v <= u) return 0.0;
  double total = 0.0;
  double start = u;
  for (double c : cuts) {
    if (c <= u || c >= v) continue;
    total += std::abs(std::log(delta(c)) - std::log(delta(start)));
    start = c;
  }
  total += std::abs(std::log(delta(v)) - std::log(delta(start)));
  return total;
}

}  // namespace

void energy_trace(const OperatorSpec& spec, ModeTrace& trace, const Partition& partition,
                  const std::optional<EnvelopeConstants>& constants) {
  if (trace.xi.norm() == 0.0) {
    throw ValidationError("energy_trace requires a nonzero frequency");
  }
  SymmetriserPolys sym(spec, trace.xi);
  const int n = static_cast<int>(trace.t_nodes.size());

  trace.region.assign(n, -1);
  trace.E_hyp.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (int k = 0; k < n; ++k) {
    const double t = trace.t_nodes[k];
    for (std::size_t r = 0; r < partition.kept.size(); ++r) {
      if (t >= partition.kept[r].first - 1e-15 && t <= partition.kept[r].second + 1e-15) {
        trace.region[k] = static_cast<int>(r);
        break;
      }
    }
    if (trace.region[k] >= 0) {
      const Eigen::MatrixXd Q = sym.q_at(t);
      trace.E_hyp[k] = (trace.V[k].adjoint() * Q * trace.V[k]).real()(0, 0);
    }
  }

  trace.bound_slack.assign(n, std::numeric_limits<double>::quiet_NaN());
  if (!constants) return;

  // Kovalevskian rate constants sampled over the run.
  double cA = 0.0, cB = 0.0;
  for (int k = 0; k < n; ++k) {
    const SymbolFrame f = build_frame(spec, trace.t_nodes[k], trace.xi);
    cA = std::max(cA, f.A.norm());
    cB = std::max(cB, f.B.norm());
  }
  cA *= 1.1;
  cB *= 1.1;
  const double br = bracket(trace.xi);

  std::vector<double> cuts;
  try {
    cuts = find_poly_zeros(sym.ddelta(), trace.t_begin, trace.t_end, nullptr);
  } catch (const DegenerateDirectionError&) {
    cuts.clear();  // Delta' vanishes identically: nothing to telescope
  }

  int anchor = 0;
  double anchor_logE = 0.0;
  bool anchor_zero = false;
  for (int k = 0; k < n; ++k) {
    const bool new_region = (k == 0) || (trace.region[k] != trace.region[k - 1]);
    const double E = trace.region[k] >= 0 ? std::max(trace.E_hyp[k], 0.0) : trace.E_kov[k];
    if (new_region || (anchor_zero && E > 0.0)) {
      // Anchor at the first node of the region with positive energy; earlier
      // zero-energy nodes are trivially inside any envelope.
      anchor = k;
      anchor_zero = !(E > 0.0);
      anchor_logE = anchor_zero ? 0.0 : std::log(E);
    }
    if (anchor_zero) {
      trace.bound_slack[k] = 0.0;
      continue;
    }
    const double dt = trace.t_nodes[k] - trace.t_nodes[anchor];
    double log_env;
    if (trace.region[k] >= 0) {
      log_env = anchor_logE + constants->rate() * dt +
                constants->log_coeff() *
                    log_integral(sym.delta(), cuts, trace.t_nodes[anchor], trace.t_nodes[k]);
    } else {
      log_env = anchor_logE + 2.0 * (cA * br + cB) * dt;
    }
    trace.bound_slack[k] = (E > 0.0) ? std::exp(std::log(E) - log_env) : 0.0;
  }
}

std::string to_string(GrowthVerdict v) {
  switch (v) {
    case GrowthVerdict::Polynomial:
      return "polynomial";
    case GrowthVerdict::Superpolynomial:
      return "superpolynomial";
    default:
      return "inconclusive";
  }
}

GrowthFit growth_scan(const OperatorSpec& spec, const Eigen::VectorXd& xi_dir,
                      const std::vector<double>& magnitudes, const V0Policy& policy,
                      const SolveOptions& opts) {
  if (magnitudes.size() < 6) throw ValidationError("growth scan needs at least 6 magnitudes");
  for (std::size_t k = 0; k < magnitudes.size(); ++k) {
    if (magnitudes[k] < 2.0) throw ValidationError("growth scan magnitudes must be >= 2");
    if (k > 0 && std::abs(magnitudes[k] / magnitudes[k - 1] - 2.0) > 1e-9) {
      throw ValidationError("growth scan magnitudes must be dyadic");
    }
  }
  if (xi_dir.norm() == 0.0) throw ValidationError("growth scan direction must be nonzero");
  const Eigen::VectorXd dir = xi_dir / xi_dir.norm();

  GrowthFit fit;
  fit.xi_mags = magnitudes;
  fit.ratios.assign(magnitudes.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<char> overflowed(magnitudes.size(), 0);

  parallel_for(magnitudes.size(), [&](std::size_t k) {
    const Eigen::VectorXd xi = (magnitudes[k] * dir).eval();
    Eigen::VectorXcd V0;
    if (policy.kind == V0Policy::Ones) {
      V0 = Eigen::VectorXcd::Ones(spec.m);
    } else {
      std::mt19937_64 rng(policy.seed + 0x9e3779b97f4a7c15ULL * (k + 1));
      std::normal_distribution<double> gauss(0.0, 1.0);
      V0.resize(spec.m);
      for (int i = 0; i < spec.m; ++i) V0[i] = std::complex<double>(gauss(rng), gauss(rng));
      V0 /= V0.norm();
    }
    try {
      ModeTrace trace =
          integrate_mode(spec, xi, V0, {spec.work_lo, spec.work_hi}, opts);
      double sup = 0.0;
      for (const auto& v : trace.V) sup = std::max(sup, v.norm());
      const double ratio = sup / trace.V.front().norm();
      fit.ratios[k] = std::max(ratio, 1e-16);
      if (!(ratio < 1e300)) overflowed[k] = 1;
    } catch (const OverflowAbort&) {
      overflowed[k] = 1;
      fit.ratios[k] = std::numeric_limits<double>::infinity();
    }
  });

  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < magnitudes.size(); ++k) {
    if (!overflowed[k] && std::isfinite(fit.ratios[k])) {
      lx.push_back(std::log(bracket1(magnitudes[k])));
      ly.push_back(std::log(fit.ratios[k]));
    }
  }
  auto slope_of = [&](std::size_t lo, std::size_t hi) {
    std::vector<double> x(lx.begin() + lo, lx.begin() + hi);
    std::vector<double> y(ly.begin() + lo, ly.begin() + hi);
    return fit_line(x, y).slope;
  };

  const std::size_t K = lx.size();
  if (K >= 2) fit.slope = slope_of(0, K);
  if (K >= 4) {
    const std::size_t half = K / 2;
    const double lo_slope = slope_of(0, half);
    const double hi_slope = slope_of(K - half, K);
    fit.slope_drift = hi_slope - lo_slope;
  }
  if (K >= 6) {
    const std::size_t third = K / 3;
    fit.third_slopes = {slope_of(0, K - 2 * third), slope_of(K - 2 * third, K - third),
                        slope_of(K - third, K)};
  }

  const bool any_overflow =
      std::any_of(overflowed.begin(), overflowed.end(), [](char c) { return c != 0; });
  if (any_overflow) {
    fit.verdict = GrowthVerdict::Superpolynomial;
    for (std::size_t k = 0; k < magnitudes.size(); ++k) {
      if (overflowed[k]) {
        fit.overflow_witness = magnitudes[k];
        break;
      }
    }
  } else if (std::abs(fit.slope_drift) < 0.5) {
    fit.verdict = GrowthVerdict::Polynomial;
  } else if (fit.slope_drift >= 1.0 && fit.third_slopes.size() == 3 &&
             fit.third_slopes[0] < fit.third_slopes[1] &&
             fit.third_slopes[1] < fit.third_slopes[2]) {
    fit.verdict = GrowthVerdict::Superpolynomial;
  } else {
    fit.verdict = GrowthVerdict::Inconclusive;
  }
  return fit;
}

}  // namespace hypan
