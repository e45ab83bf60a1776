#pragma once

// Shared utilities: error taxonomy, frequency-weight helpers, least-squares
// line fits, a bounded thread pool driven by HYPAN_THREADS, and an adaptive
// Simpson quadrature used for the degeneracy log-integrals.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace hypan {

inline constexpr const char* kVersion = "0.1.0";

// Bad input: malformed operator files, out-of-range requests, non-hyperbolic
// data where hyperbolicity is required.  Mapped to process exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical routine lost control (step underflow, NaN contamination,
// quadrature blow-up).  Mapped to process exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a requested frequency direction kills the discriminant
// identically, so no zero set / partition exists for it.
class DegenerateDirectionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Japanese bracket <xi> = sqrt(1 + |xi|^2).
inline double bracket(const Eigen::VectorXd& xi) {
  return std::sqrt(1.0 + xi.squaredNorm());
}

inline double bracket1(double xi) { return std::sqrt(1.0 + xi * xi); }

// xi^nu for a real frequency and a multi-index (componentwise powers).
inline double xi_power(const Eigen::VectorXd& xi, const std::vector<int>& nu) {
  double p = 1.0;
  for (std::size_t c = 0; c < nu.size(); ++c) {
    for (int k = 0; k < nu[c]; ++k) p *= xi[static_cast<Eigen::Index>(c)];
  }
  return p;
}

inline int multi_index_order(const std::vector<int>& nu) {
  int s = 0;
  for (int v : nu) s += v;
  return s;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_max = 0.0;  // max |y - fit| over the sample
};

// Ordinary least squares for y ~ slope*x + intercept.  Requires >= 2 points.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ValidationError("fit_line: need at least two samples");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-300) throw ValidationError("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy * sxx - sx * sxy) / det;
  for (std::size_t i = 0; i < x.size(); ++i) {
    f.residual_max = std::max(f.residual_max, std::abs(y[i] - (f.slope * x[i] + f.intercept)));
  }
  return f;
}

// Worker count: HYPAN_THREADS caps hardware concurrency; 1 disables pooling.
inline unsigned thread_budget() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HYPAN_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(v));
  }
  return hw;
}

// Index-parallel map: body(i) runs for i in [0, n).  Results must be written
// into pre-sized slots keyed by i so output order never depends on autoload
// scheduling.  Exceptions are captured and rethrown on the caller thread.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned workers = std::min<std::size_t>(thread_budget(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace detail {
inline double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   long& evals, long cap, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  evals += 2;
  if (evals > cap) throw NumericalError("adaptive quadrature exceeded evaluation budget");
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double delta = left + right - whole;
  if (depth > 60) return left + right + delta / 15.0;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, evals, cap, depth + 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, evals, cap, depth + 1);
}
}  // namespace detail

struct QuadratureResult {
  double value = 0.0;
  long evaluations = 0;
  bool converged = true;
};

// Adaptive Simpson with a relative tolerance and a hard cap on integrand
// evaluations.  The integrand must be finite on [a, b].
inline QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a,
                                         double b, double rel_tol = 1e-6, long max_evals = 1000000) {
  QuadratureResult r;
  if (b <= a) return r;
  const double fa = f(a), fm = f(0.5 * (a + b)), fb = f(b);
  r.evaluations = 3;
  const double whole = detail::simpson(fa, fm, fb, b - a);
  const double scale = std::max(std::abs(whole), 1e-12);
  try {
    r.value = detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, rel_tol * scale,
                                           r.evaluations, max_evals, 0);
  } catch (const NumericalError&) {
    r.converged = false;
    r.value = whole;
  }
  if (!std::isfinite(r.value)) throw NumericalError("quadrature produced a non-finite value");
  return r;
}

// Format a double for CSV output with enough digits to round-trip.
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace hypan
