#include "hypan/partition.hpp"

#include <algorithm>
#include <cmath>

namespace hypan {

namespace {

constexpr int kScanCells = 2048;
constexpr double kBisectTol = 1e-12;
constexpr double kZeroRelTol = 1e-12;
constexpr double kClusterTol = 1e-10;

// Bisection on a bracketing interval [lo, hi] with f(lo) * f(hi) < 0.
double bisect(const Poly& p, double lo, double hi, double flo) {
  for (int it = 0; it < 200 && hi - lo > kBisectTol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = p(mid);
    if (fm == 0.0) return mid;
    if ((flo < 0) == (fm < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void push_zero(std::vector<double>& zs, double t) {
  for (double z : zs)
    if (std::abs(z - t) <= kClusterTol) return;
  zs.push_back(t);
}

}  // namespace

std::vector<double> find_poly_zeros(const Poly& p, double a, double b,
                                    std::vector<std::string>* warnings) {
  std::vector<double> grid(kScanCells + 1), vals(kScanCells + 1);
  double sup = 0.0;
  for (int k = 0; k <= kScanCells; ++k) {
    grid[k] = a + (b - a) * k / kScanCells;
    vals[k] = p(grid[k]);
    sup = std::max(sup, std::abs(vals[k]));
  }
  if (sup == 0.0) {
    throw DegenerateDirectionError("discriminant vanishes identically on the working window");
  }
  const double ztol = kZeroRelTol * sup;

  std::vector<double> zeros;
  // Odd-order zeros: sign changes between adjacent scan nodes.
  for (int k = 0; k < kScanCells; ++k) {
    if (vals[k] == 0.0) {
      push_zero(zeros, grid[k]);
    } else if ((vals[k] < 0) != (vals[k + 1] < 0)) {
      push_zero(zeros, bisect(p, grid[k], grid[k + 1], vals[k]));
    }
  }
  if (vals[kScanCells] == 0.0) push_zero(zeros, b);

  // Even-order zeros: critical points of p where |p| sits under the zero
  // tolerance.  Critical points are sign changes of p', found the same way.
  const Poly dp = p.derivative();
  if (!dp.is_zero()) {
    double prev = dp(grid[0]);
    for (int k = 0; k < kScanCells; ++k) {
      const double next = dp(grid[k + 1]);
      if (prev == 0.0) {
        if (std::abs(p(grid[k])) <= ztol) push_zero(zeros, grid[k]);
      } else if ((prev < 0) != (next < 0)) {
        const double c = bisect(dp, grid[k], grid[k + 1], prev);
        if (std::abs(p(c)) <= ztol) push_zero(zeros, c);
      }
      prev = next;
    }
  }
  // Window endpoints can carry zeros without a sign change inside [a,b].
  if (std::abs(vals[0]) <= ztol) push_zero(zeros, a);
  if (std::abs(vals[kScanCells]) <= ztol) push_zero(zeros, b);

  std::sort(zeros.begin(), zeros.end());
  if (warnings) {
    for (std::size_t k = 0; k + 1 < zeros.size(); ++k) {
      if (zeros[k + 1] - zeros[k] < 16.0 * kClusterTol) {
        warnings->push_back("zeros closer than resolution near t=" + fmt_g17(zeros[k]) +
                            "; reported as distinct but possibly one cluster");
      }
    }
  }
  return zeros;
}

std::vector<double> find_zeros(const SymmetriserPolys& sym, double a, double b,
                               std::vector<std::string>* warnings) {
  if (sym.degenerate()) {
    throw DegenerateDirectionError(
        "discriminant vanishes identically along this direction (roots coincide for all t)");
  }
  return find_poly_zeros(sym.delta(), a, b, warnings);
}

std::vector<double> find_zeros(const OperatorSpec& spec, const Eigen::VectorXd& xi_dir) {
  SymmetriserPolys sym(spec, xi_dir);
  return find_zeros(sym, spec.work_lo, spec.work_hi);
}

double z_function(const std::vector<double>& sigma, double t) {
  double z = 1.0;
  for (double tj : sigma) z *= std::abs(t - tj);
  return z;
}

Partition build_partition(const SymmetriserPolys& sym, double a, double b, double eps) {
  if (!(eps > 0.0 && eps <= std::exp(-1.0) + 1e-15)) {
    throw ValidationError("partition eps must lie in (0, e^{-1}]");
  }
  Partition part;
  part.xi_dir = sym.xi();
  part.eps = eps;
  part.sigma = find_zeros(sym, a, b, &part.warnings);

  const std::size_t N = part.sigma.size();
  if (N > 0) {
    const double half = eps / (2.0 * static_cast<double>(N));
    std::vector<std::pair<double, double>> raw;
    for (double tj : part.sigma) {
      raw.emplace_back(std::max(a, tj - half), std::min(b, tj + half));
    }
    for (const auto& iv : raw) {
      if (!part.excluded.empty() && iv.first <= part.excluded.back().second) {
        part.excluded.back().second = std::max(part.excluded.back().second, iv.second);
      } else {
        part.excluded.push_back(iv);
      }
    }
  }

  // Complement of the excluded set in [a,b]; slivers below 1e-14 are dropped.
  double cursor = a;
  for (const auto& [lo, hi] : part.excluded) {
    if (lo - cursor > 1e-14) part.kept.emplace_back(cursor, lo);
    cursor = std::max(cursor, hi);
  }
  if (b - cursor > 1e-14) part.kept.emplace_back(cursor, b);

  auto& bounds = part.bounds;
  bounds.p_observed = static_cast<int>(part.excluded.size());
  for (const auto& [lo, hi] : part.excluded) bounds.measure_excluded += hi - lo;

  // Minimum of Delta over the kept set: endpoints, interior critical points,
  // and a safety grid per interval.
  const Poly& delta = sym.delta();
  const Poly ddelta = sym.delta().derivative();
  bounds.min_delta_kept = std::numeric_limits<double>::infinity();
  auto consider = [&](double t) { bounds.min_delta_kept = std::min(bounds.min_delta_kept, delta(t)); };
  for (const auto& [lo, hi] : part.kept) {
    consider(lo);
    consider(hi);
    constexpr int kMinCells = 256;
    double prev = ddelta.is_zero() ? 0.0 : ddelta(lo);
    for (int k = 0; k < kMinCells; ++k) {
      const double t1 = lo + (hi - lo) * (k + 1) / kMinCells;
      consider(lo + (hi - lo) * (k + 0.5) / kMinCells);
      if (!ddelta.is_zero()) {
        const double next = ddelta(t1);
        if (prev != 0.0 && (prev < 0) != (next < 0)) {
          consider(bisect(ddelta, lo + (hi - lo) * k / kMinCells, t1, prev));
        }
        prev = next;
      }
    }
  }
  if (part.kept.empty()) bounds.min_delta_kept = 0.0;

  if (bounds.min_delta_kept <= 0.0) {
    part.warnings.push_back("discriminant not positive on the kept set; log-integral skipped");
    bounds.log_integral = std::numeric_limits<double>::quiet_NaN();
    return part;
  }

  for (const auto& [lo, hi] : part.kept) {
    auto integrand = [&](double t) { return std::abs(ddelta(t)) / delta(t); };
    QuadratureResult q = adaptive_simpson(integrand, lo, hi, 1e-6, 1000000);
    bounds.log_integral += q.value;
    bounds.quadrature_converged = bounds.quadrature_converged && q.converged;
  }
  return part;
}

Partition build_partition(const OperatorSpec& spec, const Eigen::VectorXd& xi_dir, double eps) {
  SymmetriserPolys sym(spec, xi_dir);
  return build_partition(sym, spec.work_lo, spec.work_hi, eps);
}

PqFit estimate_pq(const OperatorSpec& spec, const std::vector<Eigen::VectorXd>& dirs,
                  const std::vector<double>& eps_list) {
  if (eps_list.size() < 3) throw ValidationError("estimate_pq: need at least 3 eps values");
  if (dirs.empty()) throw ValidationError("estimate_pq: need at least one direction");
  const double lo = *std::min_element(eps_list.begin(), eps_list.end());
  const double hi = *std::max_element(eps_list.begin(), eps_list.end());
  if (hi / lo < std::exp(1.5) - 1e-9) {
    throw ValidationError("estimate_pq: eps values must span at least a factor e^{3/2}");
  }

  std::vector<SymmetriserPolys> syms;
  syms.reserve(dirs.size());
  for (const auto& d : dirs) syms.emplace_back(spec, d);

  PqFit fit;
  for (double eps : eps_list) {
    PqSample s;
    s.eps = eps;
    s.min_delta_rel = std::numeric_limits<double>::infinity();
    for (const auto& sym : syms) {
      Partition part = build_partition(sym, spec.work_lo, spec.work_hi, eps);
      s.p = std::max(s.p, part.bounds.p_observed);
      s.measure = std::max(s.measure, part.bounds.measure_excluded);
      s.log_integral = std::max(s.log_integral, part.bounds.log_integral);
      if (sym.delta_sup() > 0.0) {
        s.min_delta_rel = std::min(s.min_delta_rel, part.bounds.min_delta_kept / sym.delta_sup());
      }
    }
    fit.p = std::max(fit.p, s.p);
    fit.samples.push_back(s);
  }

  if (fit.p == 0) {
    // No zeros anywhere: Delta is bounded below independently of eps.
    fit.q = 0;
    fit.slope = 0.0;
    return fit;
  }

  std::vector<double> lx, ly;
  for (const auto& s : fit.samples) {
    if (s.min_delta_rel > 0.0 && std::isfinite(s.min_delta_rel)) {
      lx.push_back(std::log(s.eps));
      ly.push_back(std::log(s.min_delta_rel));
    }
  }
  if (lx.size() < 2) {
    fit.monotone = false;
    return fit;
  }
  fit.slope = fit_line(lx, ly).slope;

  // Monotonicity: min_delta_rel must not grow as eps shrinks (tolerate 1%).
  std::vector<std::pair<double, double>> byeps;
  for (const auto& s : fit.samples) byeps.emplace_back(s.eps, s.min_delta_rel);
  std::sort(byeps.begin(), byeps.end());
  for (std::size_t k = 0; k + 1 < byeps.size(); ++k) {
    if (byeps[k].second > byeps[k + 1].second * 1.01) fit.monotone = false;
  }
  if (fit.monotone) {
    const double half = 0.5 * fit.slope;
    const int rounded = static_cast<int>(std::lround(half));
    if (std::abs(half - rounded) <= 0.25 && rounded >= 0) fit.q = rounded;
  }
  return fit;
}

}  // namespace hypan
