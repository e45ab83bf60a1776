#include "hypan/cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <fftw3.h>

namespace hypan {

namespace {

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

// Plan creation is not thread-safe; executing cached plans on fresh buffers
// (new-array interface, FFTW_UNALIGNED) is.
PlanPair get_plans(int N) {
  static std::mutex mutex;
  static std::map<int, PlanPair> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(N);
  if (it != cache.end()) return it->second;
  std::vector<std::complex<double>> in(static_cast<std::size_t>(N));
  std::vector<std::complex<double>> out(static_cast<std::size_t>(N));
  auto* in_c = reinterpret_cast<fftw_complex*>(in.data());
  auto* out_c = reinterpret_cast<fftw_complex*>(out.data());
  PlanPair p;
  p.fwd = fftw_plan_dft_1d(N, in_c, out_c, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.bwd = fftw_plan_dft_1d(N, in_c, out_c, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p.fwd || !p.bwd) throw NumericalError("FFT plan creation failed for N=" + std::to_string(N));
  cache[N] = p;
  return p;
}

Eigen::VectorXcd run_plan(const Eigen::VectorXcd& values, bool forward) {
  const int N = static_cast<int>(values.size());
  PlanPair plans = get_plans(N);
  std::vector<std::complex<double>> in(values.data(), values.data() + N);
  std::vector<std::complex<double>> out(static_cast<std::size_t>(N));
  fftw_execute_dft(forward ? plans.fwd : plans.bwd,
                   reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  Eigen::VectorXcd result(N);
  for (int k = 0; k < N; ++k) result[k] = out[static_cast<std::size_t>(k)];
  return result;
}

std::complex<double> parse_entry(const nlohmann::json& v, const char* what) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ValidationError(std::string(what) + " entries must be numbers or [re, im] pairs");
}

}  // namespace

std::vector<double> periodic_grid(int N) {
  std::vector<double> x(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) x[static_cast<std::size_t>(j)] = 2.0 * M_PI * j / N;
  return x;
}

Eigen::VectorXcd dft_forward(const Eigen::VectorXcd& values) {
  Eigen::VectorXcd out = run_plan(values, true);
  out /= static_cast<double>(values.size());
  return out;
}

Eigen::VectorXcd dft_backward(const Eigen::VectorXcd& coeffs) { return run_plan(coeffs, false); }

void CauchyData::validate(int m) const {
  if (N < 16) throw ValidationError("grid size N must be at least 16");
  if ((N & (N - 1)) != 0) throw ValidationError("grid size N must be a power of two");
  if (!std::isfinite(t0)) throw ValidationError("t0 must be finite");
  if (static_cast<int>(g.size()) != m) {
    throw ValidationError("expected " + std::to_string(m) + " data functions, got " +
                          std::to_string(g.size()));
  }
  for (const auto& gl : g) {
    if (gl.size() != N) throw ValidationError("every data function must have N samples");
    if (!gl.allFinite()) throw ValidationError("data samples must be finite");
  }
}

CauchyData CauchyData::from_json(const nlohmann::json& j, int m, double default_t0) {
  if (!j.is_object() || !j.contains("N") || !j.contains("g")) {
    throw ValidationError("data JSON must contain \"N\" and \"g\"");
  }
  CauchyData data;
  data.N = j.at("N").get<int>();
  data.t0 = j.value("t0", default_t0);
  if (!j.at("g").is_array()) throw ValidationError("\"g\" must be an array of sample arrays");
  for (const auto& gj : j.at("g")) {
    if (!gj.is_array()) throw ValidationError("each data function must be an array of samples");
    Eigen::VectorXcd v(gj.size());
    for (std::size_t i = 0; i < gj.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_entry(gj[i], "data");
    data.g.push_back(std::move(v));
  }
  data.validate(m);
  return data;
}

CauchyData CauchyData::load(const std::string& path, int m, double default_t0) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open data file: " + path);
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("data file is not valid JSON: " + std::string(e.what()));
    }
    return from_json(j, m, default_t0);
  }

  // CSV: one row per grid point, m columns (real samples) or 2m columns
  // (re, im interleaved).
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ValidationError("bad CSV number in data file: '" + cell + "'");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("data file has no sample rows");
  const std::size_t cols = rows.front().size();
  if (cols != static_cast<std::size_t>(m) && cols != static_cast<std::size_t>(2 * m)) {
    throw ValidationError("data CSV must have m or 2m columns, got " + std::to_string(cols));
  }
  const bool complex_cols = cols == static_cast<std::size_t>(2 * m);
  CauchyData data;
  data.N = static_cast<int>(rows.size());
  data.t0 = default_t0;
  data.g.assign(static_cast<std::size_t>(m), Eigen::VectorXcd(data.N));
  for (int r = 0; r < data.N; ++r) {
    if (rows[static_cast<std::size_t>(r)].size() != cols) {
      throw ValidationError("ragged CSV row in data file");
    }
    for (int l = 0; l < m; ++l) {
      const auto& row = rows[static_cast<std::size_t>(r)];
      data.g[static_cast<std::size_t>(l)][r] =
          complex_cols
              ? std::complex<double>(row[static_cast<std::size_t>(2 * l)],
                                     row[static_cast<std::size_t>(2 * l + 1)])
              : std::complex<double>(row[static_cast<std::size_t>(l)], 0.0);
    }
  }
  data.validate(m);
  return data;
}

std::vector<Eigen::VectorXcd> transform_data(const CauchyData& data, int m) {
  data.validate(m);
  std::vector<Eigen::VectorXcd> v0(static_cast<std::size_t>(data.N), Eigen::VectorXcd(m));
  for (int l = 1; l <= m; ++l) {
    const Eigen::VectorXcd ghat = dft_forward(data.g[static_cast<std::size_t>(l - 1)]);
    for (int bin = 0; bin < data.N; ++bin) {
      const double br = bracket1(static_cast<double>(bin_wavenumber(bin, data.N)));
      v0[static_cast<std::size_t>(bin)][l - 1] = std::pow(br, m - l) * ghat[bin];
    }
  }
  return v0;
}

double CauchySolution::imag_fraction(std::size_t s) const {
  const Eigen::VectorXcd& us = u.at(s);
  const double sup = us.cwiseAbs().maxCoeff();
  if (sup == 0.0) return 0.0;
  return us.imag().cwiseAbs().maxCoeff() / sup;
}

CauchySolution solve_cauchy(const OperatorSpec& spec, const CauchyData& data,
                            const std::vector<double>& t_out, const SolveOptions& opts) {
  if (spec.n != 1) throw ValidationError("the full Cauchy solve supports n = 1 only");
  data.validate(spec.m);
  if (t_out.empty()) throw ValidationError("at least one output time is required");
  if (data.t0 < spec.work_lo - 1e-12 || data.t0 > spec.work_hi + 1e-12) {
    throw ValidationError("t0 must lie inside the working window");
  }
  for (std::size_t s = 0; s < t_out.size(); ++s) {
    if (t_out[s] < data.t0 - 1e-12 || t_out[s] > spec.work_hi + 1e-12) {
      throw ValidationError("output times must lie in [t0, end of working window]");
    }
    if (s > 0 && t_out[s] <= t_out[s - 1]) {
      throw ValidationError("output times must be strictly ascending");
    }
  }

  CauchySolution sol;
  sol.N = data.N;
  sol.m = spec.m;
  sol.t_out = t_out;
  if (std::abs(data.t0 - spec.work_lo) > 1e-12) {
    sol.warnings.push_back(
        "initial time differs from the start of the working window; growth bounds apply from t0 "
        "onward");
  }

  const std::vector<Eigen::VectorXcd> v0 = transform_data(data, spec.m);
  const std::size_t S = t_out.size();
  sol.vhat.assign(S, std::vector<Eigen::VectorXcd>(static_cast<std::size_t>(data.N)));

  parallel_for(static_cast<std::size_t>(data.N), [&](std::size_t bin) {
    const int w = bin_wavenumber(static_cast<int>(bin), data.N);
    Eigen::VectorXd xi(1);
    xi[0] = static_cast<double>(w);
    try {
      const auto states = integrate_to(spec, xi, v0[bin], data.t0, t_out, opts);
      for (std::size_t s = 0; s < S; ++s) sol.vhat[s][bin] = states[s];
    } catch (const OverflowAbort& e) {
      throw OverflowAbort(std::string(e.what()) + " (wavenumber " + std::to_string(w) + ")");
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (wavenumber " + std::to_string(w) + ")");
    }
  });

  for (std::size_t s = 0; s < S; ++s) {
    Eigen::VectorXcd hat(data.N);
    for (int bin = 0; bin < data.N; ++bin) {
      const double br = bracket1(static_cast<double>(bin_wavenumber(bin, data.N)));
      hat[bin] = std::pow(br, 1 - spec.m) * sol.vhat[s][static_cast<std::size_t>(bin)][0];
    }
    sol.u.push_back(dft_backward(hat));
    std::vector<Eigen::VectorXcd> dtu_s;
    for (int d = 1; d < spec.m; ++d) {
      for (int bin = 0; bin < data.N; ++bin) {
        const double br = bracket1(static_cast<double>(bin_wavenumber(bin, data.N)));
        hat[bin] = std::pow(br, d - (spec.m - 1)) * sol.vhat[s][static_cast<std::size_t>(bin)][d];
      }
      dtu_s.push_back(dft_backward(hat));
    }
    sol.dtu.push_back(std::move(dtu_s));
  }
  return sol;
}

SobolevLoss sobolev_loss(const OperatorSpec& spec, const CauchyData& data, double t,
                         const SolveOptions& opts) {
  const CauchySolution sol = solve_cauchy(spec, data, {t}, opts);
  const std::vector<Eigen::VectorXcd> v0 = transform_data(data, spec.m);

  double v0_sup = 0.0;
  for (const auto& v : v0) v0_sup = std::max(v0_sup, v.norm());
  const double floor = 1e-13 * v0_sup;

  SobolevLoss out;
  std::vector<double> x, y;
  for (int k = 1; k < data.N / 2; ++k) {
    // Symmetrize over the +/- wavenumber pair.
    const std::size_t bp = static_cast<std::size_t>(k);
    const std::size_t bm = static_cast<std::size_t>(data.N - k);
    const double n0 = std::max(v0[bp].norm(), v0[bm].norm());
    if (!(n0 > floor)) continue;
    const double nt = std::max(sol.vhat[0][bp].norm(), sol.vhat[0][bm].norm());
    x.push_back(std::log(bracket1(static_cast<double>(k))));
    y.push_back(std::log(std::max(nt / n0, 1e-16)));
  }
  out.modes_used = static_cast<int>(x.size());
  if (out.modes_used < 4) {
    out.conclusive = false;
    return out;
  }
  out.loss = fit_line(x, y).slope;

  int drops = 0;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    if (y[i + 1] < y[i] - 1.0) ++drops;
  }
  out.violation_fraction = static_cast<double>(drops) / static_cast<double>(y.size() - 1);

  const std::size_t half = x.size() / 2;
  const auto slope_of = [&](std::size_t lo, std::size_t hi) {
    std::vector<double> xs(x.begin() + lo, x.begin() + hi);
    std::vector<double> ys(y.begin() + lo, y.begin() + hi);
    return fit_line(xs, ys).slope;
  };
  out.drift = slope_of(x.size() - half, x.size()) - slope_of(0, half);
  out.conclusive = out.violation_fraction <= 0.3 && std::abs(out.drift) < 1.0;
  return out;
}

}  // namespace hypan
