#include "hypan/run_config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "hypan/analysis.hpp"
#include "hypan/cauchy.hpp"
#include "hypan/mode_solver.hpp"
#include "hypan/operator_spec.hpp"
#include "hypan/partition.hpp"
#include "hypan/symmetriser.hpp"

namespace hypan {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json vec_json(const std::vector<double>& v) { return json(v); }

json eigen_vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json header_json(const RunConfig& cfg) {
  return json{{"version", kVersion}, {"config", cfg.to_json()}};
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write artifact: " + path.string());
  out << j.dump(2) << "\n";
}

std::ofstream open_csv(const fs::path& path, const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write artifact: " + path.string());
  out << "# hypan " << kVersion << "\n";
  out << "# config " << cfg.to_json().dump() << "\n";
  return out;
}

Eigen::VectorXd direction_of(const RunConfig& cfg, const OperatorSpec& spec) {
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(spec.n);
  if (cfg.xi_dir.empty()) {
    dir[0] = 1.0;
    return dir;
  }
  if (static_cast<int>(cfg.xi_dir.size()) != spec.n) {
    throw ValidationError("--xi-dir must have n components");
  }
  for (int i = 0; i < spec.n; ++i) dir[i] = cfg.xi_dir[static_cast<std::size_t>(i)];
  if (dir.norm() == 0.0) throw ValidationError("--xi-dir must be nonzero");
  return dir / dir.norm();
}

std::vector<double> eps_list_of(const RunConfig& cfg) {
  if (!cfg.eps_list.empty()) {
    for (double e : cfg.eps_list) {
      if (!(e > 0.0) || e > std::exp(-1.0) + 1e-12) {
        throw ValidationError("eps values must lie in (0, e^-1]");
      }
    }
    return cfg.eps_list;
  }
  return {std::exp(-1.0), std::exp(-2.0), std::exp(-3.0)};
}

GridSpec grid_of(const RunConfig& cfg) {
  if (cfg.grid_t < 8) throw ValidationError("--grid-t must be at least 8");
  if (cfg.xi_decades < 1) throw ValidationError("--xi-decades must be at least 1");
  if (cfg.refine < 0) throw ValidationError("--refine must be nonnegative");
  GridSpec g;
  g.t_nodes = cfg.grid_t;
  g.xi_decades = cfg.xi_decades;
  g.directions = cfg.directions;
  g.refinements = cfg.refine;
  return g;
}

SolveOptions solve_options_of(const RunConfig& cfg) {
  if (!(cfg.rel_tol > 0.0)) throw ValidationError("--rel-tol must be positive");
  if (!(cfg.h_max > 0.0)) throw ValidationError("--h-max must be positive");
  SolveOptions opts;
  opts.rel_tol = cfg.rel_tol;
  opts.h_max = cfg.h_max;
  opts.adaptive = cfg.adaptive;
  return opts;
}

std::vector<double> dyadic_magnitudes(double lo, double hi) {
  if (!(lo >= 2.0)) throw ValidationError("scan magnitudes must start at >= 2");
  std::vector<double> mags;
  for (double m = lo; m <= hi * (1.0 + 1e-12); m *= 2.0) mags.push_back(m);
  if (mags.size() < 6) {
    throw ValidationError("scan range must contain at least 6 dyadic magnitudes");
  }
  return mags;
}

json check_json(const ConditionCheck& c) {
  json w{{"t", c.worst.t}, {"xi", eigen_vec_json(c.worst.xi)}, {"value", c.worst.value}};
  return json{{"sup", c.sup},
              {"sup_by_level", vec_json(c.sup_by_level)},
              {"holds", c.holds},
              {"finite", c.finite},
              {"worst", w}};
}

json poly_json(const Poly& p) { return json(p.coeffs()); }

int run_analyze(const RunConfig& cfg, const OperatorSpec& spec) {
  const AnalysisReport report = analyze(spec, grid_of(cfg));
  json j = header_json(cfg);
  j["report"] = report_to_json(report);
  write_json_file(fs::path(cfg.out_dir) / "analyze.json", j);
  if (report.classification.kind == Hyperbolicity::NotHyperbolic) {
    std::cerr << "not_hyperbolic: complex characteristic roots near t=" << fmt_g17(report.classification_witness.t)
              << ", xi=" << eigen_vec_json(report.classification_witness.xi).dump() << "\n";
    return 2;
  }
  std::cout << "analyze: " << to_string(report.classification.kind)
            << ", C1=" << fmt_g17(report.C1_estimate()) << "\n";
  return 0;
}

int run_levi(const RunConfig& cfg, const OperatorSpec& spec) {
  LeviMode mode = LeviMode::Complex;
  if (cfg.levi_mode == "real") {
    mode = LeviMode::Real;
  } else if (cfg.levi_mode == "graded") {
    mode = LeviMode::Graded;
  } else if (cfg.levi_mode != "complex") {
    throw ValidationError("--mode must be complex, real, or graded");
  }
  const LeviResult levi = check_levi(spec, grid_of(cfg), mode, cfg.lmax);
  json j = header_json(cfg);
  json cm = json::array();
  for (Eigen::Index i = 0; i < levi.constants.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < levi.constants.cols(); ++k) row.push_back(levi.constants(i, k));
    cm.push_back(row);
  }
  j["levi"] = json{{"mode", cfg.levi_mode},
                   {"l_max", levi.l_max},
                   {"constants", cm},
                   {"cond", check_json(levi.cond)},
                   {"residual_orders", vec_json(levi.residual_orders)},
                   {"degenerate_direction_found", levi.degenerate_direction_found}};
  write_json_file(fs::path(cfg.out_dir) / "levi.json", j);
  std::cout << "levi: " << (levi.cond.holds ? "holds" : "violated")
            << ", sup=" << fmt_g17(levi.cond.sup) << "\n";
  return 0;
}

int run_partition(const RunConfig& cfg, const OperatorSpec& spec) {
  const Eigen::VectorXd dir = direction_of(cfg, spec);
  const std::vector<double> eps_list = eps_list_of(cfg);
  const PqFit fit = estimate_pq(spec, {dir}, eps_list);

  json j = header_json(cfg);
  json samples = json::array();
  auto csv = open_csv(fs::path(cfg.out_dir) / "partition.csv", cfg);
  csv << "eps,p,measure,min_delta_rel,log_integral\n";
  for (const PqSample& s : fit.samples) {
    samples.push_back(json{{"eps", s.eps},
                           {"p", s.p},
                           {"measure", s.measure},
                           {"min_delta_rel", s.min_delta_rel},
                           {"log_integral", s.log_integral}});
    csv << fmt_g17(s.eps) << "," << s.p << "," << fmt_g17(s.measure) << ","
        << fmt_g17(s.min_delta_rel) << "," << fmt_g17(s.log_integral) << "\n";
  }

  json details = json::array();
  for (double eps : eps_list) {
    const Partition part = build_partition(spec, dir, eps);
    json intervals_ex = json::array();
    for (const auto& [lo, hi] : part.excluded) intervals_ex.push_back(json::array({lo, hi}));
    json intervals_kept = json::array();
    for (const auto& [lo, hi] : part.kept) intervals_kept.push_back(json::array({lo, hi}));
    details.push_back(json{{"eps", eps},
                           {"zeros", vec_json(part.sigma)},
                           {"excluded", intervals_ex},
                           {"kept", intervals_kept},
                           {"warnings", part.warnings}});
  }
  j["direction"] = eigen_vec_json(dir);
  j["samples"] = samples;
  j["partitions"] = details;
  j["fit"] = json{{"p", fit.p},
                  {"slope", fit.slope},
                  {"q", fit.q ? json(*fit.q) : json()},
                  {"monotone", fit.monotone}};
  write_json_file(fs::path(cfg.out_dir) / "partition.json", j);
  std::cout << "partition: p=" << fit.p << ", slope=" << fmt_g17(fit.slope) << "\n";
  return 0;
}

int run_scan(const RunConfig& cfg, const OperatorSpec& spec) {
  const Eigen::VectorXd dir = direction_of(cfg, spec);
  const std::vector<double> mags = dyadic_magnitudes(cfg.xi_lo, cfg.xi_hi);
  V0Policy policy;
  policy.kind = cfg.v0 == "random" ? V0Policy::RandomUnit : V0Policy::Ones;
  policy.seed = cfg.seed;
  const GrowthFit fit = growth_scan(spec, dir, mags, policy, solve_options_of(cfg));

  auto csv = open_csv(fs::path(cfg.out_dir) / "scan.csv", cfg);
  csv << "xi_mag,xi_bracket,ratio\n";
  for (std::size_t k = 0; k < mags.size(); ++k) {
    csv << fmt_g17(mags[k]) << "," << fmt_g17(bracket1(mags[k])) << ","
        << fmt_g17(fit.ratios[k]) << "\n";
  }

  json j = header_json(cfg);
  j["scan"] = json{{"magnitudes", vec_json(fit.xi_mags)},
                   {"ratios", vec_json(fit.ratios)},
                   {"slope", fit.slope},
                   {"slope_drift", fit.slope_drift},
                   {"third_slopes", vec_json(fit.third_slopes)},
                   {"verdict", to_string(fit.verdict)},
                   {"overflow_witness",
                    fit.overflow_witness ? json(*fit.overflow_witness) : json()}};
  write_json_file(fs::path(cfg.out_dir) / "scan.json", j);
  std::cout << "scan: verdict " << to_string(fit.verdict) << ", slope=" << fmt_g17(fit.slope)
            << ", drift=" << fmt_g17(fit.slope_drift) << "\n";
  return 0;
}

int run_trace(const RunConfig& cfg, const OperatorSpec& spec) {
  const Eigen::VectorXd dir = direction_of(cfg, spec);
  if (!(cfg.trace_xi > 0.0)) throw ValidationError("--xi must be positive");
  const Eigen::VectorXd xi = (cfg.trace_xi * dir).eval();

  const AnalysisReport report = analyze(spec, grid_of(cfg));
  if (report.classification.kind == Hyperbolicity::NotHyperbolic) {
    throw ValidationError("operator is not hyperbolic; no energy trace is defined");
  }
  std::optional<EnvelopeConstants> constants;
  if (report.gr1m.cond.finite && report.levi.cond.finite) {
    constants = envelope_constants(report);
  }

  const Partition part = build_partition(spec, dir, cfg.eps);

  Eigen::VectorXcd V0;
  if (cfg.v0 == "random") {
    V0Policy policy;
    policy.kind = V0Policy::RandomUnit;
    policy.seed = cfg.seed;
    std::mt19937_64 rng(policy.seed + 1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    V0.resize(spec.m);
    for (int i = 0; i < spec.m; ++i) V0[i] = std::complex<double>(gauss(rng), gauss(rng));
    V0 /= V0.norm();
  } else {
    V0 = Eigen::VectorXcd::Ones(spec.m);
  }

  ModeTrace trace =
      integrate_mode(spec, xi, V0, {spec.work_lo, spec.work_hi}, solve_options_of(cfg));
  energy_trace(spec, trace, part, constants);

  auto csv = open_csv(fs::path(cfg.out_dir) / "trace.csv", cfg);
  csv << "t,region,abs_v,e_kov,e_hyp,bound_slack\n";
  double sup_slack = 0.0;
  for (std::size_t k = 0; k < trace.t_nodes.size(); ++k) {
    csv << fmt_g17(trace.t_nodes[k]) << "," << trace.region[k] << ","
        << fmt_g17(trace.V[k].norm()) << "," << fmt_g17(trace.E_kov[k]) << ","
        << fmt_g17(trace.E_hyp[k]) << "," << fmt_g17(trace.bound_slack[k]) << "\n";
    if (std::isfinite(trace.bound_slack[k])) sup_slack = std::max(sup_slack, trace.bound_slack[k]);
  }

  json j = header_json(cfg);
  j["trace"] = json{{"xi", eigen_vec_json(xi)},
                    {"eps", cfg.eps},
                    {"steps", trace.steps},
                    {"rhs_evals", trace.rhs_evals},
                    {"sup_slack", sup_slack},
                    {"envelopes", constants.has_value()},
                    {"excluded_intervals", static_cast<int>(part.excluded.size())}};
  write_json_file(fs::path(cfg.out_dir) / "trace.json", j);
  std::cout << "trace: steps=" << trace.steps << ", sup_slack=" << fmt_g17(sup_slack) << "\n";
  return 0;
}

int run_solve(const RunConfig& cfg, const OperatorSpec& spec) {
  if (cfg.data_path.empty()) throw ValidationError("solve requires --data");
  if (cfg.t_out.empty()) throw ValidationError("solve requires --t-out");
  const CauchyData data = CauchyData::load(cfg.data_path, spec.m, spec.work_lo);
  const CauchySolution sol = solve_cauchy(spec, data, cfg.t_out, solve_options_of(cfg));

  const std::vector<double> x = periodic_grid(sol.N);
  json times = json::array();
  for (std::size_t s = 0; s < sol.t_out.size(); ++s) {
    const std::string name = "solve_" + std::to_string(s) + ".csv";
    auto csv = open_csv(fs::path(cfg.out_dir) / name, cfg);
    csv << "# t " << fmt_g17(sol.t_out[s]) << "\n";
    csv << "x,re_u,im_u";
    for (int d = 1; d < sol.m; ++d) csv << ",re_dtu" << d << ",im_dtu" << d;
    csv << "\n";
    for (int jx = 0; jx < sol.N; ++jx) {
      csv << fmt_g17(x[static_cast<std::size_t>(jx)]) << "," << fmt_g17(sol.u[s][jx].real())
          << "," << fmt_g17(sol.u[s][jx].imag());
      for (int d = 1; d < sol.m; ++d) {
        csv << "," << fmt_g17(sol.dtu[s][static_cast<std::size_t>(d - 1)][jx].real()) << ","
            << fmt_g17(sol.dtu[s][static_cast<std::size_t>(d - 1)][jx].imag());
      }
      csv << "\n";
    }
    times.push_back(json{{"t", sol.t_out[s]},
                         {"file", name},
                         {"sup_u", sol.u[s].cwiseAbs().maxCoeff()},
                         {"imag_fraction", sol.imag_fraction(s)}});
  }

  const SobolevLoss loss =
      sobolev_loss(spec, data, sol.t_out.back(), solve_options_of(cfg));
  json j = header_json(cfg);
  j["solve"] = json{{"N", sol.N},
                    {"t_out", vec_json(sol.t_out)},
                    {"times", times},
                    {"warnings", sol.warnings},
                    {"sobolev_loss", json{{"loss", loss.loss},
                                          {"conclusive", loss.conclusive},
                                          {"drift", loss.drift},
                                          {"violation_fraction", loss.violation_fraction},
                                          {"modes_used", loss.modes_used}}}};
  write_json_file(fs::path(cfg.out_dir) / "solve.json", j);
  std::cout << "solve: " << sol.t_out.size() << " output times, N=" << sol.N
            << (loss.conclusive ? ", loss=" + fmt_g17(loss.loss) : ", loss inconclusive") << "\n";
  return 0;
}

int run_dump(const RunConfig& cfg, const OperatorSpec& spec) {
  const Eigen::VectorXd dir = direction_of(cfg, spec);
  json j = header_json(cfg);
  j["operator"] = spec.to_json();
  j["breakpoints"] = vec_json(spec.breakpoints());

  SymmetriserPolys sym(spec, dir);
  json q = json::array(), dq = json::array();
  for (int r = 0; r < spec.m; ++r) {
    json qrow = json::array(), dqrow = json::array();
    for (int c = 0; c < spec.m; ++c) {
      qrow.push_back(poly_json(sym.q().at(r, c)));
      dqrow.push_back(poly_json(sym.dq().at(r, c)));
    }
    q.push_back(qrow);
    dq.push_back(dqrow);
  }
  json minors = json::array();
  for (const Poly& p : sym.minors()) minors.push_back(poly_json(p));
  j["symbol"] = json{{"direction", eigen_vec_json(dir)},
                     {"q", q},
                     {"dq", dq},
                     {"delta", poly_json(sym.delta())},
                     {"ddelta", poly_json(sym.ddelta())},
                     {"psi", poly_json(sym.psi())},
                     {"minors", minors},
                     {"delta_sup", sym.delta_sup()}};
  try {
    j["symbol"]["delta_zeros"] = vec_json(find_zeros(sym, spec.work_lo, spec.work_hi));
  } catch (const DegenerateDirectionError&) {
    j["symbol"]["delta_zeros"] = nullptr;
    j["symbol"]["degenerate"] = true;
  }
  write_json_file(fs::path(cfg.out_dir) / "dump.json", j);
  std::cout << "dump: wrote symbol data for m=" << spec.m << "\n";
  return 0;
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
  return json{{"subcommand", subcommand},
              {"spec", spec_path},
              {"data", data_path},
              {"out_dir", out_dir},
              {"grid_t", grid_t},
              {"xi_decades", xi_decades},
              {"directions", directions},
              {"refine", refine},
              {"xi_dir", xi_dir},
              {"eps_list", eps_list},
              {"xi_lo", xi_lo},
              {"xi_hi", xi_hi},
              {"trace_xi", trace_xi},
              {"eps", eps},
              {"v0", v0},
              {"seed", seed},
              {"t_out", t_out},
              {"levi_mode", levi_mode},
              {"lmax", lmax},
              {"rel_tol", rel_tol},
              {"h_max", h_max},
              {"adaptive", adaptive}};
}

int run(const RunConfig& cfg) {
  try {
    if (cfg.spec_path.empty()) throw ValidationError("an operator file is required");
    const OperatorSpec spec = OperatorSpec::load(cfg.spec_path);
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw ValidationError("cannot create output directory: " + cfg.out_dir);

    if (cfg.subcommand == "analyze") return run_analyze(cfg, spec);
    if (cfg.subcommand == "levi") return run_levi(cfg, spec);
    if (cfg.subcommand == "partition") return run_partition(cfg, spec);
    if (cfg.subcommand == "scan") return run_scan(cfg, spec);
    if (cfg.subcommand == "trace") return run_trace(cfg, spec);
    if (cfg.subcommand == "solve") return run_solve(cfg, spec);
    if (cfg.subcommand == "dump") return run_dump(cfg, spec);
    throw ValidationError("unknown subcommand: " + cfg.subcommand);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const OverflowAbort& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace hypan
