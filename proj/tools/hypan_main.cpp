// hypan: symbol machinery and spectral mode solver for weakly hyperbolic
// Cauchy problems with time-dependent coefficients.
//
// Exit codes: 0 success, 2 validation error (bad input, non-hyperbolic
// operator), 3 numerical abort (overflow, step underflow).

#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hypan/run_config.hpp"
#include "hypan/util.hpp"

namespace {

void parse_range(const std::string& text, double& lo, double& hi) {
  const auto pos = text.find("..");
  if (pos == std::string::npos) {
    throw CLI::ValidationError("--xi", "expected a range like 16..1024");
  }
  try {
    lo = std::stod(text.substr(0, pos));
    hi = std::stod(text.substr(pos + 2));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--xi", "expected numbers in the range 16..1024 form");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hypan " + std::string(hypan::kVersion) +
               " — companion symbols, symmetrisers, Levi conditions, and per-frequency "
               "energy scans for weakly hyperbolic Cauchy problems"};
  app.require_subcommand(1);

  hypan::RunConfig cfg;
  std::string xi_range = "16..1024";
  bool dyadic = false;
  bool fixed_step = false;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("spec", cfg.spec_path, "operator description (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out-dir", cfg.out_dir, "artifact directory [out]");
  };
  const auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--grid-t", cfg.grid_t, "time nodes of the base verification grid [400]");
    sub->add_option("--xi-decades", cfg.xi_decades, "dyadic frequency decades 2^0..2^D [10]");
    sub->add_option("--directions", cfg.directions, "frequency directions (0 = automatic)");
    sub->add_option("--refine", cfg.refine, "grid refinement levels for verdicts [2]");
  };
  const auto add_solver = [&](CLI::App* sub) {
    sub->add_option("--rel-tol", cfg.rel_tol, "local relative error target [1e-10]");
    sub->add_option("--h-max", cfg.h_max, "maximum time step [1/512]");
    sub->add_flag("--fixed-step", fixed_step, "disable adaptive step control");
  };
  const auto add_v0 = [&](CLI::App* sub) {
    sub->add_option("--v0", cfg.v0, "initial mode vector: ones | random [ones]")
        ->check(CLI::IsMember({"ones", "random"}));
    sub->add_option("--seed", cfg.seed, "seed for --v0 random [0]");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "classify hyperbolicity and verify the "
                                                    "check-function and Levi hypotheses");
  add_common(analyze);
  add_grid(analyze);

  CLI::App* levi = app.add_subcommand("levi", "lower-order coefficient quotients only");
  add_common(levi);
  add_grid(levi);
  levi->add_option("--mode", cfg.levi_mode, "quotient family: complex | real | graded [complex]")
      ->check(CLI::IsMember({"complex", "real", "graded"}));
  levi->add_option("--lmax", cfg.lmax, "highest graded level to check (-1 = all)");

  CLI::App* partition = app.add_subcommand(
      "partition", "zeros of Delta, excluded/kept intervals, degeneracy exponent fit");
  add_common(partition);
  partition->add_option("--xi-dir", cfg.xi_dir, "frequency direction (n components)")
      ->delimiter(',');
  partition->add_option("--eps", cfg.eps_list, "excluded-measure budgets [e^-1,e^-2,e^-3]")
      ->delimiter(',');

  CLI::App* scan = app.add_subcommand("scan", "frequency growth sweep and verdict");
  add_common(scan);
  scan->add_option("--xi", xi_range, "dyadic magnitude range [16..1024]");
  scan->add_flag("--dyadic", dyadic, "magnitudes double between endpoints (always on)");
  scan->add_option("--xi-dir", cfg.xi_dir, "frequency direction (n components)")
      ->delimiter(',');
  add_v0(scan);
  add_solver(scan);

  CLI::App* trace = app.add_subcommand("trace", "single-mode energies against their envelopes");
  add_common(trace);
  trace->add_option("--xi", cfg.trace_xi, "frequency magnitude [64]");
  trace->add_option("--xi-dir", cfg.xi_dir, "frequency direction (n components)")
      ->delimiter(',');
  trace->add_option("--eps", cfg.eps, "excluded-measure budget [e^-1]");
  add_grid(trace);
  add_v0(trace);
  add_solver(trace);

  CLI::App* solve = app.add_subcommand("solve", "full periodic Cauchy solve (n = 1)");
  add_common(solve);
  solve->add_option("--data", cfg.data_path, "initial data (JSON or CSV)")
      ->required()
      ->check(CLI::ExistingFile);
  solve->add_option("--t-out", cfg.t_out, "output times, ascending")
      ->required()
      ->delimiter(',');
  add_solver(solve);

  CLI::App* dump = app.add_subcommand("dump", "symmetriser polynomials and symbol data");
  add_common(dump);
  dump->add_option("--xi-dir", cfg.xi_dir, "frequency direction (n components)")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
    if (scan->parsed()) parse_range(xi_range, cfg.xi_lo, cfg.xi_hi);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  cfg.subcommand = app.get_subcommands().front()->get_name();
  cfg.adaptive = !fixed_step;
  (void)dyadic;
  return hypan::run(cfg);
}
