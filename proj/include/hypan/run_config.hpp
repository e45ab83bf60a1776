#pragma once

// CLI orchestration: a RunConfig describes one subcommand invocation; run()
// executes it, writes JSON/CSV artifacts into the output directory, and maps
// outcomes to exit codes (0 success, 2 validation failure, 3 numerical
// abort).  Every artifact embeds the config and code version.

#include <string>
#include <vector>

#include "hypan/util.hpp"

#include "json.hpp"

namespace hypan {

struct RunConfig {
  std::string subcommand;  // analyze | levi | partition | scan | trace | solve | dump
  std::string spec_path;
  std::string data_path;  // solve only
  std::string out_dir = "out";

  // analysis grid
  int grid_t = 400;
  int xi_decades = 10;
  int directions = 0;  // 0 = automatic
  int refine = 2;

  // partition
  std::vector<double> xi_dir;     // empty = first axis direction
  std::vector<double> eps_list;   // empty = {e^-1, e^-2, e^-3}

  // scan / trace
  double xi_lo = 16.0;
  double xi_hi = 1024.0;
  double trace_xi = 64.0;
  double eps = 0.36787944117144233;  // e^-1
  std::string v0 = "ones";           // ones | random
  unsigned long long seed = 0;

  // solve
  std::vector<double> t_out;

  // levi
  std::string levi_mode = "complex";  // complex | real | graded
  int lmax = -1;

  // solver overrides
  double rel_tol = 1e-10;
  double h_max = 1.0 / 512.0;
  bool adaptive = true;

  nlohmann::json to_json() const;
};

// Execute the subcommand; returns the process exit code.
int run(const RunConfig& cfg);

}  // namespace hypan
