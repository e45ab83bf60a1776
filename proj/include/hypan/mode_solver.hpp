#pragma once

// Per-frequency integration of the reduced system
//
//   dV/dt = i (<xi> A(t, xi) + B(t, xi)) V,
//
// by classic RK4 with doubled-step Richardson error control, plus the energy
// bookkeeping: the Kovalevskian energy |V|^2 on excluded intervals around
// degeneracies, the hyperbolic energy <QV, V> on kept intervals, and their
// Gronwall envelopes anchored at each region entry.  A frequency sweep fits
// the growth exponent of sup_t |V| / |V(a)| against <xi> and classifies the
// growth as polynomial / superpolynomial / inconclusive.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hypan/analysis.hpp"
#include "hypan/partition.hpp"

namespace hypan {

// Raised when |V| passes the overflow guard; growth scans convert this into
// a superpolynomial verdict instead of aborting.
class OverflowAbort : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct SolveOptions {
  double h_max = 1.0 / 512.0;
  double rel_tol = 1e-10;  // local relative error target per step
  bool adaptive = true;    // false: fixed step at the step-law value
  int min_output_nodes = 512;
};

struct ModeTrace {
  Eigen::VectorXd xi;
  double t_begin = 0.0, t_end = 0.0;
  std::vector<double> t_nodes;
  std::vector<Eigen::VectorXcd> V;
  std::vector<double> E_kov;        // |V|^2 at every node
  std::vector<double> E_hyp;        // <QV,V> on kept nodes, NaN elsewhere
  std::vector<double> bound_slack;  // E / envelope, NaN when constants missing
  std::vector<int> region;          // index into partition.kept, or -1 (excluded)
  long steps = 0;
  long rhs_evals = 0;
};

// Integrate and sample on >= min_output_nodes uniform nodes (plus piecewise
// breakpoints as internal restart points).
ModeTrace integrate_mode(const OperatorSpec& spec, const Eigen::VectorXd& xi,
                         const Eigen::VectorXcd& V0, std::pair<double, double> t_span,
                         const SolveOptions& opts = {});

// Advance V0 from t_from through an ascending list of target times, returning
// the state at each target.  Workhorse shared with the Cauchy solver.
std::vector<Eigen::VectorXcd> integrate_to(const OperatorSpec& spec, const Eigen::VectorXd& xi,
                                           const Eigen::VectorXcd& V0, double t_from,
                                           const std::vector<double>& t_targets,
                                           const SolveOptions& opts = {}, long* steps = nullptr,
                                           long* rhs_evals = nullptr);

// ||QB - B*Q|| (max absolute entry), computed both as a matrix product and
// through the entrywise formula d_ij = q_im b_j - conj(b_i) q_jm; the two
// must agree to 1e-12 relative.
double qb_commutator_bound(const SymbolFrame& frame, const Eigen::MatrixXd& Q);

// Annotate a trace with the two-case energy, region tags, and (when envelope
// constants are available) the Gronwall bound slack per node.
void energy_trace(const OperatorSpec& spec, ModeTrace& trace, const Partition& partition,
                  const std::optional<EnvelopeConstants>& constants);

enum class GrowthVerdict { Polynomial, Superpolynomial, Inconclusive };

std::string to_string(GrowthVerdict v);

struct V0Policy {
  enum Kind { Ones, RandomUnit } kind = Ones;
  std::uint64_t seed = 0;
};

struct GrowthFit {
  std::vector<double> xi_mags;  // |xi| per sweep entry
  std::vector<double> ratios;   // sup_t |V(t)| / |V(a)|
  double slope = 0.0;           // log ratio vs log <xi>
  double slope_drift = 0.0;     // upper-half slope minus lower-half slope
  std::vector<double> third_slopes;
  GrowthVerdict verdict = GrowthVerdict::Inconclusive;
  std::optional<double> overflow_witness;  // magnitude that tripped the guard
};

GrowthFit growth_scan(const OperatorSpec& spec, const Eigen::VectorXd& xi_dir,
                      const std::vector<double>& magnitudes, const V0Policy& policy = {},
                      const SolveOptions& opts = {});

}  // namespace hypan
