#pragma once

// Hyperbolicity classification and hypothesis verification.
//
// Classification applies the minor-sign pattern of the symmetriser: the
// operator is strictly hyperbolic at (t, xi) iff all trailing minors are
// positive; it is weakly hyperbolic with r distinct roots iff
// Delta_m, ..., Delta_{r+1} vanish while Delta_r, ..., Delta_1 stay positive.
//
// Two families of uniform bounds are estimated over a (t, xi) grid:
//   - the check-function condition |psi| <= C1 Delta~ (evaluated through the
//     distance-product reformulation Z^2 |psi| <= C Delta near zeros of
//     Delta), and
//   - the Levi conditions |q_{im} b_j - conj(b_i) q_{jm}| <= c Delta on the
//     lower-order terms, in complex, real (i < j), and graded-order variants.
//
// "Holds" is a falsifiable proxy for uniform boundedness: the grid sup must
// be finite and stable (growth < 20%) under one 2x refinement in t and one
// dyadic extension in xi, with the skip neighbourhoods around zeros of Delta
// shrinking at each level.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "hypan/partition.hpp"

namespace hypan {

enum class Hyperbolicity { Strict, Weak, NotHyperbolic };

std::string to_string(Hyperbolicity h);

struct Classification {
  Hyperbolicity kind = Hyperbolicity::NotHyperbolic;
  int distinct_roots = 0;  // r from the minor pattern; equals m when strict
  std::vector<std::complex<double>> roots;  // rescaled roots lambda_i, sorted by real part
  bool pattern_consistent = true;  // minor pattern agrees with root clustering
};

// Pointwise classification with absolute tolerance on normalized minors.
Classification classify_hyperbolicity(const OperatorSpec& spec, double t,
                                      const Eigen::VectorXd& xi, double minor_tol = 1e-10);

struct GridSpec {
  int t_nodes = 400;   // base time resolution on [a,b]
  int xi_decades = 10; // dyadic magnitudes 2^0 .. 2^decades
  int directions = 0;  // 0 = automatic (n=1: both signs; n=2: 64 angles; else axes)
  int refinements = 2; // verdict levels beyond the base grid
};

struct Witness {
  double t = 0.0;
  Eigen::VectorXd xi;
  double value = 0.0;
};

struct ConditionCheck {
  double sup = 0.0;                  // sup at the finest level
  std::vector<double> sup_by_level;  // one entry per refinement level
  bool holds = false;
  bool finite = true;
  Witness worst;
};

struct Gr1mResult {
  ConditionCheck cond;
  bool degenerate_direction_found = false;
  std::vector<Eigen::VectorXd> degenerate_dirs;
};

// Check-function condition; cond.sup is the C1 estimate.
Gr1mResult check_gr1m(const OperatorSpec& spec, const GridSpec& grid);

enum class LeviMode { Complex, Real, Graded };

struct LeviResult {
  LeviMode mode = LeviMode::Complex;
  int l_max = -1;  // graded mode: highest checked order level
  Eigen::MatrixXd constants;  // sup of |q_{im} b_j - conj(b_i) q_{jm}| / Delta per (i,j)
  ConditionCheck cond;
  std::vector<double> residual_orders;  // graded: sup <xi>^l max_j |b_{-l,j}| for l > l_max
  bool degenerate_direction_found = false;
};

LeviResult check_levi(const OperatorSpec& spec, const GridSpec& grid,
                      LeviMode mode = LeviMode::Complex, int l_max = -1);

// The five order-two conditions evaluated side by side: the check-function
// bound, the two root-based reformulations
//   (i)  t^2 ((dλ1/dt)^2 + (dλ2/dt)^2) <= M (λ1-λ2)^2
//   (ii) λ1^2 + λ2^2 <= M (λ1-λ2)^2
// and the two lower-order conditions |b_j|^2 <= c q_jj and
// |q_12 b_2 - b_1 q_22|^2 <= c Delta.
struct M2Equivalences {
  ConditionCheck gr1m, cond_i, cond_ii, lc2, lcb2;
  bool psi_verdicts_agree = false;
  bool levi_verdicts_agree = false;
};

M2Equivalences m2_equivalences(const OperatorSpec& spec, const GridSpec& grid);

struct AnalysisReport {
  int m = 0;
  Classification classification;  // worst case over the sampled grid
  Witness classification_witness;
  Gr1mResult gr1m;
  LeviResult levi;
  std::optional<M2Equivalences> m2;  // filled for m == 2
  double c0 = 0.0;  // sup of lambda_max(Q) over the grid
  double c_A = 0.0, c_B = 0.0;       // sup Frobenius norms of A, B
  std::string lower_regularity;      // "analytic" or "piecewise"
  GridSpec grid;

  double C1_estimate() const { return gr1m.cond.sup; }
};

AnalysisReport analyze(const OperatorSpec& spec, const GridSpec& grid = {});

nlohmann::json report_to_json(const AnalysisReport& report);

// Constants feeding the Gronwall envelopes of the mode solver.  The kept-set
// energy satisfies E' <= (rate + log_coeff |Delta'|/Delta) E with
//   log_coeff = sqrt(1 + 2 C1)   (from the Newton identity on the (dQ, Q)
//                                 pencil under |psi| <= C1 Delta~), and
//   rate = sqrt(2 C1) + m c_levi c0^{m-1}
//                                 (lower-order terms through the Levi bound
//                                 and lambda_min(Q) >= Delta / c0^{m-1}).
// A safety factor covers the gap between grid sups and true sups.
struct EnvelopeConstants {
  int m = 1;
  double C1 = 0.0;
  double c_levi = 0.0;
  double c0 = 1.0;
  double safety = 1.5;

  double log_coeff() const { return safety * std::sqrt(1.0 + 2.0 * C1); }
  double rate() const {
    return safety * (std::sqrt(2.0 * C1) + m * c_levi * std::pow(std::max(c0, 1e-30), m - 1));
  }
  double elot_c() const { return std::max(log_coeff(), rate()); }
};

EnvelopeConstants envelope_constants(const AnalysisReport& report);

}  // namespace hypan
