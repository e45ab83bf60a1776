#pragma once

// Degeneracy partition of the working window.
//
// For a fixed frequency direction, the discriminant Delta(., xi) vanishes on
// a finite zero set Sigma(xi) = {t_1, ..., t_N}.  Around each zero we remove
// an open interval of half-width eps/(2 max(N,1)); the union (merged and
// clipped to [a,b]) is the excluded set of total measure <= eps, and the
// complementary closed intervals are the kept set.  On the kept set Delta
// stays bounded below by a power of eps, and the logarithmic derivative of
// Delta has integral O(log(1/eps)) — the four bullet bounds reported in
// PartitionBounds.  Z(t) = prod_j |t - t_j| (1 for an empty zero set) is the
// distance product entering the reformulated check-function condition.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hypan/symmetriser.hpp"

namespace hypan {

struct PartitionBounds {
  int p_observed = 0;             // number of excluded intervals after merging
  double measure_excluded = 0.0;  // total length of the excluded set
  double min_delta_kept = 0.0;    // min of Delta over the kept set
  double log_integral = 0.0;      // integral of |Delta'|/Delta over the kept set
  bool quadrature_converged = true;
};

struct Partition {
  Eigen::VectorXd xi_dir;
  double eps = 0.0;
  std::vector<double> sigma;                          // zeros of Delta(., xi) in [a,b]
  std::vector<std::pair<double, double>> excluded;    // open intervals, merged
  std::vector<std::pair<double, double>> kept;        // closed complement in [a,b]
  PartitionBounds bounds;
  std::vector<std::string> warnings;

  bool in_excluded(double t) const {
    for (const auto& [lo, hi] : excluded)
      if (t > lo && t < hi) return true;
    return false;
  }
};

// Zeros of a polynomial on [a,b]: sign-change scan on 2048 cells refined by
// bisection to 1e-12, plus non-sign-changing (even-order) zeros caught where
// |p| < 1e-12 * sup|p| at critical points of p.  Throws
// DegenerateDirectionError when p vanishes identically within tolerance.
std::vector<double> find_poly_zeros(const Poly& p, double a, double b,
                                    std::vector<std::string>* warnings = nullptr);

// Zero set of Delta(., xi) on the working window.
std::vector<double> find_zeros(const OperatorSpec& spec, const Eigen::VectorXd& xi_dir);
std::vector<double> find_zeros(const SymmetriserPolys& sym, double a, double b,
                               std::vector<std::string>* warnings = nullptr);

// Distance product: prod_j |t - t_j|, or 1 when sigma is empty.
double z_function(const std::vector<double>& sigma, double t);

// Build the partition at a given eps in (0, e^{-1}].
Partition build_partition(const OperatorSpec& spec, const Eigen::VectorXd& xi_dir, double eps);
Partition build_partition(const SymmetriserPolys& sym, double a, double b, double eps);

struct PqSample {
  double eps = 0.0;
  int p = 0;                    // worst interval count over directions
  double min_delta_rel = 0.0;   // min over directions of min_delta_kept / sup|Delta|
  double measure = 0.0;         // worst measure over directions
  double log_integral = 0.0;    // worst log-integral over directions
};

struct PqFit {
  int p = 0;
  double slope = 0.0;             // d log(min_delta_rel) / d log(eps)
  std::optional<int> q;           // round(slope/2) when the fit is consistent
  bool monotone = true;           // min_delta_rel non-increasing as eps shrinks
  std::vector<PqSample> samples;  // ordered as eps_list
};

// Sweep eps over >= 3 values and fit the degeneracy exponent.
PqFit estimate_pq(const OperatorSpec& spec, const std::vector<Eigen::VectorXd>& dirs,
                  const std::vector<double>& eps_list);

}  // namespace hypan
