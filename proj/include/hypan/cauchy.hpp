#pragma once

// Full periodic Cauchy solve for n = 1: the 2*pi-periodic grid x_j = 2*pi*j/N
// carries samples of the data derivatives, each Fourier mode is integrated by
// the mode solver, and the solution (with its time derivatives) is
// reconstructed by inverse transform.
//
// Convention: data and outputs are D_t = -i d/dt derivatives of u, matching
// the first-order reduction u_l = D_t^{l-1} <D_x>^{m-l} u.  For data with
// g_1 = ... = g_{m-1} = 0 (e.g. struck-string problems) this coincides with
// plain time derivatives.

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hypan/mode_solver.hpp"
#include "hypan/operator_spec.hpp"
#include "hypan/util.hpp"

#include "json.hpp"

namespace hypan {

// Samples of the m data functions on the uniform periodic grid.
struct CauchyData {
  int N = 0;       // grid size, power of two, >= 16
  double t0 = 0.0; // initial time
  std::vector<Eigen::VectorXcd> g;  // g[l][j] = (D_t^l u)(t0, x_j), l = 0..m-1

  void validate(int m) const;

  // JSON: {"N": 64, "t0": 0.0, "g": [[...], ...]} with entries real numbers
  // or [re, im] pairs.  CSV: N rows of m (real) or 2m (re, im interleaved)
  // comma-separated columns, one column group per g_l; '#' lines ignored;
  // t0 defaults to `default_t0`.
  static CauchyData load(const std::string& path, int m, double default_t0);
  static CauchyData from_json(const nlohmann::json& j, int m, double default_t0);
};

// Grid points x_j = 2*pi*j/N.
std::vector<double> periodic_grid(int N);

// Wavenumber stored in FFT bin k: k for k < N/2, k - N otherwise.
inline int bin_wavenumber(int bin, int N) { return bin < N / 2 ? bin : bin - N; }

// Normalized forward transform: bin k holds (1/N) sum_j v_j e^{-i w_k x_j}.
Eigen::VectorXcd dft_forward(const Eigen::VectorXcd& values);
// Unnormalized inverse: grid value sum_k c_k e^{+i w_k x_j}.
Eigen::VectorXcd dft_backward(const Eigen::VectorXcd& coeffs);

// Spectral initial state: V0(k)_l = <w_k>^{m-l} ghat_{l-1}(k), l = 1..m.
std::vector<Eigen::VectorXcd> transform_data(const CauchyData& data, int m);

struct CauchySolution {
  int N = 0;
  int m = 0;
  std::vector<double> t_out;
  // u[s]: grid values of u at t_out[s]; dtu[s][d-1]: grid values of D_t^d u,
  // d = 1..m-1 (empty inner vectors for m = 1).
  std::vector<Eigen::VectorXcd> u;
  std::vector<std::vector<Eigen::VectorXcd>> dtu;
  // Spectral state per output time and FFT bin (kept for diagnostics).
  std::vector<std::vector<Eigen::VectorXcd>> vhat;
  std::vector<std::string> warnings;

  // max_j |Im u[s][j]| / max_j |u[s][j]| — reality diagnostic.
  double imag_fraction(std::size_t s) const;
};

// Integrate every Fourier mode from data.t0 to each requested output time
// (ascending, inside the working window) and reconstruct grid functions.
CauchySolution solve_cauchy(const OperatorSpec& spec, const CauchyData& data,
                            const std::vector<double>& t_out, const SolveOptions& opts = {});

// Derivative-loss estimate at time t: slope s of log(|V(t,k)|/|V(t0,k)|)
// against log<k> over the populated modes, so that the solution obeys
// ||u(t)||_{H^sigma} <= C ||data||_{H^{sigma+s}} when the fit is conclusive.
struct SobolevLoss {
  double loss = 0.0;              // fitted slope
  bool conclusive = false;
  double drift = 0.0;             // upper-half minus lower-half slope
  double violation_fraction = 0.0;  // share of adjacent modes breaking monotonicity
  int modes_used = 0;
};

SobolevLoss sobolev_loss(const OperatorSpec& spec, const CauchyData& data, double t,
                         const SolveOptions& opts = {});

}  // namespace hypan
