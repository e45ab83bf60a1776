#include "hypan/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace hypan {

std::string to_string(Hyperbolicity h) {
  switch (h) {
    case Hyperbolicity::Strict:
      return "strict";
    case Hyperbolicity::Weak:
      return "weak";
    default:
      return "not_hyperbolic";
  }
}

namespace {

constexpr double kClusterTol = 1e-6;   // relative root-clustering tolerance
constexpr double kMachineEps = std::numeric_limits<double>::epsilon();
constexpr double kSkipBase = 1e-4;     // skip radius around zeros, fraction of span
constexpr double kNearBase = 1e-2;     // distance-product regime near zeros
constexpr double kStableFactor = 1.2;  // allowed sup growth per refinement
constexpr double kTinyAbs = 1e-9;

int cluster_count(std::vector<std::complex<double>> roots, double tol) {
  std::sort(roots.begin(), roots.end(),
            [](auto u, auto v) { return u.real() < v.real(); });
  int clusters = roots.empty() ? 0 : 1;
  for (std::size_t k = 1; k < roots.size(); ++k) {
    if (std::abs(roots[k] - roots[k - 1]) > tol) ++clusters;
  }
  return clusters;
}

}  // namespace

Classification classify_hyperbolicity(const OperatorSpec& spec, double t,
                                      const Eigen::VectorXd& xi, double minor_tol) {
  SymbolFrame frame = build_frame(spec, t, xi);
  Classification c;

  // Reality of the roots is certified through the symmetriser: Q is positive
  // semi-definite exactly when all roots are real.  This is far more robust
  // than inspecting companion eigenvalues, whose imaginary parts scatter at
  // O(eps^{1/k}) around a k-fold real root.
  Eigen::MatrixXd Q = build_symmetriser(frame);
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qs(Q, Eigen::EigenvaluesOnly);
  if (qs.info() != Eigen::Success) throw NumericalError("symmetric eigenvalue solve failed");
  const bool psd = qs.eigenvalues().minCoeff() >= -minor_tol * scale;

  Eigen::VectorXd minors = trailing_minors(Q);

  // Leading run of positive minors, then a vanishing tail; anything else
  // (sign reappearing after a vanish, or a negative minor) is inconsistent
  // with weak hyperbolicity.
  int r_pattern = 0;
  bool in_tail = false, tail_ok = true, nonneg = true;
  for (int j = 1; j <= spec.m; ++j) {
    const double nm = minors[j - 1] / std::pow(scale, j);
    if (!in_tail) {
      if (nm > minor_tol) {
        r_pattern = j;
      } else {
        in_tail = true;
      }
    } else if (std::abs(nm) > minor_tol) {
      tail_ok = false;
    }
    if (nm < -minor_tol) nonneg = false;
  }
  const bool pattern_ok = tail_ok && nonneg && r_pattern >= 1;

  Eigen::EigenSolver<Eigen::MatrixXd> es(frame.A);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue solve failed");
  c.roots.assign(es.eigenvalues().data(), es.eigenvalues().data() + spec.m);
  std::sort(c.roots.begin(), c.roots.end(),
            [](auto u, auto v) { return u.real() < v.real(); });
  double root_scale = 1.0;
  for (const auto& r : c.roots) root_scale = std::max(root_scale, std::abs(r));
  // A k-fold companion eigenvalue is resolved only to O(eps^{1/k}), so the
  // clustering tolerance must dominate eps^{1/m}.
  const double cluster_tol =
      root_scale * std::max(kClusterTol, 10.0 * std::pow(kMachineEps, 1.0 / spec.m));
  const int r_clusters = cluster_count(c.roots, cluster_tol);

  c.pattern_consistent = r_pattern == r_clusters;
  if (!psd || !pattern_ok) {
    c.kind = Hyperbolicity::NotHyperbolic;
    c.distinct_roots = r_clusters;
  } else {
    c.distinct_roots = r_pattern;
    c.kind = (r_pattern == spec.m) ? Hyperbolicity::Strict : Hyperbolicity::Weak;
  }
  return c;
}

namespace {

std::vector<Eigen::VectorXd> sample_directions(int n, int requested) {
  std::vector<Eigen::VectorXd> dirs;
  if (n == 1) {
    Eigen::VectorXd plus(1), minus(1);
    plus << 1.0;
    minus << -1.0;
    dirs = {plus, minus};
  } else if (n == 2) {
    const int count = requested > 0 ? requested : 64;
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * M_PI * k / count;
      Eigen::VectorXd d(2);
      d << std::cos(th), std::sin(th);
      dirs.push_back(d);
    }
  } else {
    for (int c = 0; c < n; ++c) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
      d[c] = 1.0;
      dirs.push_back(d);
      dirs.push_back(-d);
    }
  }
  return dirs;
}

struct DirData {
  Eigen::VectorXd dir;
  bool degenerate = false;
  std::vector<double> zeros;
  std::vector<std::unique_ptr<SymmetriserPolys>> sym;  // per magnitude
};

struct Sweep {
  const OperatorSpec* spec = nullptr;
  GridSpec grid;
  double a = 0, b = 0, span = 0;
  std::vector<double> mags;  // 2^0 .. 2^(decades + 1); last decade only for the final level
  std::vector<DirData> dirs;
  bool any_degenerate = false;
  std::vector<Eigen::VectorXd> degenerate_dirs;

  int levels() const { return grid.refinements + 1; }
  int t_count(int level) const { return grid.t_nodes << std::min(level, 8); }
  std::size_t mag_count(int level) const {
    return level >= levels() - 1 ? mags.size() : mags.size() - 1;
  }
  double skip_radius(int level) const { return kSkipBase * span / (1 << level); }
};

Sweep build_sweep(const OperatorSpec& spec, const GridSpec& grid) {
  Sweep sw;
  sw.spec = &spec;
  sw.grid = grid;
  sw.a = spec.work_lo;
  sw.b = spec.work_hi;
  sw.span = sw.b - sw.a;
  for (int d = 0; d <= grid.xi_decades + 1; ++d) sw.mags.push_back(std::pow(2.0, d));

  auto dirvecs = sample_directions(spec.n, grid.directions);
  sw.dirs.resize(dirvecs.size());
  for (std::size_t k = 0; k < dirvecs.size(); ++k) {
    sw.dirs[k].dir = dirvecs[k];
    sw.dirs[k].sym.resize(sw.mags.size());
  }
  parallel_for(sw.dirs.size() * sw.mags.size(), [&](std::size_t idx) {
    const std::size_t di = idx / sw.mags.size();
    const std::size_t mi = idx % sw.mags.size();
    sw.dirs[di].sym[mi] =
        std::make_unique<SymmetriserPolys>(spec, (sw.mags[mi] * sw.dirs[di].dir).eval());
  });
  for (auto& dd : sw.dirs) {
    if (dd.sym[0]->degenerate()) {
      dd.degenerate = true;
      sw.any_degenerate = true;
      sw.degenerate_dirs.push_back(dd.dir);
      continue;
    }
    dd.zeros = find_zeros(*dd.sym[0], sw.a, sw.b, nullptr);
  }
  return sw;
}

double zero_distance(const std::vector<double>& zeros, double t) {
  double d = std::numeric_limits<double>::infinity();
  for (double z : zeros) d = std::min(d, std::abs(t - z));
  return d;
}

struct SupAcc {
  double sup = 0.0;
  bool finite = true;
  Witness worst;

  void feed(double v, double t, const Eigen::VectorXd& xi) {
    if (!std::isfinite(v)) {
      finite = false;
      v = std::numeric_limits<double>::infinity();
    }
    if (v > sup || !std::isfinite(v)) {
      sup = v;
      worst.t = t;
      worst.xi = xi;
      worst.value = v;
    }
  }
};

void finalize_check(ConditionCheck& chk, const std::vector<SupAcc>& acc_by_level) {
  chk.sup_by_level.clear();
  chk.finite = true;
  for (const auto& acc : acc_by_level) {
    chk.sup_by_level.push_back(acc.sup);
    chk.finite = chk.finite && acc.finite;
  }
  chk.sup = acc_by_level.back().sup;
  chk.worst = acc_by_level.back().worst;
  chk.holds = chk.finite;
  for (std::size_t k = 0; k + 1 < chk.sup_by_level.size(); ++k) {
    if (chk.sup_by_level[k + 1] > kStableFactor * chk.sup_by_level[k] + kTinyAbs) {
      chk.holds = false;
    }
  }
}

// Walk every live grid point at one refinement level.  The visitor receives
// the direction record, the per-magnitude symmetriser, the time node, the
// full frequency, and the precomputed Delta value.  Nodes inside the skip
// radius around a detected zero are excluded; the radius shrinks with the
// level so that a quotient diverging at a zero shows up as sup growth
// across levels rather than saturating at a fixed cutoff.
template <typename Visitor>
void walk_level(const Sweep& sw, int level, Visitor&& visit) {
  const double skip = sw.skip_radius(level);
  const int tn = sw.t_count(level);
  for (const auto& dd : sw.dirs) {
    if (dd.degenerate) continue;
    for (std::size_t mi = 0; mi < sw.mag_count(level); ++mi) {
      const SymmetriserPolys& sym = *dd.sym[mi];
      const Eigen::VectorXd xi = sw.mags[mi] * dd.dir;
      for (int k = 0; k < tn; ++k) {
        const double t = sw.a + sw.span * k / (tn - 1);
        const double zdist = zero_distance(dd.zeros, t);
        if (zdist < skip) continue;
        const double delta = sym.delta_at(t);
        if (delta <= 0.0) continue;
        visit(dd, sym, t, xi, delta, zdist);
      }
    }
  }
}

Gr1mResult check_gr1m_impl(const Sweep& sw) {
  Gr1mResult res;
  res.degenerate_direction_found = sw.any_degenerate;
  res.degenerate_dirs = sw.degenerate_dirs;

  std::vector<SupAcc> acc(sw.levels());
  for (int level = 0; level < sw.levels(); ++level) {
    walk_level(sw, level,
               [&](const DirData& dd, const SymmetriserPolys& sym, double t,
                   const Eigen::VectorXd& xi, double delta, double zdist) {
                 const double psi = std::abs(sym.psi_at(t));
                 double quotient;
                 if (zdist >= kNearBase * sw.span) {
                   auto dt = sym.delta_tilde_at(t);
                   quotient = dt ? psi / *dt : 0.0;
                 } else {
                   const double z = z_function(dd.zeros, t);
                   quotient = z * z * psi / delta;
                 }
                 acc[level].feed(quotient, t, xi);
               });
  }
  finalize_check(res.cond, acc);
  return res;
}

// Lower-order row restricted to one homogeneity level: entries with
// |nu| = m - j - l contribute to b_{-l,j}; the full row is the sum over l.
Eigen::VectorXcd lower_level_row(const OperatorSpec& spec, double t, const Eigen::VectorXd& xi,
                                 int level) {
  const double br = bracket(xi);
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(spec.m);
  for (const auto& e : spec.lower) {
    if (e.j - 1 - multi_index_order(e.nu) != level) continue;
    b[spec.m - e.j] += e.coeff.eval(t) * xi_power(xi, e.nu) * std::pow(br, 1 - e.j);
  }
  return b;
}

LeviResult check_levi_impl(const Sweep& sw, LeviMode mode, int l_max) {
  const OperatorSpec& spec = *sw.spec;
  const int m = spec.m;
  if (mode == LeviMode::Real && spec.has_complex_lower()) {
    throw ValidationError("real Levi mode requires real lower-order coefficients");
  }
  if (mode == LeviMode::Graded && (l_max < 0 || l_max > m - 1)) {
    throw ValidationError("graded Levi mode needs l_max in 0..m-1");
  }

  LeviResult res;
  res.mode = mode;
  res.l_max = (mode == LeviMode::Graded) ? l_max : -1;
  res.degenerate_direction_found = sw.any_degenerate;
  res.constants = Eigen::MatrixXd::Zero(m, m);
  if (mode == LeviMode::Graded) res.residual_orders.assign(m - 1 - l_max, 0.0);

  std::vector<SupAcc> acc(sw.levels());
  for (int level = 0; level < sw.levels(); ++level) {
    Eigen::MatrixXd constants = Eigen::MatrixXd::Zero(m, m);
    std::vector<double> residuals(res.residual_orders.size(), 0.0);
    walk_level(sw, level,
               [&](const DirData&, const SymmetriserPolys& sym, double t,
                   const Eigen::VectorXd& xi, double delta, double) {
                 const Eigen::MatrixXd Q = sym.q_at(t);
                 std::vector<Eigen::VectorXcd> rows;
                 if (mode == LeviMode::Graded) {
                   for (int l = 0; l <= l_max; ++l) rows.push_back(lower_level_row(spec, t, xi, l));
                 } else {
                   rows.push_back(detail::eval_lower_row_any(spec, t, xi, t));
                 }
                 double point_sup = 0.0;
                 for (const auto& b : rows) {
                   for (int i = 0; i < m; ++i) {
                     for (int j = 0; j < m; ++j) {
                       const std::complex<double> dij =
                           Q(i, m - 1) * b[j] - std::conj(b[i]) * Q(j, m - 1);
                       const double q = std::abs(dij) / delta;
                       constants(i, j) = std::max(constants(i, j), q);
                       const bool counted = (mode == LeviMode::Real) ? (i < j) : true;
                       if (counted) point_sup = std::max(point_sup, q);
                     }
                   }
                 }
                 if (mode == LeviMode::Graded) {
                   const double br = bracket(xi);
                   for (std::size_t k = 0; k < residuals.size(); ++k) {
                     const int l = l_max + 1 + static_cast<int>(k);
                     const Eigen::VectorXcd bl = lower_level_row(spec, t, xi, l);
                     residuals[k] =
                         std::max(residuals[k], std::pow(br, l) * bl.cwiseAbs().maxCoeff());
                   }
                 }
                 acc[level].feed(point_sup, t, xi);
               });
    res.constants = constants;           // keep the finest level
    if (!residuals.empty()) res.residual_orders = residuals;
  }
  finalize_check(res.cond, acc);
  return res;
}

M2Equivalences m2_impl(const Sweep& sw) {
  const OperatorSpec& spec = *sw.spec;
  const int m = spec.m;
  if (m != 2) throw ValidationError("m2_equivalences requires m = 2");

  // Principal-row polynomials, their derivatives, and the characteristic
  // discriminant per (direction, magnitude).  The discriminant and the root
  // power sum are expanded at the coefficient level: pointwise evaluation of
  // a2(t)^2 + 4 a1(t) cancels catastrophically where the roots nearly
  // coincide, while the expanded polynomial evaluates with relative accuracy
  // down to the skip radius.
  struct RowPolys {
    Poly a1, a2, da1, da2, disc, sumsq;
  };
  std::vector<std::vector<RowPolys>> rp(sw.dirs.size());
  for (std::size_t di = 0; di < sw.dirs.size(); ++di) {
    rp[di].resize(sw.mags.size());
    if (sw.dirs[di].degenerate) continue;
    for (std::size_t mi = 0; mi < sw.mags.size(); ++mi) {
      auto a = principal_row_polys(spec, (sw.mags[mi] * sw.dirs[di].dir).eval());
      const Poly a2sq = a[1] * a[1];
      rp[di][mi] = {a[0],          a[1],         a[0].derivative(), a[1].derivative(),
                    a2sq + 4.0 * a[0], a2sq + 2.0 * a[0]};
    }
  }
  auto dir_index = [&](const DirData& dd) {
    for (std::size_t k = 0; k < sw.dirs.size(); ++k)
      if (&sw.dirs[k] == &dd) return k;
    throw NumericalError("direction lookup failed");
  };

  std::vector<SupAcc> a_gr(sw.levels()), a_i(sw.levels()), a_ii(sw.levels()),
      a_lc2(sw.levels()), a_lcb2(sw.levels());
  for (int level = 0; level < sw.levels(); ++level) {
    walk_level(sw, level,
               [&](const DirData& dd, const SymmetriserPolys& sym, double t,
                   const Eigen::VectorXd& xi, double delta, double zdist) {
                 // Check-function quotient, same policy as check_gr1m.
                 const double psi = std::abs(sym.psi_at(t));
                 if (zdist >= kNearBase * sw.span) {
                   auto dtl = sym.delta_tilde_at(t);
                   a_gr[level].feed(dtl ? psi / *dtl : 0.0, t, xi);
                 } else {
                   const double z = z_function(dd.zeros, t);
                   a_gr[level].feed(z * z * psi / delta, t, xi);
                 }

                 // Root-based conditions from the quadratic characteristic
                 // polynomial lambda^2 - a2 lambda - a1.
                 const std::size_t di = dir_index(dd);
                 std::size_t mi = 0;
                 while (mi + 1 < dd.sym.size() && dd.sym[mi].get() != &sym) ++mi;
                 const RowPolys& r = rp[di][mi];
                 const double a2v = r.a2(t);
                 const double da1v = r.da1(t), da2v = r.da2(t);
                 const double disc = r.disc(t);
                 if (disc > 0.0) {
                   const double sq = std::sqrt(disc);
                   const double dl1 = (da2v * 0.5 * (a2v - sq) + da1v) / (-sq);
                   const double dl2 = (da2v * 0.5 * (a2v + sq) + da1v) / sq;
                   a_i[level].feed(t * t * (dl1 * dl1 + dl2 * dl2) / disc, t, xi);
                   a_ii[level].feed(r.sumsq(t) / disc, t, xi);
                 }

                 // Lower-order conditions from Q and the b row.
                 const Eigen::MatrixXd Q = sym.q_at(t);
                 const Eigen::VectorXcd b = detail::eval_lower_row_any(spec, t, xi, t);
                 double lc2 = 0.0;
                 for (int j = 0; j < 2; ++j) {
                   if (Q(j, j) > 1e-300) lc2 = std::max(lc2, std::norm(b[j]) / Q(j, j));
                 }
                 a_lc2[level].feed(lc2, t, xi);
                 const std::complex<double> d12 = Q(0, 1) * b[1] - std::conj(b[0]) * Q(1, 1);
                 a_lcb2[level].feed(std::norm(d12) / delta, t, xi);
               });
  }

  M2Equivalences eq;
  finalize_check(eq.gr1m, a_gr);
  finalize_check(eq.cond_i, a_i);
  finalize_check(eq.cond_ii, a_ii);
  finalize_check(eq.lc2, a_lc2);
  finalize_check(eq.lcb2, a_lcb2);
  eq.psi_verdicts_agree =
      (eq.gr1m.holds == eq.cond_i.holds) && (eq.cond_i.holds == eq.cond_ii.holds);
  eq.levi_verdicts_agree = (eq.lc2.holds == eq.lcb2.holds);
  return eq;
}

}  // namespace

Gr1mResult check_gr1m(const OperatorSpec& spec, const GridSpec& grid) {
  return check_gr1m_impl(build_sweep(spec, grid));
}

LeviResult check_levi(const OperatorSpec& spec, const GridSpec& grid, LeviMode mode, int l_max) {
  return check_levi_impl(build_sweep(spec, grid), mode, l_max);
}

M2Equivalences m2_equivalences(const OperatorSpec& spec, const GridSpec& grid) {
  return m2_impl(build_sweep(spec, grid));
}

AnalysisReport analyze(const OperatorSpec& spec, const GridSpec& grid) {
  spec.validate();
  AnalysisReport report;
  report.m = spec.m;
  report.grid = grid;
  report.lower_regularity = spec.has_piecewise_lower() ? "piecewise" : "analytic";

  Sweep sw = build_sweep(spec, grid);

  // Classification sweep: all directions, three representative magnitudes,
  // base time resolution plus the zeros of Delta (degeneracies sit on a
  // measure-zero set a uniform grid would miss).
  std::vector<std::size_t> mag_picks = {0, sw.mags.size() / 2, sw.mags.size() - 2};
  int min_r = spec.m + 1;
  bool found_bad = false;
  Witness worst;
  Classification worst_class;
  for (const auto& dd : sw.dirs) {
    std::vector<double> t_samples;
    t_samples.reserve(static_cast<std::size_t>(grid.t_nodes) + dd.zeros.size());
    for (int k = 0; k < grid.t_nodes; ++k) {
      t_samples.push_back(sw.a + sw.span * k / (grid.t_nodes - 1));
    }
    t_samples.insert(t_samples.end(), dd.zeros.begin(), dd.zeros.end());
    for (std::size_t mi : mag_picks) {
      const Eigen::VectorXd xi = sw.mags[mi] * dd.dir;
      for (double t : t_samples) {
        Classification c = classify_hyperbolicity(spec, t, xi);
        const bool bad = (c.kind == Hyperbolicity::NotHyperbolic);
        if ((bad && !found_bad) || (!found_bad && c.distinct_roots < min_r)) {
          worst = {t, xi, static_cast<double>(c.distinct_roots)};
          worst_class = c;
        }
        if (bad) found_bad = true;
        min_r = std::min(min_r, c.distinct_roots);
      }
    }
  }
  report.classification = worst_class;
  report.classification_witness = worst;

  if (report.classification.kind != Hyperbolicity::NotHyperbolic) {
    report.gr1m = check_gr1m_impl(sw);
    report.levi = check_levi_impl(sw, LeviMode::Complex, -1);
    if (spec.m == 2) report.m2 = m2_impl(sw);
  }

  // Constants for the energy envelopes: sup of lambda_max(Q) and of the
  // Frobenius norms of A and B over a coarse grid.
  constexpr int kConstNodes = 128;
  for (const auto& dd : sw.dirs) {
    for (std::size_t mi = 0; mi + 1 < sw.mags.size(); ++mi) {
      const Eigen::VectorXd xi = sw.mags[mi] * dd.dir;
      const SymmetriserPolys& sym = *dd.sym[mi];
      for (int k = 0; k <= kConstNodes; ++k) {
        const double t = sw.a + sw.span * k / kConstNodes;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> saes(sym.q_at(t),
                                                            Eigen::EigenvaluesOnly);
        report.c0 = std::max(report.c0, saes.eigenvalues().maxCoeff());
        SymbolFrame f = build_frame(spec, t, xi);
        report.c_A = std::max(report.c_A, f.A.norm());
        report.c_B = std::max(report.c_B, f.B.norm());
      }
    }
  }
  return report;
}

namespace {

nlohmann::json witness_json(const Witness& w) {
  nlohmann::json j;
  j["t"] = w.t;
  j["xi"] = std::vector<double>(w.xi.data(), w.xi.data() + w.xi.size());
  j["value"] = w.value;
  return j;
}

nlohmann::json check_json(const ConditionCheck& c) {
  nlohmann::json j;
  j["sup"] = c.sup;
  j["sup_by_level"] = c.sup_by_level;
  j["holds"] = c.holds;
  j["finite"] = c.finite;
  j["witness"] = witness_json(c.worst);
  return j;
}

}  // namespace

nlohmann::json report_to_json(const AnalysisReport& r) {
  nlohmann::json j;
  j["m"] = r.m;
  j["hyperbolicity"] = to_string(r.classification.kind);
  j["distinct_roots"] = r.classification.distinct_roots;
  j["pattern_consistent"] = r.classification.pattern_consistent;
  {
    nlohmann::json roots = nlohmann::json::array();
    for (const auto& z : r.classification.roots) roots.push_back({z.real(), z.imag()});
    j["roots_at_witness"] = roots;
  }
  j["classification_witness"] = witness_json(r.classification_witness);
  j["C1_estimate"] = r.gr1m.cond.sup;
  j["gr1m"] = check_json(r.gr1m.cond);
  {
    nlohmann::json dd = nlohmann::json::array();
    for (const auto& d : r.gr1m.degenerate_dirs)
      dd.push_back(std::vector<double>(d.data(), d.data() + d.size()));
    j["gr1m"]["degenerate_directions"] = dd;
  }
  j["levi"] = check_json(r.levi.cond);
  {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < r.levi.constants.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < r.levi.constants.cols(); ++c)
        row.push_back(r.levi.constants(i, c));
      rows.push_back(row);
    }
    j["levi_constants"] = rows;
  }
  if (!r.levi.residual_orders.empty()) j["levi"]["residual_orders"] = r.levi.residual_orders;
  j["verdicts"] = {{"gr1m_holds", r.gr1m.cond.holds},
                   {"levi_holds", r.levi.cond.holds},
                   {"degenerate_direction_found",
                    r.gr1m.degenerate_direction_found || r.levi.degenerate_direction_found}};
  if (r.m2) {
    const auto& eq = *r.m2;
    j["m2_equivalences"] = {{"gr1m", check_json(eq.gr1m)},
                            {"cond_i", check_json(eq.cond_i)},
                            {"cond_ii", check_json(eq.cond_ii)},
                            {"lc2", check_json(eq.lc2)},
                            {"lcb2", check_json(eq.lcb2)},
                            {"psi_verdicts_agree", eq.psi_verdicts_agree},
                            {"levi_verdicts_agree", eq.levi_verdicts_agree}};
  }
  j["constants"] = {{"c0", r.c0}, {"c_A", r.c_A}, {"c_B", r.c_B}};
  j["lower_regularity"] = r.lower_regularity;
  j["grid"] = {{"t_nodes", r.grid.t_nodes},
               {"xi_decades", r.grid.xi_decades},
               {"directions", r.grid.directions},
               {"refinements", r.grid.refinements}};
  return j;
}

EnvelopeConstants envelope_constants(const AnalysisReport& report) {
  EnvelopeConstants ec;
  ec.m = report.m;
  ec.C1 = std::isfinite(report.gr1m.cond.sup) ? report.gr1m.cond.sup : 0.0;
  ec.c_levi = report.levi.constants.size() > 0 ? report.levi.constants.maxCoeff() : 0.0;
  if (!std::isfinite(ec.c_levi)) ec.c_levi = 0.0;
  ec.c0 = std::max(report.c0, 1e-30);
  return ec;
}

}  // namespace hypan
