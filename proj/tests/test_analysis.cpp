#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hypan/analysis.hpp>
#include <hypan/operator_spec.hpp>

#include "test_support.hpp"

#include <algorithm>
#include <random>
#include <set>

using hypan::GridSpec;
using hypan::Hyperbolicity;
using hypan::OperatorSpec;
using testsup::fixture;

namespace {

Eigen::VectorXd dir1(double xi) {
  Eigen::VectorXd v(1);
  v << xi;
  return v;
}

}  // namespace

TEST_CASE("pointwise classification by the minor sign pattern") {
  const OperatorSpec wave = OperatorSpec::load(fixture("wave.json"));
  const auto cw = hypan::classify_hyperbolicity(wave, 0.5, dir1(8.0));
  CHECK(cw.kind == Hyperbolicity::Strict);
  CHECK(cw.distinct_roots == 2);
  CHECK(cw.pattern_consistent);
  REQUIRE(cw.roots.size() == 2);
  const double s = 8.0 / std::sqrt(65.0);
  CHECK(cw.roots[0].real() == doctest::Approx(-s).epsilon(1e-9));
  CHECK(cw.roots[1].real() == doctest::Approx(s).epsilon(1e-9));

  const OperatorSpec t2 = OperatorSpec::load(fixture("t2.json"));
  const auto deg = hypan::classify_hyperbolicity(t2, 0.0, dir1(8.0));
  CHECK(deg.kind == Hyperbolicity::Weak);
  CHECK(deg.distinct_roots == 1);
  const auto away = hypan::classify_hyperbolicity(t2, 0.5, dir1(8.0));
  CHECK(away.kind == Hyperbolicity::Strict);
  CHECK(away.distinct_roots == 2);

  const OperatorSpec m3 = OperatorSpec::load(fixture("m3_triple.json"));
  const auto triple = hypan::classify_hyperbolicity(m3, 0.0, dir1(8.0));
  CHECK(triple.kind == Hyperbolicity::Weak);
  CHECK(triple.distinct_roots == 1);
  const auto split = hypan::classify_hyperbolicity(m3, 0.5, dir1(8.0));
  CHECK(split.kind == Hyperbolicity::Strict);
  CHECK(split.distinct_roots == 3);

  const OperatorSpec ell = OperatorSpec::load(fixture("elliptic.json"));
  CHECK(hypan::classify_hyperbolicity(ell, 0.3, dir1(8.0)).kind ==
        Hyperbolicity::NotHyperbolic);

  // Permanent double root: weak with one distinct root, pattern consistent.
  const OperatorSpec dg = OperatorSpec::load(fixture("degenerate.json"));
  const auto ddg = hypan::classify_hyperbolicity(dg, 0.7, dir1(8.0));
  CHECK(ddg.kind == Hyperbolicity::Weak);
  CHECK(ddg.distinct_roots == 1);
  CHECK(ddg.pattern_consistent);
}

TEST_CASE("minor pattern agrees with prescribed root clustering") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> tdist(-0.9, 0.9);
  std::uniform_real_distribution<double> gap_dist(0.8, 1.3);
  std::uniform_real_distribution<double> wiggle(-0.05, 0.05);
  const std::vector<std::vector<int>> patterns = {
      {1, 1}, {2}, {1, 1, 1}, {2, 1}, {3}, {1, 1, 1, 1}, {2, 2}, {3, 1}};
  for (const auto& pat : patterns) {
    for (int trial = 0; trial < 5; ++trial) {
      // Clusters stay >= 0.5 apart for every |t| <= 0.95 (base gaps >= 0.8,
      // per-cluster wiggle <= 0.15), so the expected count is unambiguous;
      // coinciding roots share the identical polynomial.
      std::vector<hypan::Poly> roots;
      double base = -2.0 + 0.3 * tdist(rng);
      for (int mult : pat) {
        const hypan::Poly r{base, wiggle(rng), wiggle(rng)};
        for (int i = 0; i < mult; ++i) roots.push_back(r);
        base += gap_dist(rng);
      }
      const OperatorSpec spec = testsup::spec_from_root_polys(roots);
      const int expected = static_cast<int>(pat.size());
      for (int s = 0; s < 4; ++s) {
        const double t = tdist(rng);
        const auto cls = hypan::classify_hyperbolicity(spec, t, dir1(16.0));
        CHECK(cls.kind != Hyperbolicity::NotHyperbolic);
        CHECK(cls.distinct_roots == expected);
        CHECK(cls.pattern_consistent);
      }
    }
  }
}

TEST_CASE("check-function condition holds with zero constant for constant symbols") {
  const OperatorSpec wave = OperatorSpec::load(fixture("wave.json"));
  const auto res = hypan::check_gr1m(wave, GridSpec{});
  CHECK(res.cond.holds);
  CHECK(res.cond.finite);
  CHECK(res.cond.sup == doctest::Approx(0.0));
  CHECK_FALSE(res.degenerate_direction_found);
}

TEST_CASE("check-function condition: bounded quotients on benign degeneracies") {
  const OperatorSpec t2 = OperatorSpec::load(fixture("t2.json"));
  const auto r2 = hypan::check_gr1m(t2, GridSpec{});
  CHECK(r2.cond.holds);
  CHECK(r2.cond.sup == doctest::Approx(0.0).epsilon(1e-12));

  const OperatorSpec m3 = OperatorSpec::load(fixture("m3_triple.json"));
  const auto r3 = hypan::check_gr1m(m3, GridSpec{});
  CHECK(r3.cond.holds);
  CHECK(r3.cond.sup == doctest::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("check-function condition fails by unbounded refinement growth") {
  // Roots t and t + t^3 violate the condition; the sup must keep growing as
  // the grid refines, and the verdict must be negative while staying finite.
  const OperatorSpec px4 = OperatorSpec::load(fixture("px4.json"));
  const auto res = hypan::check_gr1m(px4, GridSpec{});
  CHECK_FALSE(res.cond.holds);
  CHECK(res.cond.finite);
  REQUIRE(res.cond.sup_by_level.size() >= 2);
  for (std::size_t k = 1; k < res.cond.sup_by_level.size(); ++k)
    CHECK(res.cond.sup_by_level[k] > 4.0 * res.cond.sup_by_level[k - 1]);
}

TEST_CASE("degenerate directions are reported by the grid checks") {
  const OperatorSpec dg = OperatorSpec::load(fixture("degenerate.json"));
  const auto res = hypan::check_gr1m(dg, GridSpec{});
  CHECK(res.degenerate_direction_found);
  CHECK_FALSE(res.degenerate_dirs.empty());
}

TEST_CASE("lower-order conditions in the complex quotient family") {
  const OperatorSpec ok = OperatorSpec::load(fixture("t2_levi_ok.json"));
  const auto good = hypan::check_levi(ok, GridSpec{});
  CHECK(good.cond.holds);
  CHECK(good.cond.sup == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
  CHECK(good.mode == hypan::LeviMode::Complex);
  CHECK(good.constants.rows() == 2);

  const OperatorSpec bad = OperatorSpec::load(fixture("t4_levi_fail.json"));
  const auto fail = hypan::check_levi(bad, GridSpec{});
  CHECK_FALSE(fail.cond.holds);
  REQUIRE(fail.cond.sup_by_level.size() >= 2);
  CHECK(fail.cond.sup_by_level.back() >
        2.0 * fail.cond.sup_by_level[fail.cond.sup_by_level.size() - 2]);

  // No lower-order terms: the condition is vacuous.
  const OperatorSpec wave = OperatorSpec::load(fixture("wave.json"));
  const auto none = hypan::check_levi(wave, GridSpec{});
  CHECK(none.cond.holds);
  CHECK(none.cond.sup == doctest::Approx(0.0));
}

TEST_CASE("real and graded quotient families") {
  const OperatorSpec cplx = OperatorSpec::load(fixture("m2_complex_lower.json"));
  CHECK_THROWS_AS(hypan::check_levi(cplx, GridSpec{}, hypan::LeviMode::Real),
                  hypan::ValidationError);

  const OperatorSpec real = OperatorSpec::load(fixture("m2_real_lower.json"));
  const auto rres = hypan::check_levi(real, GridSpec{}, hypan::LeviMode::Real);
  CHECK(rres.mode == hypan::LeviMode::Real);
  CHECK(rres.cond.holds);
  CHECK(rres.cond.sup == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));

  // Graded: with the zeroth-order term outside the checked levels it shows
  // up as a residual; including its level empties the residual list.
  const auto g0 = hypan::check_levi(cplx, GridSpec{}, hypan::LeviMode::Graded, 0);
  CHECK(g0.l_max == 0);
  REQUIRE(g0.residual_orders.size() == 1);
  CHECK(g0.residual_orders[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-2));
  const auto g1 = hypan::check_levi(cplx, GridSpec{}, hypan::LeviMode::Graded, 1);
  CHECK(g1.residual_orders.empty());

  CHECK_THROWS_AS(hypan::check_levi(cplx, GridSpec{}, hypan::LeviMode::Graded, -1),
                  hypan::ValidationError);
  CHECK_THROWS_AS(hypan::check_levi(cplx, GridSpec{}, hypan::LeviMode::Graded, 2),
                  hypan::ValidationError);
}

TEST_CASE("order-two condition families give matching verdicts") {
  // Fixtures straddling the boundary of condition (ii): the first three
  // satisfy it, the last two violate it.  All five families must agree.
  const char* satisfying[] = {"px1.json", "px2.json", "px3.json"};
  const char* violating[] = {"px4.json", "px5.json"};
  for (const char* name : satisfying) {
    const auto eq = hypan::m2_equivalences(OperatorSpec::load(fixture(name)), GridSpec{});
    CHECK(eq.gr1m.holds);
    CHECK(eq.cond_i.holds);
    CHECK(eq.cond_ii.holds);
    CHECK(eq.psi_verdicts_agree);
    CHECK(eq.levi_verdicts_agree);
  }
  for (const char* name : violating) {
    const auto eq = hypan::m2_equivalences(OperatorSpec::load(fixture(name)), GridSpec{});
    CHECK_FALSE(eq.gr1m.holds);
    CHECK_FALSE(eq.cond_i.holds);
    CHECK_FALSE(eq.cond_ii.holds);
    CHECK(eq.psi_verdicts_agree);
    CHECK(eq.levi_verdicts_agree);
  }
  // Only defined for order two.
  const OperatorSpec m3 = OperatorSpec::load(fixture("m3_triple.json"));
  CHECK_THROWS_AS(hypan::m2_equivalences(m3, GridSpec{}), hypan::ValidationError);
}

TEST_CASE("full analysis report") {
  const OperatorSpec wave = OperatorSpec::load(fixture("wave.json"));
  const auto rep = hypan::analyze(wave);
  CHECK(rep.m == 2);
  CHECK(rep.classification.kind == Hyperbolicity::Strict);
  CHECK(rep.C1_estimate() == doctest::Approx(0.0));
  CHECK(rep.levi.cond.holds);
  CHECK(rep.m2.has_value());
  CHECK(rep.lower_regularity == "analytic");
  CHECK(rep.c0 == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(rep.c_B == doctest::Approx(0.0));
  CHECK(rep.c_A > 1.0);

  const auto env = hypan::envelope_constants(rep);
  CHECK(env.m == 2);
  CHECK(env.C1 == doctest::Approx(0.0));
  CHECK(env.log_coeff() == doctest::Approx(1.5));
  CHECK(env.rate() == doctest::Approx(0.0));
  CHECK(env.elot_c() == doctest::Approx(1.5));

  const auto j = hypan::report_to_json(rep);
  CHECK(j.contains("hyperbolicity"));
  CHECK(j.contains("gr1m"));
  CHECK(j.contains("levi"));
  CHECK(j.contains("m2_equivalences"));
  CHECK(j["hyperbolicity"] == "strict");

  const OperatorSpec pw = OperatorSpec::load(fixture("wave_piecewise.json"));
  const auto rep_pw = hypan::analyze(pw);
  CHECK(rep_pw.lower_regularity == "piecewise");
  CHECK(rep_pw.classification.kind == Hyperbolicity::Strict);

  const OperatorSpec ell = OperatorSpec::load(fixture("elliptic.json"));
  CHECK(hypan::analyze(ell).classification.kind == Hyperbolicity::NotHyperbolic);

  const OperatorSpec m3 = OperatorSpec::load(fixture("m3_triple.json"));
  const auto rep3 = hypan::analyze(m3);
  CHECK(rep3.classification.kind == Hyperbolicity::Weak);
  CHECK_FALSE(rep3.m2.has_value());
  CHECK(rep3.C1_estimate() == doctest::Approx(6.0).epsilon(1e-9));
}
