// End-to-end checks of the command line tool: exit codes, artifact files,
// and determinism of repeated runs.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <string>

using json = nlohmann::json;
using testsup::fixture;
using testsup::run_cli;
using testsup::slurp;
using testsup::tmp_dir;

TEST_CASE("help and argument errors") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("").exit_code == 2);                       // missing subcommand
  CHECK(run_cli("analyze").exit_code == 2);                // missing operator file
  CHECK(run_cli("analyze /nonexistent.json").exit_code == 2);
  CHECK(run_cli("frobnicate x.json").exit_code == 2);
}

TEST_CASE("analyze: artifacts, verdict content, determinism") {
  const std::string out = tmp_dir("cli_analyze");
  const std::string cmd = "analyze " + fixture("wave.json") + " --out-dir " + out;
  const auto r1 = run_cli(cmd);
  CHECK(r1.exit_code == 0);

  const std::string path = out + "/analyze.json";
  const std::string first = slurp(path);
  REQUIRE(!first.empty());
  const json j = json::parse(first);
  CHECK(j.contains("version"));
  CHECK(j.contains("config"));
  CHECK(j["report"]["hyperbolicity"] == "strict");
  CHECK(j["report"]["gr1m"]["holds"] == true);
  CHECK(j["report"]["levi"]["holds"] == true);
  CHECK(j["report"]["m"] == 2);
  CHECK(j["report"]["lower_regularity"] == "analytic");

  // Re-running with identical arguments reproduces the artifact bytes.
  const auto r2 = run_cli(cmd);
  CHECK(r2.exit_code == 0);
  CHECK(slurp(path) == first);
}

TEST_CASE("analyze: non-hyperbolic operators exit with the validation code") {
  const std::string out = tmp_dir("cli_analyze_ell");
  const auto r = run_cli("analyze " + fixture("elliptic.json") + " --out-dir " + out);
  CHECK(r.exit_code == 2);
}

TEST_CASE("levi subcommand") {
  const std::string out = tmp_dir("cli_levi");
  const auto r =
      run_cli("levi " + fixture("t2_levi_ok.json") + " --out-dir " + out);
  CHECK(r.exit_code == 0);
  const json j = json::parse(slurp(out + "/levi.json"));
  CHECK(j["levi"]["mode"] == "complex");
  CHECK(j["levi"]["cond"]["holds"] == true);
  CHECK(std::abs(j["levi"]["cond"]["sup"].get<double>() - std::sqrt(0.5)) < 1e-6);

  const auto bad = run_cli("levi " + fixture("m2_complex_lower.json") + " --mode real --out-dir " +
                           tmp_dir("cli_levi_bad"));
  CHECK(bad.exit_code == 2);

  const auto graded = run_cli("levi " + fixture("m2_complex_lower.json") +
                              " --mode graded --lmax 0 --out-dir " + tmp_dir("cli_levi_graded"));
  CHECK(graded.exit_code == 0);
}

TEST_CASE("partition subcommand") {
  const std::string out = tmp_dir("cli_partition");
  const auto r = run_cli("partition " + fixture("t2.json") + " --out-dir " + out);
  CHECK(r.exit_code == 0);
  const json j = json::parse(slurp(out + "/partition.json"));
  CHECK(j["fit"]["q"] == 1);
  CHECK(std::abs(j["fit"]["slope"].get<double>() - 2.0) < 0.1);
  CHECK(j["samples"].size() == 3);

  const std::string csv = slurp(out + "/partition.csv");
  CHECK(csv.find("eps,p,measure,min_delta_rel,log_integral") != std::string::npos);
  CHECK(csv.find("# hypan ") != std::string::npos);

  const auto dg = run_cli("partition " + fixture("degenerate.json") + " --out-dir " +
                          tmp_dir("cli_partition_dg"));
  CHECK(dg.exit_code == 2);
}

TEST_CASE("scan subcommand verdicts") {
  const std::string out_ok = tmp_dir("cli_scan_ok");
  const auto ok = run_cli("scan " + fixture("t2_levi_ok.json") + " --xi 16..1024 --out-dir " +
                          out_ok);
  CHECK(ok.exit_code == 0);
  const json jok = json::parse(slurp(out_ok + "/scan.json"));
  CHECK(jok["scan"]["verdict"] == "polynomial");
  CHECK(jok["scan"]["magnitudes"].size() == 7);

  const std::string out_bad = tmp_dir("cli_scan_bad");
  const auto bad = run_cli("scan " + fixture("t4_levi_fail.json") + " --xi 16..1024 --out-dir " +
                           out_bad);
  CHECK(bad.exit_code == 0);
  const json jbad = json::parse(slurp(out_bad + "/scan.json"));
  CHECK(jbad["scan"]["verdict"] == "superpolynomial");

  CHECK(run_cli("scan " + fixture("wave.json") + " --xi nonsense --out-dir " +
                tmp_dir("cli_scan_e1"))
            .exit_code == 2);
  CHECK(run_cli("scan " + fixture("wave.json") + " --xi 16..32 --out-dir " +
                tmp_dir("cli_scan_e2"))
            .exit_code == 2);  // fewer than six magnitudes
}

TEST_CASE("trace subcommand") {
  const std::string out = tmp_dir("cli_trace");
  const auto r = run_cli("trace " + fixture("t2_levi_ok.json") + " --xi 64 --out-dir " + out);
  CHECK(r.exit_code == 0);
  const json j = json::parse(slurp(out + "/trace.json"));
  CHECK(j["trace"]["envelopes"] == true);
  CHECK(j["trace"]["sup_slack"].get<double>() <= 1.0 + 1e-6);
  CHECK(j["trace"]["excluded_intervals"].get<int>() >= 1);
  const std::string csv = slurp(out + "/trace.csv");
  CHECK(csv.find("t,region,abs_v,e_kov,e_hyp,bound_slack") != std::string::npos);

  CHECK(run_cli("trace " + fixture("t2_levi_ok.json") + " --xi -3 --out-dir " +
                tmp_dir("cli_trace_e"))
            .exit_code == 2);
}

TEST_CASE("solve subcommand") {
  const std::string out = tmp_dir("cli_solve");
  const std::string data_path = tmp_dir("cli_solve_data") + "/sine.csv";
  {
    std::ofstream csv(data_path);
    const int N = 64;
    for (int j = 0; j < N; ++j) {
      const double x = 2.0 * 3.14159265358979323846 * j / N;
      csv << std::sin(x) << ",0\n";
    }
  }
  const auto r = run_cli("solve " + fixture("wave.json") + " --data " + data_path +
                         " --t-out 0.5,1.0 --out-dir " + out);
  CHECK(r.exit_code == 0);
  const json j = json::parse(slurp(out + "/solve.json"));
  CHECK(j["solve"]["N"] == 64);
  CHECK(j["solve"]["times"].size() == 2);
  const std::string csv0 = slurp(out + "/solve_0.csv");
  CHECK(csv0.find("x,re_u,im_u,re_dtu1,im_dtu1") != std::string::npos);
  CHECK(!slurp(out + "/solve_1.csv").empty());

  // Missing data file is a parse-level failure.
  CHECK(run_cli("solve " + fixture("wave.json") + " --data /no/such.csv --t-out 0.5 --out-dir " +
                tmp_dir("cli_solve_e"))
            .exit_code == 2);
}

TEST_CASE("solve: runaway exponential growth aborts with the numerical code") {
  // A strongly elliptic operator grows modes like exp(10 |w| t); with a
  // wavenumber-100 profile the overflow guard must fire and surface as the
  // dedicated exit code.
  const std::string dir = tmp_dir("cli_solve_overflow");
  const std::string op_path = dir + "/elliptic_fast.json";
  {
    std::ofstream op(op_path);
    op << R"({"m":2,"n":1,"interval":[-1.0,2.0],"work":[0.0,1.0],"t0":0.0,)"
       << R"("principal":[{"nu":[2],"j":2,"poly":[-100.0]}]})";
  }
  const std::string data_path = dir + "/mode100.csv";
  {
    std::ofstream csv(data_path);
    const int N = 256;
    for (int j = 0; j < N; ++j) {
      const double x = 2.0 * 3.14159265358979323846 * j / N;
      csv << std::cos(100.0 * x) << ",0\n";
    }
  }
  const auto r = run_cli("solve " + op_path + " --data " + data_path +
                         " --t-out 1.0 --out-dir " + dir);
  CHECK(r.exit_code == 3);
}

TEST_CASE("dump subcommand") {
  const std::string out = tmp_dir("cli_dump");
  const auto r = run_cli("dump " + fixture("t2.json") + " --out-dir " + out);
  CHECK(r.exit_code == 0);
  const json j = json::parse(slurp(out + "/dump.json"));
  CHECK(j.contains("operator"));
  CHECK(j.contains("symbol"));
  CHECK(j["breakpoints"].empty());
  REQUIRE(j["symbol"].contains("delta_zeros"));
  REQUIRE(j["symbol"]["delta_zeros"].size() == 1);
  CHECK(std::abs(j["symbol"]["delta_zeros"][0].get<double>()) < 1e-9);

  const std::string out_pw = tmp_dir("cli_dump_pw");
  const auto rpw = run_cli("dump " + fixture("wave_piecewise.json") + " --out-dir " + out_pw);
  CHECK(rpw.exit_code == 0);
  const json jpw = json::parse(slurp(out_pw + "/dump.json"));
  REQUIRE(jpw["breakpoints"].size() == 1);
  CHECK(jpw["breakpoints"][0].get<double>() == doctest::Approx(0.5));
}
