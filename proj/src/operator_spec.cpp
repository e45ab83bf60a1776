#include "hypan/operator_spec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace hypan {

namespace {

std::string key_str(const MultiIndex& nu, int j) {
  std::ostringstream os;
  os << "(nu=[";
  for (std::size_t k = 0; k < nu.size(); ++k) os << (k ? "," : "") << nu[k];
  os << "], j=" << j << ")";
  return os.str();
}

}  // namespace

void OperatorSpec::validate() const {
  if (m < 1 || m > 6) throw ValidationError("operator order m must be in 1..6");
  if (n < 1) throw ValidationError("space dimension n must be >= 1");
  if (!(interval_lo < work_lo && work_lo < work_hi && work_hi < interval_hi)) {
    throw ValidationError(
        "working window [a,b] must sit strictly inside the open coefficient interval");
  }
  if (!(t0 >= work_lo && t0 <= work_hi)) throw ValidationError("t0 must lie in [a,b]");

  std::set<std::pair<std::vector<int>, int>> seen;
  for (const auto& e : principal) {
    if (static_cast<int>(e.nu.size()) != n)
      throw ValidationError("principal entry " + key_str(e.nu, e.j) + ": nu must have length n");
    for (int v : e.nu)
      if (v < 0) throw ValidationError("multi-index components must be nonnegative");
    if (e.j < 1 || e.j > m)
      throw ValidationError("principal entry " + key_str(e.nu, e.j) + ": j out of range 1..m");
    if (multi_index_order(e.nu) != e.j) {
      throw ValidationError("principal entry " + key_str(e.nu, e.j) +
                            ": principal part requires |nu| == j");
    }
    if (!seen.insert({e.nu, e.j}).second)
      throw ValidationError("duplicate principal entry " + key_str(e.nu, e.j));
  }

  seen.clear();
  for (const auto& e : lower) {
    if (static_cast<int>(e.nu.size()) != n)
      throw ValidationError("lower entry " + key_str(e.nu, e.j) + ": nu must have length n");
    for (int v : e.nu)
      if (v < 0) throw ValidationError("multi-index components must be nonnegative");
    if (e.j < 1 || e.j > m)
      throw ValidationError("lower entry " + key_str(e.nu, e.j) + ": j out of range 1..m");
    if (multi_index_order(e.nu) >= e.j) {
      throw ValidationError("lower entry " + key_str(e.nu, e.j) +
                            ": lower-order part requires |nu| < j");
    }
    if (!seen.insert({e.nu, e.j}).second)
      throw ValidationError("duplicate lower entry " + key_str(e.nu, e.j));
    if (e.coeff.pieces.empty())
      throw ValidationError("lower entry " + key_str(e.nu, e.j) + ": empty coefficient");
    for (std::size_t k = 0; k < e.coeff.pieces.size(); ++k) {
      const auto& p = e.coeff.pieces[k];
      if (!(p.lo < p.hi))
        throw ValidationError("lower entry " + key_str(e.nu, e.j) + ": empty piece span");
      if (k + 1 < e.coeff.pieces.size() &&
          std::abs(p.hi - e.coeff.pieces[k + 1].lo) > 1e-14 * std::max(1.0, std::abs(p.hi))) {
        throw ValidationError("lower entry " + key_str(e.nu, e.j) +
                              ": pieces must be contiguous");
      }
    }
    if (e.coeff.pieces.front().lo > work_lo || e.coeff.pieces.back().hi < work_hi) {
      throw ValidationError("lower entry " + key_str(e.nu, e.j) +
                            ": pieces must cover the working window");
    }
  }
}

bool OperatorSpec::has_piecewise_lower() const {
  for (const auto& e : lower)
    if (!e.coeff.single_piece()) return true;
  return false;
}

bool OperatorSpec::has_complex_lower() const {
  for (const auto& e : lower)
    for (const auto& p : e.coeff.pieces)
      for (const auto& c : p.poly.coeffs())
        if (c.imag() != 0.0) return true;
  return false;
}

std::vector<double> OperatorSpec::breakpoints() const {
  std::vector<double> b;
  for (const auto& e : lower) {
    for (double t : e.coeff.interior_breakpoints()) {
      if (t > work_lo && t < work_hi) b.push_back(t);
    }
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

namespace {

using nlohmann::json;

double parse_real(const json& v, const char* where) {
  if (!v.is_number()) throw ValidationError(std::string(where) + ": expected a real number");
  return v.get<double>();
}

std::complex<double> parse_scalar(const json& v, const char* where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ValidationError(std::string(where) + ": expected a number or an [re, im] pair");
}

CPoly parse_cpoly(const json& v, const char* where) {
  if (!v.is_array()) throw ValidationError(std::string(where) + ": expected a coefficient list");
  std::vector<std::complex<double>> c;
  for (const auto& item : v) c.push_back(parse_scalar(item, where));
  return CPoly(std::move(c));
}

MultiIndex parse_nu(const json& v) {
  if (!v.is_array()) throw ValidationError("nu: expected an integer list");
  MultiIndex nu;
  for (const auto& item : v) {
    if (!item.is_number_integer()) throw ValidationError("nu: expected integers");
    nu.push_back(item.get<int>());
  }
  return nu;
}

}  // namespace

OperatorSpec OperatorSpec::from_json(const nlohmann::json& j) {
  for (const char* field : {"m", "n", "interval", "work", "t0", "principal"}) {
    if (!j.contains(field))
      throw ValidationError(std::string("operator file missing field \"") + field + "\"");
  }
  OperatorSpec s;
  if (!j["m"].is_number_integer() || !j["n"].is_number_integer())
    throw ValidationError("m and n must be integers");
  s.m = j["m"].get<int>();
  s.n = j["n"].get<int>();
  if (!j["interval"].is_array() || j["interval"].size() != 2)
    throw ValidationError("interval: expected [lo, hi]");
  s.interval_lo = parse_real(j["interval"][0], "interval");
  s.interval_hi = parse_real(j["interval"][1], "interval");
  if (!j["work"].is_array() || j["work"].size() != 2)
    throw ValidationError("work: expected [a, b]");
  s.work_lo = parse_real(j["work"][0], "work");
  s.work_hi = parse_real(j["work"][1], "work");
  s.t0 = parse_real(j["t0"], "t0");

  for (const auto& e : j["principal"]) {
    if (e.contains("pieces")) {
      throw ValidationError(
          "principal coefficients must be single polynomials (analytic in t); "
          "piecewise definitions are allowed only in \"lower\"");
    }
    if (!e.contains("nu") || !e.contains("j") || !e.contains("poly"))
      throw ValidationError("principal entry: need nu, j, poly");
    PrincipalEntry pe;
    pe.nu = parse_nu(e["nu"]);
    pe.j = e["j"].get<int>();
    if (!e["poly"].is_array()) throw ValidationError("principal poly: expected a list");
    std::vector<double> c;
    for (const auto& item : e["poly"]) {
      if (!item.is_number()) {
        throw ValidationError("principal coefficients must be real numbers");
      }
      c.push_back(item.get<double>());
    }
    pe.poly = Poly(std::move(c));
    s.principal.push_back(std::move(pe));
  }

  if (j.contains("lower")) {
    for (const auto& e : j["lower"]) {
      if (!e.contains("nu") || !e.contains("j"))
        throw ValidationError("lower entry: need nu, j and poly or pieces");
      LowerEntry le;
      le.nu = parse_nu(e["nu"]);
      le.j = e["j"].get<int>();
      if (e.contains("poly") == e.contains("pieces"))
        throw ValidationError("lower entry: exactly one of poly / pieces");
      if (e.contains("poly")) {
        PiecewisePoly::Piece p;
        p.lo = s.interval_lo;
        p.hi = s.interval_hi;
        p.poly = parse_cpoly(e["poly"], "lower poly");
        le.coeff.pieces.push_back(std::move(p));
      } else {
        for (const auto& pj : e["pieces"]) {
          if (!pj.contains("span") || !pj.contains("poly") || !pj["span"].is_array() ||
              pj["span"].size() != 2) {
            throw ValidationError("lower piece: expected {\"span\":[lo,hi], \"poly\":[...]}");
          }
          PiecewisePoly::Piece p;
          p.lo = parse_real(pj["span"][0], "piece span");
          p.hi = parse_real(pj["span"][1], "piece span");
          p.poly = parse_cpoly(pj["poly"], "lower piece poly");
          le.coeff.pieces.push_back(std::move(p));
        }
        std::sort(le.coeff.pieces.begin(), le.coeff.pieces.end(),
                  [](const auto& a, const auto& b) { return a.lo < b.lo; });
      }
      s.lower.push_back(std::move(le));
    }
  }

  s.validate();
  return s;
}

OperatorSpec OperatorSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open operator file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError("operator file is not valid JSON: " + std::string(e.what()));
  }
  return from_json(j);
}

nlohmann::json OperatorSpec::to_json() const {
  nlohmann::json j;
  j["m"] = m;
  j["n"] = n;
  j["interval"] = {interval_lo, interval_hi};
  j["work"] = {work_lo, work_hi};
  j["t0"] = t0;
  j["principal"] = nlohmann::json::array();
  for (const auto& e : principal) {
    nlohmann::json ej;
    ej["nu"] = e.nu;
    ej["j"] = e.j;
    std::vector<double> c(e.poly.coeffs());
    ej["poly"] = c;
    j["principal"].push_back(ej);
  }
  j["lower"] = nlohmann::json::array();
  for (const auto& e : lower) {
    nlohmann::json ej;
    ej["nu"] = e.nu;
    ej["j"] = e.j;
    auto poly_json = [](const CPoly& p) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& c : p.coeffs()) arr.push_back({c.real(), c.imag()});
      return arr;
    };
    if (e.coeff.single_piece()) {
      ej["poly"] = poly_json(e.coeff.pieces[0].poly);
    } else {
      nlohmann::json ps = nlohmann::json::array();
      for (const auto& p : e.coeff.pieces) {
        ps.push_back({{"span", {p.lo, p.hi}}, {"poly", poly_json(p.poly)}});
      }
      ej["pieces"] = ps;
    }
    j["lower"].push_back(ej);
  }
  return j;
}

namespace detail {

Eigen::VectorXd eval_principal_row_any(const OperatorSpec& spec, double t,
                                       const Eigen::VectorXd& xi) {
  const double br = bracket(xi);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(spec.m);
  for (const auto& e : spec.principal) {
    a[spec.m - e.j] += e.poly(t) * xi_power(xi, e.nu) * std::pow(br, -e.j);
  }
  return a;
}

Eigen::VectorXcd eval_lower_row_any(const OperatorSpec& spec, double t, const Eigen::VectorXd& xi,
                                    double hint) {
  const double br = bracket(xi);
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(spec.m);
  for (const auto& e : spec.lower) {
    b[spec.m - e.j] += e.coeff.eval_hinted(t, hint) * xi_power(xi, e.nu) * std::pow(br, 1 - e.j);
  }
  return b;
}

}  // namespace detail

namespace {

void require_direction(const OperatorSpec& spec, const Eigen::VectorXd& xi) {
  if (xi.size() != spec.n) throw ValidationError("frequency has wrong dimension");
  if (xi.norm() == 0.0) throw ValidationError("frequency must be nonzero");
}

}  // namespace

Eigen::VectorXd eval_principal_row(const OperatorSpec& spec, double t, const Eigen::VectorXd& xi) {
  require_direction(spec, xi);
  return detail::eval_principal_row_any(spec, t, xi);
}

Eigen::VectorXcd eval_lower_row(const OperatorSpec& spec, double t, const Eigen::VectorXd& xi,
                                double hint) {
  require_direction(spec, xi);
  return detail::eval_lower_row_any(spec, t, xi, hint);
}

std::vector<Poly> principal_row_polys(const OperatorSpec& spec, const Eigen::VectorXd& xi) {
  require_direction(spec, xi);
  const double br = bracket(xi);
  std::vector<Poly> a(static_cast<std::size_t>(spec.m));
  for (const auto& e : spec.principal) {
    a[static_cast<std::size_t>(spec.m - e.j)] +=
        e.poly * (xi_power(xi, e.nu) * std::pow(br, -e.j));
  }
  return a;
}

Eigen::MatrixXd companion_from_row(const Eigen::VectorXd& row) {
  const Eigen::Index m = row.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i + 1 < m; ++i) A(i, i + 1) = 1.0;
  A.row(m - 1) = row.transpose();
  return A;
}

SymbolFrame build_frame(const OperatorSpec& spec, double t, const Eigen::VectorXd& xi) {
  require_direction(spec, xi);
  SymbolFrame f;
  f.t = t;
  f.xi = xi;
  f.xi_bracket = bracket(xi);
  Eigen::VectorXd a = detail::eval_principal_row_any(spec, t, xi);
  f.A = companion_from_row(a);
  f.B = Eigen::MatrixXcd::Zero(spec.m, spec.m);
  f.B.row(spec.m - 1) = detail::eval_lower_row_any(spec, t, xi, t).transpose();
  f.h.resize(spec.m);
  const double ratio = f.xi_bracket / xi.norm();
  for (int k = 1; k <= spec.m; ++k) f.h[k - 1] = a[spec.m - k] * std::pow(ratio, k);
  return f;
}

}  // namespace hypan
