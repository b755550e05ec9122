#pragma once
//
// Suite runner: for each (body, domain) pair, mesh the domain, solve for
// the torsional rigidity and first eigenvalue, compute the certificates and
// compare everything against the sandwich constants.
//

#include "aniso/certificates.hpp"
#include "aniso/io.hpp"
#include "aniso/mesh.hpp"
#include "aniso/pde_solver.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace aniso {

struct Slack {
  double torsion = 0.01;
  double eigen = 0.015;
};

struct CaseSpec {
  std::string body_name;
  std::string domain_name;
  json body;
  json domain;
  double h = 0.02;
  bool torsion = true;
  bool eigen = true;
};

struct SuiteSpec {
  std::vector<CaseSpec> cases;
  Slack slack;
  std::string out;     // optional default report path
  std::string format;  // "csv" or "json"
};

/// Theoretical constants the record is checked against (2-D defaults).
struct SandwichConstants {
  double torsion_lower = 0.125;
  double torsion_upper = 1.0 / 3.0;
  double eigen_lower = kPi * kPi / 4.0;
  double eigen_upper = 0.0;  // j_0^2, filled by defaults()

  static SandwichConstants defaults(int N = 2) {
    const auto [a, b, c, d] = sandwich_constants(N);
    return {a, b, c, d};
  }
};

struct VerificationFlags {
  bool torsion_lower = false;        // T/(|Omega| R^2) >= 1/8 - slack
  bool torsion_upper = false;        // T/(|Omega| R^2) <= 1/3 + slack
  bool cert_torsion_bracket = false; // certificate lower <= T <= certificate upper, solver slack
  bool refined_strict = false;       // refined bound < R^2 |Omega| / 3
  bool refined_above_solver = false; // refined bound >= T, solver slack
  bool eigen_lower = false;          // lambda R^2 >= pi^2/4 - slack
  bool eigen_upper = false;          // lambda R^2 <= j_0^2 + slack

  bool pass_torsion() const {
    return torsion_lower && torsion_upper && cert_torsion_bracket && refined_strict && refined_above_solver;
  }
  bool pass_eigen() const { return eigen_lower && eigen_upper; }
};

struct VerificationRecord {
  std::string body;
  std::string domain;
  std::string status = "ok";  // ok | parse_failure | solver_failure
  std::string error;
  int N = 2;
  double h = 0.0;
  double R = 0.0;
  double area = 0.0;
  bool has_torsion = false;
  bool has_eigen = false;
  double T = std::numeric_limits<double>::quiet_NaN();
  double T_norm = std::numeric_limits<double>::quiet_NaN();
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double lambda_norm = std::numeric_limits<double>::quiet_NaN();
  SandwichConstants constants = SandwichConstants::defaults();
  // certificate values, raw and normalised by |Omega| R^2
  double cert_T_lower = std::numeric_limits<double>::quiet_NaN();
  double cert_T_upper = std::numeric_limits<double>::quiet_NaN();
  double cert_T_lo = std::numeric_limits<double>::quiet_NaN();
  double cert_T_hi = std::numeric_limits<double>::quiet_NaN();
  double barrier0 = std::numeric_limits<double>::quiet_NaN();
  double refined = std::numeric_limits<double>::quiet_NaN();
  double int_dK = std::numeric_limits<double>::quiet_NaN();
  double cert_eig_lower = std::numeric_limits<double>::quiet_NaN();
  double cert_eig_upper = std::numeric_limits<double>::quiet_NaN();
  // solver diagnostics
  std::size_t vertices = 0;
  int torsion_iterations = 0;
  double torsion_residual = std::numeric_limits<double>::quiet_NaN();
  int eigen_iterations = 0;
  double eigen_residual = std::numeric_limits<double>::quiet_NaN();
  VerificationFlags flags;

  bool pass_torsion() const { return status == "ok" && flags.pass_torsion(); }
  bool pass_eigen() const { return status == "ok" && flags.pass_eigen(); }
  bool pass() const { return pass_torsion() && pass_eigen(); }
};

/// Recomputes every pass flag from the stored values. Unrequested
/// quantities pass vacuously.
inline VerificationFlags evaluate_flags(const VerificationRecord& r, const SandwichConstants& c, const Slack& s) {
  VerificationFlags f;
  if (r.status != "ok") return f;
  if (r.has_torsion) {
    f.torsion_lower = r.T_norm >= c.torsion_lower * (1.0 - s.torsion);
    f.torsion_upper = r.T_norm <= c.torsion_upper * (1.0 + s.torsion);
    f.cert_torsion_bracket = r.cert_T_lower <= r.T * (1.0 + s.torsion) && r.T * (1.0 - s.torsion) <= r.cert_T_upper;
    // compared with the plain R^2 |Omega| / 3 bound, not the constant under test
    f.refined_strict = r.refined < r.R * r.R * r.area / 3.0;
    f.refined_above_solver = r.refined >= r.T * (1.0 - s.torsion);
  } else {
    f.torsion_lower = f.torsion_upper = f.cert_torsion_bracket = f.refined_strict = f.refined_above_solver = true;
  }
  if (r.has_eigen) {
    f.eigen_lower = r.lambda_norm >= c.eigen_lower * (1.0 - s.eigen);
    f.eigen_upper = r.lambda_norm <= c.eigen_upper * (1.0 + s.eigen);
  } else {
    f.eigen_lower = f.eigen_upper = true;
  }
  return f;
}

// ---------------------------------------------------------------------------
// serialisation

inline void to_json(json& j, const SandwichConstants& c) {
  j = {{"torsion_lower", c.torsion_lower}, {"torsion_upper", c.torsion_upper}, {"eigen_lower", c.eigen_lower},
       {"eigen_upper", c.eigen_upper}};
}
inline void from_json(const json& j, SandwichConstants& c) {
  c.torsion_lower = j.at("torsion_lower").get<double>();
  c.torsion_upper = j.at("torsion_upper").get<double>();
  c.eigen_lower = j.at("eigen_lower").get<double>();
  c.eigen_upper = j.at("eigen_upper").get<double>();
}
inline void to_json(json& j, const VerificationFlags& f) {
  j = {{"torsion_lower", f.torsion_lower},
       {"torsion_upper", f.torsion_upper},
       {"cert_torsion_bracket", f.cert_torsion_bracket},
       {"refined_strict", f.refined_strict},
       {"refined_above_solver", f.refined_above_solver},
       {"eigen_lower", f.eigen_lower},
       {"eigen_upper", f.eigen_upper}};
}
inline void from_json(const json& j, VerificationFlags& f) {
  f.torsion_lower = j.at("torsion_lower").get<bool>();
  f.torsion_upper = j.at("torsion_upper").get<bool>();
  f.cert_torsion_bracket = j.at("cert_torsion_bracket").get<bool>();
  f.refined_strict = j.at("refined_strict").get<bool>();
  f.refined_above_solver = j.at("refined_above_solver").get<bool>();
  f.eigen_lower = j.at("eigen_lower").get<bool>();
  f.eigen_upper = j.at("eigen_upper").get<bool>();
}

namespace detail {

// JSON has no NaN; unset values travel as null.
inline json number_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }
inline double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace detail

inline void to_json(json& j, const VerificationRecord& r) {
  using detail::number_or_null;
  j = json::object();
  j["body"] = r.body;
  j["domain"] = r.domain;
  j["status"] = r.status;
  j["error"] = r.error;
  j["N"] = r.N;
  j["h"] = r.h;
  j["R"] = r.R;
  j["area"] = r.area;
  j["has_torsion"] = r.has_torsion;
  j["has_eigen"] = r.has_eigen;
  j["T"] = number_or_null(r.T);
  j["T_norm"] = number_or_null(r.T_norm);
  j["lambda"] = number_or_null(r.lambda);
  j["lambda_norm"] = number_or_null(r.lambda_norm);
  j["constants"] = r.constants;
  j["cert_T_lower"] = number_or_null(r.cert_T_lower);
  j["cert_T_upper"] = number_or_null(r.cert_T_upper);
  j["cert_T_lo"] = number_or_null(r.cert_T_lo);
  j["cert_T_hi"] = number_or_null(r.cert_T_hi);
  j["barrier0"] = number_or_null(r.barrier0);
  j["refined"] = number_or_null(r.refined);
  j["int_dK"] = number_or_null(r.int_dK);
  j["cert_eig_lower"] = number_or_null(r.cert_eig_lower);
  j["cert_eig_upper"] = number_or_null(r.cert_eig_upper);
  j["vertices"] = r.vertices;
  j["torsion_iterations"] = r.torsion_iterations;
  j["torsion_residual"] = number_or_null(r.torsion_residual);
  j["eigen_iterations"] = r.eigen_iterations;
  j["eigen_residual"] = number_or_null(r.eigen_residual);
  j["flags"] = r.flags;
  j["pass_torsion"] = r.pass_torsion();
  j["pass_eigen"] = r.pass_eigen();
}

inline void from_json(const json& j, VerificationRecord& r) {
  using detail::number_from;
  r.body = j.at("body").get<std::string>();
  r.domain = j.at("domain").get<std::string>();
  r.status = j.at("status").get<std::string>();
  r.error = j.at("error").get<std::string>();
  r.N = j.at("N").get<int>();
  r.h = j.at("h").get<double>();
  r.R = j.at("R").get<double>();
  r.area = j.at("area").get<double>();
  r.has_torsion = j.at("has_torsion").get<bool>();
  r.has_eigen = j.at("has_eigen").get<bool>();
  r.T = number_from(j.at("T"));
  r.T_norm = number_from(j.at("T_norm"));
  r.lambda = number_from(j.at("lambda"));
  r.lambda_norm = number_from(j.at("lambda_norm"));
  r.constants = j.at("constants").get<SandwichConstants>();
  r.cert_T_lower = number_from(j.at("cert_T_lower"));
  r.cert_T_upper = number_from(j.at("cert_T_upper"));
  r.cert_T_lo = number_from(j.at("cert_T_lo"));
  r.cert_T_hi = number_from(j.at("cert_T_hi"));
  r.barrier0 = number_from(j.at("barrier0"));
  r.refined = number_from(j.at("refined"));
  r.int_dK = number_from(j.at("int_dK"));
  r.cert_eig_lower = number_from(j.at("cert_eig_lower"));
  r.cert_eig_upper = number_from(j.at("cert_eig_upper"));
  r.vertices = j.at("vertices").get<std::size_t>();
  r.torsion_iterations = j.at("torsion_iterations").get<int>();
  r.torsion_residual = number_from(j.at("torsion_residual"));
  r.eigen_iterations = j.at("eigen_iterations").get<int>();
  r.eigen_residual = number_from(j.at("eigen_residual"));
  r.flags = j.at("flags").get<VerificationFlags>();
}

// ---------------------------------------------------------------------------
// suite files

namespace detail {

inline std::string stem_name(const std::filesystem::path& p) { return p.stem().string(); }

/// A body or domain entry is a file path (relative to the suite file) or
/// an inline object.
inline std::pair<json, std::string> resolve_entry(const json& entry, const std::filesystem::path& base,
                                                  const char* what) {
  if (entry.is_string()) {
    const std::filesystem::path p = base / entry.get<std::string>();
    json j = read_json_file(p);
    std::string name = j.is_object() && j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>()
                                                                                    : stem_name(p);
    return {j, name};
  }
  if (entry.is_object()) {
    std::string name = entry.contains("name") && entry["name"].is_string() ? entry["name"].get<std::string>()
                                                                           : entry.value("type", std::string(what));
    return {entry, name};
  }
  throw FormatError(std::string(what) + " entries must be a file path or an object");
}

}  // namespace detail

/// Parses a suite description. Every referenced file must exist and be
/// valid JSON; geometric validity is checked per case when the suite runs.
///
///   {"h": 0.02, "slack": {"torsion": 0.01, "eigen": 0.015},
///    "bodies": [...], "domains": [...],            // full product, or
///    "cases": [{"body": ..., "domain": ..., "h": ..., "quantities": ["torsion", "eigen"]}],
///    "out": "report.csv", "format": "csv"}
inline SuiteSpec parse_suite(const json& j, const std::filesystem::path& base = ".") {
  if (!j.is_object()) throw FormatError("suite must be a JSON object");
  SuiteSpec s;
  const double h = j.value("h", 0.02);
  if (!(h > 0.0)) throw FormatError("mesh size must be positive");
  if (j.contains("slack")) {
    s.slack.torsion = j["slack"].value("torsion", s.slack.torsion);
    s.slack.eigen = j["slack"].value("eigen", s.slack.eigen);
  }
  s.out = j.value("out", std::string());
  s.format = j.value("format", std::string("csv"));

  auto quantities = [](const json& c, CaseSpec& cs) {
    if (!c.contains("quantities")) return;
    cs.torsion = cs.eigen = false;
    for (const auto& q : c["quantities"]) {
      const std::string name = q.get<std::string>();
      if (name == "torsion") cs.torsion = true;
      else if (name == "eigen") cs.eigen = true;
      else throw FormatError("unknown quantity \"" + name + "\"");
    }
  };

  if (j.contains("bodies") || j.contains("domains")) {
    std::vector<std::pair<json, std::string>> bodies, domains;
    for (const auto& b : j.value("bodies", json::array())) bodies.push_back(detail::resolve_entry(b, base, "body"));
    for (const auto& d : j.value("domains", json::array())) domains.push_back(detail::resolve_entry(d, base, "domain"));
    for (const auto& [bj, bn] : bodies) {
      for (const auto& [dj, dn] : domains) {
        CaseSpec cs{bn, dn, bj, dj, h, true, true};
        quantities(j, cs);
        s.cases.push_back(cs);
      }
    }
  }
  for (const auto& c : j.value("cases", json::array())) {
    CaseSpec cs;
    std::tie(cs.body, cs.body_name) = detail::resolve_entry(detail::field(c, "body"), base, "body");
    std::tie(cs.domain, cs.domain_name) = detail::resolve_entry(detail::field(c, "domain"), base, "domain");
    cs.h = c.value("h", h);
    if (!(cs.h > 0.0)) throw FormatError("mesh size must be positive");
    quantities(c, cs);
    s.cases.push_back(cs);
  }
  return s;
}

inline SuiteSpec load_suite(const std::filesystem::path& path) {
  return parse_suite(read_json_file(path), path.parent_path().empty() ? "." : path.parent_path());
}

// ---------------------------------------------------------------------------
// running

/// Mesh size used for a case: the requested h, refined so that the
/// Euclidean inradius spans at least ten elements. Thin domains would
/// otherwise carry errors of order (h / width)^2 far above the slack.
inline double case_mesh_size(const Polygon& omega, double h) {
  return std::min(h, aniso_inradius(ConvexBody::disk(), omega).R / 10.0);
}

inline VerificationRecord run_case(const CaseSpec& cs, const Slack& slack, const SolverOptions& opts = {}) {
  VerificationRecord r;
  r.body = cs.body_name;
  r.domain = cs.domain_name;
  r.h = cs.h;
  r.has_torsion = cs.torsion;
  r.has_eigen = cs.eigen;

  std::optional<ConvexBody> K;
  std::optional<Polygon> omega;
  try {
    K = body_from_json(cs.body);
    omega = domain_from_json(cs.domain, cs.h);
  } catch (const std::exception& e) {
    r.status = "parse_failure";
    r.error = e.what();
    return r;
  }

  try {
    const InradiusResult in = aniso_inradius(*K, *omega);
    r.R = in.R;
    r.area = omega->area();
    const double scale = r.R * r.R * r.area;
    r.h = case_mesh_size(*omega, cs.h);
    const Mesh mesh = triangulate(*omega, r.h);
    r.vertices = mesh.num_vertices();
    ScalarField torsion_field;
    if (cs.torsion || cs.eigen) {
      const SolveReport t = solve_torsion(*K, mesh, opts);
      torsion_field = t.field;
      if (cs.torsion) {
        r.T = t.value;
        r.T_norm = t.value / scale;
        r.torsion_iterations = t.iterations;
        r.torsion_residual = t.residual;
        const BoundCertificate c = torsion_bounds(*K, *omega);
        r.cert_T_lower = c.lower;
        r.cert_T_upper = c.upper;
        r.cert_T_lo = c.lower / scale;
        r.cert_T_hi = c.upper / scale;
        r.int_dK = c.int_dK;
        r.barrier0 = torsion_upper_barrier(*K, *omega, 0.0);
        r.refined = torsion_upper_refined(*K, *omega);
      }
    }
    if (cs.eigen) {
      const SolveReport e = solve_eigen(*K, mesh, opts, &torsion_field);
      r.lambda = e.value;
      r.lambda_norm = e.value * r.R * r.R;
      r.eigen_iterations = e.iterations;
      r.eigen_residual = e.residual;
      const BoundCertificate c = eigen_bounds(*K, *omega);
      r.cert_eig_lower = c.lower;
      r.cert_eig_upper = c.upper;
    }
  } catch (const std::exception& e) {
    r.status = "solver_failure";
    r.error = e.what();
    return r;
  }
  r.flags = evaluate_flags(r, r.constants, slack);
  return r;
}

/// Worker count: ANISO_JOBS when set, otherwise `requested`, otherwise the
/// hardware concurrency.
inline int resolve_jobs(int requested = 0) {
  if (const char* env = std::getenv("ANISO_JOBS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// One record per case, in suite order. Case failures are recorded in the
/// record rather than thrown.
inline std::vector<VerificationRecord> run_suite(const SuiteSpec& spec, int jobs = 0, const SolverOptions& opts = {}) {
  std::vector<VerificationRecord> out(spec.cases.size());
  if (spec.cases.empty()) return out;
  const int workers = std::min<int>(resolve_jobs(jobs), static_cast<int>(spec.cases.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < spec.cases.size(); i = next++) out[i] = run_case(spec.cases[i], spec.slack, opts);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return out;
}

// ---------------------------------------------------------------------------
// reports

inline const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols{"body",          "domain",          "N",           "R",
                                             "area",          "T_norm",          "T_lower_const", "T_upper_const",
                                             "lambda_norm",   "eig_lower_const", "eig_upper_const", "cert_T_lo",
                                             "cert_T_hi",     "pass_torsion",    "pass_eigen"};
  return cols;
}

namespace detail {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace detail

inline std::string format_report(const std::vector<VerificationRecord>& records, const std::string& format) {
  if (format == "csv") {
    std::string s;
    const auto& cols = report_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + cols[i];
    s += "\n";
    for (const auto& r : records) {
      using detail::fmt;
      const std::vector<std::string> row{detail::csv_field(r.body),
                                         detail::csv_field(r.domain),
                                         std::to_string(r.N),
                                         fmt(r.R),
                                         fmt(r.area),
                                         fmt(r.T_norm),
                                         fmt(r.constants.torsion_lower),
                                         fmt(r.constants.torsion_upper),
                                         fmt(r.lambda_norm),
                                         fmt(r.constants.eigen_lower),
                                         fmt(r.constants.eigen_upper),
                                         fmt(r.cert_T_lo),
                                         fmt(r.cert_T_hi),
                                         r.pass_torsion() ? "true" : "false",
                                         r.pass_eigen() ? "true" : "false"};
      for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + row[i];
      s += "\n";
    }
    return s;
  }
  if (format == "json") {
    json arr = json::array();
    for (const auto& r : records) arr.push_back(r);
    return arr.dump(2) + "\n";
  }
  throw FormatError("unknown report format \"" + format + "\"");
}

/// Writes the report; throws on an empty record list or an unwritable path.
inline void emit_report(const std::vector<VerificationRecord>& records, const std::string& format,
                        const std::filesystem::path& path) {
  if (records.empty()) throw DomainError("no records to report");
  const std::string text = format_report(records, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

// ---------------------------------------------------------------------------
// convergence

struct ConvergenceRow {
  double h = 0.0;
  double value = 0.0;
  std::size_t vertices = 0;
  double difference = std::numeric_limits<double>::quiet_NaN();  // value - previous value
  double ratio = std::numeric_limits<double>::quiet_NaN();       // previous difference / difference
};

struct ConvergenceTable {
  std::string quantity;
  std::vector<ConvergenceRow> rows;
  double richardson = std::numeric_limits<double>::quiet_NaN();
  bool complete = true;
  std::string error;
};

/// Solves at each h (strictly decreasing, at least three values) and
/// extrapolates the last two values assuming second-order convergence.
/// `quantity` is "torsion", "eigen" or "inradius".
inline ConvergenceTable convergence_study(const json& body, const json& domain, const std::vector<double>& hs,
                                          const std::string& quantity = "torsion", const SolverOptions& opts = {}) {
  if (hs.size() < 3) throw DomainError("need at least three mesh sizes");
  for (std::size_t i = 1; i < hs.size(); ++i) {
    if (!(hs[i] < hs[i - 1])) throw DomainError("mesh sizes must be strictly decreasing");
  }
  if (quantity != "torsion" && quantity != "eigen" && quantity != "inradius") {
    throw DomainError("unknown quantity \"" + quantity + "\"");
  }
  const ConvexBody K = body_from_json(body);
  ConvergenceTable table;
  table.quantity = quantity;
  for (double h : hs) {
    try {
      const Polygon omega = domain_from_json(domain, h);
      ConvergenceRow row;
      row.h = h;
      if (quantity == "inradius") {
        row.value = aniso_inradius(K, omega).R;
      } else {
        const Mesh mesh = triangulate(omega, h);
        row.vertices = mesh.num_vertices();
        row.value = quantity == "torsion" ? solve_torsion(K, mesh, opts).value : solve_eigen(K, mesh, opts).value;
      }
      if (!table.rows.empty()) {
        row.difference = row.value - table.rows.back().value;
        if (table.rows.size() >= 2) row.ratio = table.rows.back().difference / row.difference;
      }
      table.rows.push_back(row);
    } catch (const std::exception& e) {
      table.complete = false;
      table.error = e.what();
      break;
    }
  }
  if (table.rows.size() >= 2) {
    const auto& a = table.rows[table.rows.size() - 2];
    const auto& b = table.rows.back();
    const double q = a.h / b.h;
    table.richardson = b.value + (b.value - a.value) / (q * q - 1.0);
  }
  return table;
}

inline std::string format_convergence(const ConvergenceTable& t) {
  std::string s = "h,vertices,value,difference,ratio\n";
  for (const auto& r : t.rows) {
    s += detail::fmt(r.h) + "," + std::to_string(r.vertices) + "," + detail::fmt(r.value) + "," +
         detail::fmt(r.difference) + "," + detail::fmt(r.ratio) + "\n";
  }
  s += "richardson,," + detail::fmt(t.richardson) + ",,\n";
  return s;
}

}  // namespace aniso
