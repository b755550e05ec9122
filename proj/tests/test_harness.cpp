#include "support.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace aniso;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("aniso_harness_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

int run_cli(const std::string& args, const fs::path& out = {}) {
  std::string cmd = std::string(ANISO_CLI) + " " + args;
  cmd += out.empty() ? " > /dev/null 2>&1" : " > " + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// A record that passes every check, built by hand.
VerificationRecord passing_record() {
  VerificationRecord r;
  r.body = "disk";
  r.domain = "square";
  r.h = 0.02;
  r.R = 1.0;
  r.area = 4.0;
  r.has_torsion = r.has_eigen = true;
  r.T = 0.56;
  r.T_norm = 0.14;
  r.lambda = 4.93;
  r.lambda_norm = 4.93;
  r.cert_T_lower = 0.5;
  r.cert_T_upper = 0.6;
  r.cert_T_lo = 0.125;
  r.cert_T_hi = 0.15;
  r.refined = 0.6;
  r.flags = evaluate_flags(r, r.constants, Slack{});
  return r;
}

const std::vector<VerificationRecord>& smoke_records() {
  static const auto records = run_suite(load_suite(testsupport::data_path("suites/smoke.json")), 1);
  return records;
}

}  // namespace

// --- suite files ------------------------------------------------------------

TEST(ParseSuite, ProductOfBodiesAndDomains) {
  const SuiteSpec s = load_suite(testsupport::data_path("suites/default.json"));
  ASSERT_EQ(s.cases.size(), 20u);
  EXPECT_EQ(s.cases.front().body_name, "disk");
  EXPECT_EQ(s.cases.front().domain_name, "disk128");
  EXPECT_EQ(s.cases.back().body_name, "ellipse");
  EXPECT_EQ(s.cases.back().domain_name, "pentagon");
  EXPECT_DOUBLE_EQ(s.cases[3].h, 0.02);
  EXPECT_DOUBLE_EQ(s.slack.torsion, 0.01);
  EXPECT_DOUBLE_EQ(s.slack.eigen, 0.015);
  EXPECT_EQ(s.out, "report.csv");
}

TEST(ParseSuite, ExplicitCasesWithQuantitiesAndInlineEntries) {
  const json j = json::parse(R"({
    "h": 0.05,
    "cases": [
      {"body": {"type": "pball", "p": 2, "name": "round"}, "domain": {"type": "rectangle", "half_widths": [1, 1]},
       "quantities": ["eigen"], "h": 0.1},
      {"body": "../bodies/square.json", "domain": "../domains/pentagon.json"}
    ]})");
  const SuiteSpec s = parse_suite(j, testsupport::data_path("suites"));
  ASSERT_EQ(s.cases.size(), 2u);
  EXPECT_EQ(s.cases[0].body_name, "round");
  EXPECT_EQ(s.cases[0].domain_name, "rectangle");
  EXPECT_FALSE(s.cases[0].torsion);
  EXPECT_TRUE(s.cases[0].eigen);
  EXPECT_DOUBLE_EQ(s.cases[0].h, 0.1);
  EXPECT_DOUBLE_EQ(s.cases[1].h, 0.05);
  EXPECT_EQ(s.cases[1].body_name, "square");
}

TEST(ParseSuite, Errors) {
  const fs::path base = testsupport::data_path("suites");
  EXPECT_THROW(parse_suite(json::array(), base), FormatError);
  EXPECT_THROW(parse_suite(json::parse(R"({"h": 0})"), base), FormatError);
  EXPECT_THROW(parse_suite(json::parse(R"({"bodies": ["missing.json"], "domains": []})"), base), FormatError);
  EXPECT_THROW(parse_suite(json::parse(R"({"cases": [{"body": 3, "domain": {}}]})"), base), FormatError);
  EXPECT_THROW(parse_suite(json::parse(R"({"cases": [{"domain": {}}]})"), base), FormatError);
  EXPECT_THROW(
      parse_suite(json::parse(R"({"cases": [{"body": {}, "domain": {}, "quantities": ["volume"]}]})"), base),
      FormatError);
  EXPECT_THROW(load_suite(scratch_dir() / "nope.json"), FormatError);
  const fs::path broken = scratch_dir() / "broken.json";
  std::ofstream(broken) << "{ not json";
  EXPECT_THROW(load_suite(broken), FormatError);
}

TEST(IoFiles, BodyAndDomainDescriptions) {
  EXPECT_THROW(body_from_json(json::parse(R"({"type": "blob"})")), FormatError);
  EXPECT_THROW(body_from_json(json::parse(R"({"type": "pball", "p": "two"})")), FormatError);
  EXPECT_THROW(domain_from_json(json::parse(R"({"type": "disk"})")), FormatError);
  EXPECT_EQ(domain_from_json(json::parse(R"({"type": "disk"})"), 0.02).size(), 320u);
  EXPECT_EQ(body_from_json(json::parse(R"({"type": "pball", "p": "inf"})")).kind(), BodyKind::Polytope);
  const ConvexBody E = body_from_json(read_json_file(testsupport::data_path("bodies/ellipse.json")));
  EXPECT_NEAR(E.support(Vec2(1, 0)), 2.0, 1e-15);
  for (const auto& [name, K] : testsupport::suite_bodies()) {
    const ConvexBody back = body_from_json(body_to_json(K));
    EXPECT_EQ(back.support(Vec2(0.3, -0.8)), K.support(Vec2(0.3, -0.8))) << name;
  }
}

// --- running -----------------------------------------------------------------

TEST(RunSuite, EmptySuiteGivesNoRecords) {
  const SuiteSpec s = parse_suite(json::parse(R"({"cases": []})"));
  EXPECT_TRUE(run_suite(s).empty());
  EXPECT_THROW(emit_report({}, "csv", scratch_dir() / "empty.csv"), DomainError);
}

TEST(RunSuite, SmokeSuitePasses) {
  // h = 0.1 leaves about 3% crease error for the square body, hence the suite's wider slack
  const Slack slack = load_suite(testsupport::data_path("suites/smoke.json")).slack;
  EXPECT_NEAR(slack.torsion, 0.04, 1e-15);
  const auto& records = smoke_records();
  ASSERT_EQ(records.size(), 4u);
  EXPECT_EQ(records[0].body, "disk");
  EXPECT_EQ(records[1].domain, "pentagon");
  for (const auto& r : records) {
    EXPECT_EQ(r.status, "ok") << r.error;
    EXPECT_TRUE(r.pass()) << r.body << "/" << r.domain;
    EXPECT_EQ(r.flags.pass_torsion(), evaluate_flags(r, r.constants, slack).pass_torsion());
  }
}

TEST(RunSuite, NonConvexDomainIsIsolated) {
  const json j = json::parse(R"({
    "h": 0.1,
    "cases": [
      {"body": {"type": "pball", "p": 2}, "domain": {"type": "polygon", "vertices": [[0,0],[2,0],[2,2],[1,0.5],[0,2]]}},
      {"body": {"type": "pball", "p": 2}, "domain": {"type": "rectangle", "half_widths": [1, 1]}}
    ]})");
  const auto records = run_suite(parse_suite(j), 2);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].status, "parse_failure");
  EXPECT_FALSE(records[0].pass());
  EXPECT_NE(records[0].error.find("convex"), std::string::npos);
  EXPECT_EQ(records[1].status, "ok");
  EXPECT_TRUE(records[1].pass());
}

TEST(RunSuite, OrderIndependentOfWorkerCount) {
  const SuiteSpec spec = load_suite(testsupport::data_path("suites/smoke.json"));
  const auto parallel = run_suite(spec, 3);
  ASSERT_EQ(parallel.size(), smoke_records().size());
  EXPECT_EQ(format_report(parallel, "json"), format_report(smoke_records(), "json"));
}

TEST(RunSuite, JobsEnvironmentOverride) {
  ::setenv("ANISO_JOBS", "3", 1);
  EXPECT_EQ(resolve_jobs(7), 3);
  ::unsetenv("ANISO_JOBS");
  EXPECT_EQ(resolve_jobs(7), 7);
  EXPECT_GE(resolve_jobs(0), 1);
}

// --- flags -------------------------------------------------------------------

TEST(Flags, SeededFaultsFlipExactlyOneFlag) {
  const VerificationRecord base = passing_record();
  ASSERT_TRUE(base.pass());
  const VerificationFlags ok = base.flags;

  struct Fault {
    const char* name;
    std::function<void(VerificationRecord&, SandwichConstants&)> apply;
    bool VerificationFlags::*flag;
  };
  const std::vector<Fault> faults{
      {"torsion lower constant", [](auto&, auto& c) { c.torsion_lower = 0.2; }, &VerificationFlags::torsion_lower},
      {"torsion upper constant", [](auto&, auto& c) { c.torsion_upper = 0.1; }, &VerificationFlags::torsion_upper},
      {"eigen lower constant", [](auto&, auto& c) { c.eigen_lower *= 4.0; }, &VerificationFlags::eigen_lower},
      {"eigen upper constant", [](auto&, auto& c) { c.eigen_upper /= 4.0; }, &VerificationFlags::eigen_upper},
      {"certificate lower", [](auto& r, auto&) { r.cert_T_lower = 0.7; }, &VerificationFlags::cert_torsion_bracket},
      {"refined above plain", [](auto& r, auto&) { r.refined = 1.5; }, &VerificationFlags::refined_strict},
      {"refined below solver", [](auto& r, auto&) { r.refined = 0.5; }, &VerificationFlags::refined_above_solver},
  };
  for (const auto& f : faults) {
    VerificationRecord r = base;
    SandwichConstants c = r.constants;
    f.apply(r, c);
    const VerificationFlags got = evaluate_flags(r, c, Slack{});
    EXPECT_FALSE(got.*(f.flag)) << f.name;
    for (auto other : {&VerificationFlags::torsion_lower, &VerificationFlags::torsion_upper,
                       &VerificationFlags::cert_torsion_bracket, &VerificationFlags::refined_strict,
                       &VerificationFlags::refined_above_solver, &VerificationFlags::eigen_lower,
                       &VerificationFlags::eigen_upper}) {
      if (other != f.flag) { EXPECT_EQ(got.*other, ok.*other) << f.name; }
    }
  }
}

TEST(Flags, SlackIsAppliedOnTheSolverSide) {
  VerificationRecord r = passing_record();
  r.T_norm = 0.125 * 0.995;
  EXPECT_TRUE(evaluate_flags(r, r.constants, Slack{0.01, 0.015}).torsion_lower);
  EXPECT_FALSE(evaluate_flags(r, r.constants, Slack{0.001, 0.015}).torsion_lower);
  r.lambda_norm = r.constants.eigen_upper * 1.01;
  EXPECT_TRUE(evaluate_flags(r, r.constants, Slack{0.01, 0.015}).eigen_upper);
  EXPECT_FALSE(evaluate_flags(r, r.constants, Slack{0.01, 0.005}).eigen_upper);
}

TEST(Flags, UnrequestedQuantitiesPassAndFailuresDoNot) {
  VerificationRecord r;
  r.has_torsion = false;
  r.has_eigen = true;
  r.lambda_norm = 4.0;
  EXPECT_TRUE(evaluate_flags(r, r.constants, Slack{}).pass_torsion());
  EXPECT_TRUE(evaluate_flags(r, r.constants, Slack{}).pass_eigen());
  r.status = "solver_failure";
  EXPECT_FALSE(evaluate_flags(r, r.constants, Slack{}).pass_eigen());
  r.flags.eigen_lower = r.flags.eigen_upper = true;
  EXPECT_FALSE(r.pass_eigen());
}

// --- reports -------------------------------------------------------------------

TEST(Report, CsvHeaderAndRows) {
  const std::string one = format_report({passing_record()}, "csv");
  EXPECT_EQ(count_lines(one), 2);
  EXPECT_EQ(one.substr(0, one.find('\n')),
            "body,domain,N,R,area,T_norm,T_lower_const,T_upper_const,lambda_norm,eig_lower_const,eig_upper_const,"
            "cert_T_lo,cert_T_hi,pass_torsion,pass_eigen");
  EXPECT_NE(one.find("disk,square,2,1,4,0.14,0.125,0.3333333333,4.93,"), std::string::npos);
  EXPECT_EQ(one.substr(one.size() - 10), "true,true\n");

  const std::string smoke = format_report(smoke_records(), "csv");
  EXPECT_EQ(count_lines(smoke), 5);
  EXPECT_THROW(format_report(smoke_records(), "xml"), FormatError);
}

TEST(Report, CsvQuotesAwkwardNames) {
  VerificationRecord r = passing_record();
  r.body = "a,\"b\"";
  const std::string s = format_report({r}, "csv");
  EXPECT_NE(s.find("\"a,\"\"b\"\"\",square"), std::string::npos);
}

TEST(Report, ByteIdenticalFiles) {
  const fs::path a = scratch_dir() / "a.csv", b = scratch_dir() / "b.csv";
  emit_report(smoke_records(), "csv", a);
  emit_report(smoke_records(), "csv", b);
  EXPECT_EQ(slurp(a), slurp(b));
  const fs::path ja = scratch_dir() / "a.json", jb = scratch_dir() / "b.json";
  emit_report(smoke_records(), "json", ja);
  emit_report(smoke_records(), "json", jb);
  EXPECT_EQ(slurp(ja), slurp(jb));
}

TEST(Report, UnwritablePath) {
  EXPECT_ANY_THROW(emit_report({passing_record()}, "csv", scratch_dir() / "no_such_dir" / "r.csv"));
}

TEST(Report, JsonRoundTripIsLossless) {
  for (const auto& r : smoke_records()) {
    const json j = r;
    const VerificationRecord back = json::parse(j.dump()).get<VerificationRecord>();
    EXPECT_EQ(json(back).dump(), j.dump());
    EXPECT_EQ(back.T, r.T);
    EXPECT_EQ(back.lambda_norm, r.lambda_norm);
    EXPECT_EQ(back.pass(), r.pass());
  }
  VerificationRecord unset;
  unset.status = "parse_failure";
  const VerificationRecord back = json(unset).get<VerificationRecord>();
  EXPECT_TRUE(std::isnan(back.T));
  EXPECT_TRUE(json(unset)["T"].is_null());
}

// --- convergence ------------------------------------------------------------------

TEST(Convergence, InradiusIsMeshIndependent) {
  const json body = read_json_file(testsupport::data_path("bodies/square.json"));
  const json domain = read_json_file(testsupport::data_path("domains/pentagon.json"));
  const ConvergenceTable t = convergence_study(body, domain, {0.08, 0.04, 0.02}, "inradius");
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_TRUE(t.complete);
  EXPECT_EQ(t.rows[0].value, t.rows[1].value);
  EXPECT_EQ(t.rows[1].value, t.rows[2].value);
  EXPECT_EQ(t.richardson, t.rows[2].value);
  EXPECT_EQ(count_lines(format_convergence(t)), 5);
}

TEST(Convergence, RejectsBadMeshLists) {
  const json body = read_json_file(testsupport::data_path("bodies/disk.json"));
  const json domain = read_json_file(testsupport::data_path("domains/square.json"));
  EXPECT_THROW(convergence_study(body, domain, {0.1, 0.05}), DomainError);
  EXPECT_THROW(convergence_study(body, domain, {0.1, 0.05, 0.05}), DomainError);
  EXPECT_THROW(convergence_study(body, domain, {0.1, 0.05, 0.025}, "area"), DomainError);
}

TEST(Convergence, PartialTableOnFailure) {
  // the coarsest mesh size is too large for the domain
  const ConvergenceTable bad = convergence_study(json{{"type", "pball"}, {"p", 2}},
                                                 json{{"type", "rectangle"}, {"half_widths", {0.1, 0.1}}},
                                                 {0.3, 0.05, 0.02}, "torsion");
  EXPECT_FALSE(bad.complete);
  EXPECT_TRUE(bad.rows.empty());
  EXPECT_FALSE(bad.error.empty());
}

// --- command line ----------------------------------------------------------------

TEST(Cli, VerifyExitCodes) {
  const fs::path report = scratch_dir() / "cli.csv";
  const std::string suite = testsupport::data_path("suites/smoke.json");
  EXPECT_EQ(run_cli("verify --suite " + suite + " --out " + report.string()), 0);
  EXPECT_EQ(count_lines(slurp(report)), 5);

  // a slack of -50% makes every lower-side check fail
  const fs::path strict = scratch_dir() / "strict.json";
  json j = read_json_file(suite);
  j["slack"] = {{"torsion", -0.5}, {"eigen", -0.5}};
  for (auto& b : j["bodies"]) b = (fs::path(testsupport::data_path("suites")) / b.get<std::string>()).string();
  for (auto& d : j["domains"]) d = (fs::path(testsupport::data_path("suites")) / d.get<std::string>()).string();
  j["domains"] = json::array({j["domains"][0]});
  j["bodies"] = json::array({j["bodies"][0]});
  std::ofstream(strict) << j.dump();
  EXPECT_EQ(run_cli("verify --suite " + strict.string() + " --out " + report.string()), 1);
  EXPECT_EQ(run_cli("verify --allow-fail --suite " + strict.string() + " --out " + report.string()), 0);
  EXPECT_NE(slurp(report).find("false"), std::string::npos);

  EXPECT_EQ(run_cli("verify --suite " + (scratch_dir() / "missing.json").string()), 2);
}

TEST(Cli, QuerySubcommands) {
  const std::string body = testsupport::data_path("bodies/disk.json");
  const std::string domain = testsupport::data_path("domains/rectangle.json");
  const fs::path out = scratch_dir() / "q.txt";

  ASSERT_EQ(run_cli("body --body " + body + " --x 3,4", out), 0);
  EXPECT_DOUBLE_EQ(json::parse(slurp(out))["support"].get<double>(), 5.0);

  ASSERT_EQ(run_cli("inradius --body " + body + " --domain " + domain, out), 0);
  EXPECT_NEAR(json::parse(slurp(out))["R"].get<double>(), 0.5, 1e-12);

  ASSERT_EQ(run_cli("certify --quantity eigen --body " + body + " --domain " + domain, out), 0);
  const json c = json::parse(slurp(out));
  EXPECT_NEAR(c["lower"].get<double>(), kPi * kPi, 1e-9);
  EXPECT_EQ(c["methods"]["upper"], "inscribed_body");

  ASSERT_EQ(run_cli("sweep-rect --body " + body, out), 0);
  EXPECT_EQ(count_lines(slurp(out)), 5);

  const fs::path field = scratch_dir() / "field.csv";
  ASSERT_EQ(run_cli("torsion --h 0.1 --body " + body + " --domain " + domain + " --out " + field.string(), out), 0);
  EXPECT_GT(json::parse(slurp(out))["value"].get<double>(), 0.0);
  EXPECT_EQ(slurp(field).substr(0, 6), "x,y,u\n");

  EXPECT_EQ(run_cli("body --body " + body + " --x 0,0"), 2);
  EXPECT_EQ(run_cli("inradius --body " + body + " --domain /nonexistent.json"), 2);
  EXPECT_NE(run_cli("frobnicate"), 0);
}
