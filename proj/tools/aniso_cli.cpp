// Command-line front end: body queries, inradius, solvers, certificates,
// thin-rectangle sweeps, suite verification and convergence studies.

#include "aniso/aniso.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using aniso::json;

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw aniso::FormatError("not a number: " + item);
    out.push_back(v);
  }
  if (out.empty()) throw aniso::FormatError("empty list");
  return out;
}

json vec_json(const aniso::Vec2& v) { return json::array({v.x(), v.y()}); }

aniso::ConvexBody load_body(const std::string& path) { return aniso::body_from_json(aniso::read_json_file(path)); }

aniso::Polygon load_domain(const std::string& path, double h = 0.0) {
  return aniso::domain_from_json(aniso::read_json_file(path), h);
}

void write_field(const std::string& path, const aniso::Mesh& mesh, const aniso::ScalarField& u) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "x,y,u\n";
  char buf[128];
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", mesh.vertices[i].x(), mesh.vertices[i].y(),
                  u[static_cast<Eigen::Index>(i)]);
    out << buf;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic torsional rigidity and principal frequency of convex polygons"};
  app.require_subcommand(1);
  // -h is taken by the mesh size option
  app.set_help_flag("--help", "Print this help message and exit");

  std::string body_path, domain_path, out_path, suite_path, format = "csv", tau_text, quantity = "torsion";
  std::string eps_text = "0.2,0.1,0.05,0.025", h_text = "0.08,0.04,0.02", x_text = "1,0";
  double h = 0.02, a = 1.0;
  int jobs = 0;
  bool allow_fail = false;

  auto* body_cmd = app.add_subcommand("body", "Evaluate support, gauge and gradients of a body");
  body_cmd->add_option("--body", body_path, "body JSON file")->required();
  body_cmd->add_option("--x", x_text, "direction as x,y");

  auto* inr_cmd = app.add_subcommand("inradius", "Anisotropic inradius, incenter and active facets");
  inr_cmd->add_option("--body", body_path)->required();
  inr_cmd->add_option("--domain", domain_path)->required();

  auto add_solver = [&](const char* name, const char* help) {
    auto* c = app.add_subcommand(name, help);
    c->add_option("--body", body_path)->required();
    c->add_option("--domain", domain_path)->required();
    c->add_option("--h", h, "target mesh edge length");
    c->add_option("--tau-schedule", tau_text, "comma-separated smoothing parameters, e.g. 0.1,0.01,0.001,0");
    c->add_option("--out", out_path, "write the nodal field as CSV (x, y, u)");
    return c;
  };
  auto* tor_cmd = add_solver("torsion", "Solve for the torsional rigidity");
  auto* eig_cmd = add_solver("eigen", "Solve for the first eigenvalue");

  auto* cert_cmd = app.add_subcommand("certify", "Closed-form bounds for a quantity");
  cert_cmd->add_option("--body", body_path)->required();
  cert_cmd->add_option("--domain", domain_path)->required();
  cert_cmd->add_option("--quantity", quantity)->check(CLI::IsMember({"torsion", "eigen"}));

  auto* sweep_cmd = app.add_subcommand("sweep-rect", "Thin-rectangle ratio sweep as CSV");
  sweep_cmd->add_option("--eps", eps_text, "comma-separated half widths");
  sweep_cmd->add_option("--body", body_path)->required();
  sweep_cmd->add_option("--a", a, "half length of the long side");

  auto* verify_cmd = app.add_subcommand("verify", "Run a verification suite and write the report");
  verify_cmd->add_option("--suite", suite_path)->required();
  verify_cmd->add_option("--out", out_path, "report path (default: the suite's \"out\")");
  verify_cmd->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
  verify_cmd->add_option("--jobs", jobs, "worker threads (ANISO_JOBS overrides)");
  verify_cmd->add_flag("--allow-fail", allow_fail, "exit 0 even if some check fails");

  auto* conv_cmd = app.add_subcommand("converge", "Mesh convergence table with Richardson extrapolation");
  conv_cmd->add_option("--body", body_path)->required();
  conv_cmd->add_option("--domain", domain_path)->required();
  conv_cmd->add_option("--h", h_text, "comma-separated, strictly decreasing mesh sizes");
  conv_cmd->add_option("--quantity", quantity)->check(CLI::IsMember({"torsion", "eigen", "inradius"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*body_cmd) {
      const auto K = load_body(body_path);
      const auto xs = parse_list(x_text);
      if (xs.size() != 2) throw aniso::FormatError("--x needs two components");
      const aniso::Vec2 x(xs[0], xs[1]);
      json j{{"body", K.describe()}, {"x", vec_json(x)}, {"support", K.support(x)}, {"gauge", K.gauge(x)},
             {"support_gradient", vec_json(K.support_gradient(x))},
             {"quadratic_gradient", vec_json(K.quadratic_gradient(x))}};
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    if (*inr_cmd) {
      const auto r = aniso::aniso_inradius(load_body(body_path), load_domain(domain_path));
      std::cout << json{{"R", r.R}, {"center", vec_json(r.center)}, {"active", r.active}}.dump(2) << "\n";
      return 0;
    }
    if (*tor_cmd || *eig_cmd) {
      const auto K = load_body(body_path);
      const auto omega = load_domain(domain_path, h);
      aniso::SolverOptions opts;
      if (!tau_text.empty()) opts.tau_schedule = parse_list(tau_text);
      const aniso::Mesh mesh = aniso::triangulate(omega, h);
      const auto rep = *tor_cmd ? aniso::solve_torsion(K, mesh, opts) : aniso::solve_eigen(K, mesh, opts);
      if (!out_path.empty()) write_field(out_path, mesh, rep.field);
      std::cout << json{{"value", rep.value}, {"iterations", rep.iterations}, {"residual", rep.residual},
                        {"h", h}, {"tau_final", rep.tau_final}}
                       .dump(2)
                << "\n";
      return 0;
    }
    if (*cert_cmd) {
      const auto K = load_body(body_path);
      const auto omega = load_domain(domain_path);
      const auto c = quantity == "torsion" ? aniso::torsion_bounds(K, omega) : aniso::eigen_bounds(K, omega);
      std::cout << json{{"quantity", aniso::to_string(c.quantity)},
                        {"lower", c.lower},
                        {"upper", c.upper},
                        {"methods", {{"lower", c.lower_method}, {"upper", c.upper_method}}},
                        {"R", c.R},
                        {"area", c.area},
                        {"int_dK", c.int_dK}}
                       .dump(2)
                << "\n";
      return 0;
    }
    if (*sweep_cmd) {
      const auto K = load_body(body_path);
      std::printf("eps,ratio,gap_to_one_third\n");
      for (double eps : parse_list(eps_text)) {
        const double r = aniso::thin_rectangle_ratio(K, eps, a);
        std::printf("%.10g,%.10g,%.10g\n", eps, r, 1.0 / 3.0 - r);
      }
      return 0;
    }
    if (*verify_cmd) {
      const auto spec = aniso::load_suite(suite_path);
      if (verify_cmd->count("--format") == 0 && !spec.format.empty()) format = spec.format;
      if (out_path.empty()) out_path = spec.out;
      const auto records = aniso::run_suite(spec, jobs);
      if (records.empty()) {
        std::cerr << "suite is empty; no report written\n";
        return 0;
      }
      if (out_path.empty()) {
        std::cout << aniso::format_report(records, format);
      } else {
        aniso::emit_report(records, format, out_path);
      }
      int failures = 0;
      for (const auto& r : records) {
        if (!r.pass()) {
          ++failures;
          std::cerr << (allow_fail ? "warning: " : "failed: ") << r.body << " / " << r.domain << " [" << r.status
                    << "] " << r.error << "\n";
        }
      }
      return (failures == 0 || allow_fail) ? 0 : 1;
    }
    if (*conv_cmd) {
      const auto table = aniso::convergence_study(aniso::read_json_file(body_path), aniso::read_json_file(domain_path),
                                                  parse_list(h_text), quantity);
      std::cout << aniso::format_convergence(table);
      if (!table.complete) {
        std::cerr << "incomplete: " << table.error << "\n";
        return 1;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
