#pragma once
//
// JSON descriptions of bodies and domains.
//
//   body:   {"type": "polytope", "vertices": [[x, y], ...]}
//           {"type": "pball", "p": 3 | "inf", "scales": [sx, sy]}
//           {"type": "ellipsoid", "matrix": [[a, b], [b, c]]}     K = {y : y^T M y <= 1}
//           {"type": "smoothed", "base": <body>, "tau": 0.01}
//   domain: {"type": "polygon", "vertices": [[x, y], ...]}
//           {"type": "rectangle", "half_widths": [a, b]}
//           {"type": "regular", "sides": n, "radius": r}
//           {"type": "ellipse", "semi_axes": [a, b], "sides": n}
//           {"type": "disk", "radius": r, "sides": n}              sides optional
//
// Both may carry an optional "name".
//

#include "aniso/convex_body.hpp"
#include "aniso/polygon.hpp"

#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace aniso {

using json = nlohmann::json;

/// Malformed input file or description.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline Vec2 read_vec2(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw FormatError(std::string(what) + " must be a pair of numbers");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline std::vector<Vec2> read_points(const json& j, const char* what) {
  if (!j.is_array()) throw FormatError(std::string(what) + " must be an array of points");
  std::vector<Vec2> pts;
  for (const auto& p : j) pts.push_back(read_vec2(p, what));
  return pts;
}

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

inline std::string type_of(const json& j) {
  const json& t = field(j, "type");
  if (!t.is_string()) throw FormatError("\"type\" must be a string");
  return t.get<std::string>();
}

}  // namespace detail

inline ConvexBody body_from_json(const json& j) {
  const std::string type = detail::type_of(j);
  if (type == "polytope") return ConvexBody::polytope(detail::read_points(detail::field(j, "vertices"), "vertices"));
  if (type == "pball") {
    const json& p = detail::field(j, "p");
    double exponent;
    if (p.is_string()) {
      if (p.get<std::string>() != "inf") throw FormatError("p must be a number or \"inf\"");
      exponent = kInf;
    } else if (p.is_number()) {
      exponent = p.get<double>();
    } else {
      throw FormatError("p must be a number or \"inf\"");
    }
    const Vec2 scales = j.contains("scales") ? detail::read_vec2(j.at("scales"), "scales") : Vec2(1.0, 1.0);
    return ConvexBody::pball(exponent, scales);
  }
  if (type == "ellipsoid") {
    const json& m = detail::field(j, "matrix");
    if (!m.is_array() || m.size() != 2) throw FormatError("matrix must be 2x2");
    const Vec2 r0 = detail::read_vec2(m[0], "matrix row");
    const Vec2 r1 = detail::read_vec2(m[1], "matrix row");
    Mat2 M;
    M << r0.x(), r0.y(), r1.x(), r1.y();
    return ConvexBody::ellipsoid(M);
  }
  if (type == "smoothed") {
    const json& tau = detail::field(j, "tau");
    if (!tau.is_number()) throw FormatError("tau must be a number");
    return smooth_approx(body_from_json(detail::field(j, "base")), tau.get<double>()).body;
  }
  throw FormatError("unknown body type \"" + type + "\"");
}

/// Number of sides used for a "disk" domain without an explicit count: the
/// edge length is about h, rounded up to a multiple of 8.
inline int disk_sides(double radius, double h) {
  const int n = static_cast<int>(std::ceil(2.0 * kPi * radius / h));
  return std::max(16, 8 * ((n + 7) / 8));
}

/// `h` is only consulted for "disk" domains without "sides".
inline Polygon domain_from_json(const json& j, double h = 0.0) {
  const std::string type = detail::type_of(j);
  if (type == "polygon") return Polygon(detail::read_points(detail::field(j, "vertices"), "vertices"));
  if (type == "rectangle") {
    const Vec2 hw = detail::read_vec2(detail::field(j, "half_widths"), "half_widths");
    if (!(hw.x() > 0.0 && hw.y() > 0.0)) throw DomainError("half widths must be positive");
    return Polygon::rectangle(hw.x(), hw.y());
  }
  auto sides_of = [&](const json& s) {
    if (!s.is_number_integer()) throw FormatError("sides must be an integer");
    return s.get<int>();
  };
  if (type == "regular") {
    const double r = j.value("radius", 1.0);
    return Polygon::regular(sides_of(detail::field(j, "sides")), r);
  }
  if (type == "ellipse") {
    const Vec2 ab = detail::read_vec2(detail::field(j, "semi_axes"), "semi_axes");
    return Polygon::ellipse(ab.x(), ab.y(), sides_of(detail::field(j, "sides")));
  }
  if (type == "disk") {
    const double r = j.value("radius", 1.0);
    if (j.contains("sides")) return Polygon::regular(sides_of(j.at("sides")), r);
    if (!(h > 0.0)) throw FormatError("disk domain without sides needs a mesh size");
    return Polygon::regular(disk_sides(r, h), r);
  }
  throw FormatError("unknown domain type \"" + type + "\"");
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline json body_to_json(const ConvexBody& K) {
  if (const auto* p = K.as<ConvexBody::Polytope>()) {
    json v = json::array();
    for (const auto& x : p->vertices) v.push_back({x.x(), x.y()});
    return {{"type", "polytope"}, {"vertices", v}};
  }
  if (const auto* b = K.as<ConvexBody::PBall>()) {
    return {{"type", "pball"}, {"p", b->p}, {"scales", {b->scales.x(), b->scales.y()}}};
  }
  if (const auto* e = K.as<ConvexBody::Ellipsoid>()) {
    return {{"type", "ellipsoid"}, {"matrix", {{e->matrix(0, 0), e->matrix(0, 1)}, {e->matrix(1, 0), e->matrix(1, 1)}}}};
  }
  if (const auto* s = K.as<ConvexBody::Smoothed>()) {
    return {{"type", "smoothed"}, {"base", body_to_json(*s->base)}, {"tau", s->tau}};
  }
  throw FormatError("body has no file representation: " + K.describe());
}

}  // namespace aniso
