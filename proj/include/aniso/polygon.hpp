#pragma once

#include "aniso/convex_body.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <vector>

namespace aniso {

/// A facet {x : normal . x = offset} of a convex polygon, with endpoints.
struct Facet {
  Vec2 normal;  // outward, unit length
  double offset;
  Vec2 a, b;  // counterclockwise endpoints
  double length() const { return (b - a).norm(); }
};

/// Signed area of a closed vertex loop (positive when counterclockwise).
inline double signed_area(const std::vector<Vec2>& pts) {
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) s += cross(pts[i], pts[(i + 1) % pts.size()]);
  return 0.5 * s;
}

inline Vec2 loop_centroid(const std::vector<Vec2>& pts) {
  const double a = signed_area(pts);
  if (a == 0.0) {
    Vec2 c = Vec2::Zero();
    for (const auto& p : pts) c += p;
    return pts.empty() ? c : Vec2(c / static_cast<double>(pts.size()));
  }
  Vec2 c = Vec2::Zero();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2& p = pts[i];
    const Vec2& q = pts[(i + 1) % pts.size()];
    c += (p + q) * cross(p, q);
  }
  return c / (6.0 * a);
}

/// Keeps the part of a convex loop with normal . x <= offset.
inline std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& loop, const Vec2& normal, double offset) {
  std::vector<Vec2> out;
  const std::size_t n = loop.size();
  out.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = loop[i];
    const Vec2& q = loop[(i + 1) % n];
    const double fp = normal.dot(p) - offset;
    const double fq = normal.dot(q) - offset;
    if (fp <= 0.0) out.push_back(p);
    if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
      const double t = fp / (fp - fq);
      out.push_back(p + t * (q - p));
    }
  }
  return out;
}

/// Bounded convex planar domain with counterclockwise vertices.
class Polygon {
 public:
  /// Accepts either orientation; drops repeated and collinear vertices.
  /// Throws DomainError if fewer than three vertices remain, the area is
  /// zero or the loop is not convex.
  explicit Polygon(std::vector<Vec2> vertices) {
    for (const auto& v : vertices) {
      if (!v.allFinite()) throw DomainError("polygon vertices must be finite");
    }
    if (vertices.size() < 3) throw DomainError("polygon needs at least three vertices");
    if (signed_area(vertices) < 0.0) std::reverse(vertices.begin(), vertices.end());
    double scale = 0.0;
    for (const auto& v : vertices) scale = std::max(scale, v.cwiseAbs().maxCoeff());
    const double tol = 1e-13 * std::max(scale, 1e-300);

    bool changed = true;
    while (changed && vertices.size() >= 3) {
      changed = false;
      for (std::size_t i = 0; i < vertices.size(); ++i) {
        const Vec2& prev = vertices[(i + vertices.size() - 1) % vertices.size()];
        const Vec2& cur = vertices[i];
        const Vec2& next = vertices[(i + 1) % vertices.size()];
        const double len = (cur - prev).norm() * (next - cur).norm();
        if ((cur - prev).norm() <= tol || std::abs(cross(cur - prev, next - cur)) <= 1e-13 * len) {
          // duplicate or collinear (a reversal would make the turn negative
          // elsewhere and is caught below)
          if ((cur - prev).norm() <= tol || (cur - prev).dot(next - cur) > 0.0) {
            vertices.erase(vertices.begin() + static_cast<std::ptrdiff_t>(i));
            changed = true;
            break;
          }
        }
      }
    }
    if (vertices.size() < 3) throw DomainError("polygon is degenerate");
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      const Vec2& prev = vertices[(i + vertices.size() - 1) % vertices.size()];
      const Vec2& cur = vertices[i];
      const Vec2& next = vertices[(i + 1) % vertices.size()];
      if (cross(cur - prev, next - cur) <= 0.0) throw DomainError("polygon is not convex");
    }
    if (!(signed_area(vertices) > 0.0)) throw DomainError("polygon has empty interior");
    vertices_ = std::move(vertices);
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      const Vec2& a = vertices_[i];
      const Vec2& b = vertices_[(i + 1) % vertices_.size()];
      const Vec2 e = b - a;
      const Vec2 normal = Vec2(e.y(), -e.x()).normalized();
      facets_.push_back({normal, normal.dot(a), a, b});
    }
  }

  static Polygon rectangle(double half_width, double half_height) {
    return Polygon({{-half_width, -half_height}, {half_width, -half_height}, {half_width, half_height}, {-half_width, half_height}});
  }
  /// Regular n-gon inscribed in the circle of the given radius, with a
  /// vertex on the positive x-axis.
  static Polygon regular(int sides, double radius = 1.0) { return ellipse(radius, radius, sides); }
  /// n-gon inscribed in the ellipse x^2/a^2 + y^2/b^2 = 1.
  static Polygon ellipse(double a, double b, int sides) {
    if (sides < 3) throw DomainError("need at least three sides");
    std::vector<Vec2> vs;
    for (int k = 0; k < sides; ++k) {
      const double t = 2.0 * kPi * k / sides;
      vs.emplace_back(a * std::cos(t), b * std::sin(t));
    }
    return Polygon(vs);
  }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Facet>& facets() const { return facets_; }
  std::size_t size() const { return vertices_.size(); }

  double area() const { return signed_area(vertices_); }
  Vec2 centroid() const { return loop_centroid(vertices_); }
  double diameter() const {
    double d = 0.0;
    for (const auto& p : vertices_) {
      for (const auto& q : vertices_) d = std::max(d, (p - q).norm());
    }
    return d;
  }
  double perimeter() const {
    double s = 0.0;
    for (const auto& f : facets_) s += f.length();
    return s;
  }

  /// Largest normal . x - offset over facets; <= 0 inside.
  double max_violation(const Vec2& x) const {
    double v = -kInf;
    for (const auto& f : facets_) v = std::max(v, f.normal.dot(x) - f.offset);
    return v;
  }
  bool contains(const Vec2& x, double tol = 0.0) const { return max_violation(x) <= tol; }

  /// Euclidean distance from an interior point to the boundary.
  double boundary_distance(const Vec2& x) const { return -max_violation(x); }

  Polygon translated(const Vec2& t) const {
    std::vector<Vec2> vs;
    for (const auto& v : vertices_) vs.push_back(v + t);
    return Polygon(vs);
  }
  Polygon scaled(double s) const { return transformed(s * Mat2::Identity()); }
  Polygon transformed(const Mat2& L) const {
    std::vector<Vec2> vs;
    for (const auto& v : vertices_) vs.push_back(L * v);
    return Polygon(vs);
  }

  /// The polygon gauge about `origin` (which must be interior):
  /// max_j normal_j . (x - origin) / (offset_j - normal_j . origin).
  double gauge(const Vec2& x, const Vec2& origin = Vec2::Zero()) const {
    double g = 0.0;
    for (const auto& f : facets_) {
      const double b = f.offset - f.normal.dot(origin);
      if (!(b > 0.0)) throw DomainError("gauge origin must be interior");
      g = std::max(g, f.normal.dot(x - origin) / b);
    }
    return g;
  }

 private:
  std::vector<Vec2> vertices_;
  std::vector<Facet> facets_;
};

// ---------------------------------------------------------------------------
// Triangle quadrature

struct TriangleRule {
  std::vector<std::array<double, 3>> barycentric;
  std::vector<double> weights;  // sum to 1
  int degree;
};

/// Symmetric rules exact up to the stated degree: 1 (centroid),
/// 2 (edge midpoints) and 5 (seven-point).
inline const TriangleRule& triangle_rule(int degree) {
  static const TriangleRule r1{{{1.0 / 3, 1.0 / 3, 1.0 / 3}}, {1.0}, 1};
  static const TriangleRule r2{{{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 2};
  static const TriangleRule r5 = [] {
    const double s15 = std::sqrt(15.0);
    const double a1 = (6.0 - s15) / 21.0, b1 = (9.0 + 2.0 * s15) / 21.0;
    const double a2 = (6.0 + s15) / 21.0, b2 = (9.0 - 2.0 * s15) / 21.0;
    const double w1 = (155.0 - s15) / 1200.0, w2 = (155.0 + s15) / 1200.0;
    TriangleRule r;
    r.degree = 5;
    r.barycentric = {{1.0 / 3, 1.0 / 3, 1.0 / 3}, {a1, a1, b1}, {a1, b1, a1}, {b1, a1, a1}, {a2, a2, b2}, {a2, b2, a2}, {b2, a2, a2}};
    r.weights = {9.0 / 40.0, w1, w1, w1, w2, w2, w2};
    return r;
  }();
  if (degree <= 1) return r1;
  if (degree == 2) return r2;
  if (degree <= 5) return r5;
  throw DomainError("no triangle rule of the requested degree");
}

template <class F>
double integrate_triangle(const Vec2& a, const Vec2& b, const Vec2& c, F&& f, int degree = 2) {
  const double area = 0.5 * std::abs(cross(b - a, c - a));
  if (area == 0.0) return 0.0;
  const auto& rule = triangle_rule(degree);
  double s = 0.0;
  for (std::size_t k = 0; k < rule.weights.size(); ++k) {
    const auto& l = rule.barycentric[k];
    s += rule.weights[k] * f(Vec2(l[0] * a + l[1] * b + l[2] * c));
  }
  return area * s;
}

/// Integral over a convex loop by fanning from its first vertex.
template <class F>
double integrate_convex(const std::vector<Vec2>& loop, F&& f, int degree = 2) {
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < loop.size(); ++i) s += integrate_triangle(loop[0], loop[i], loop[i + 1], f, degree);
  return s;
}

}  // namespace aniso
