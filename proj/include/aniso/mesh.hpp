#pragma once
//
// P1 triangulations of convex polygons: boundary points at spacing <= h,
// interior points on an equilateral lattice, Delaunay connectivity by
// incremental insertion with Lawson flips, then a few rounds of Laplacian
// smoothing with re-flipping.
//

#include "aniso/polygon.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace aniso {

struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<char> boundary;                 // 1 on boundary vertices
  std::vector<Vec2> outline;                  // vertices of the meshed polygon
  double h = 0.0;

  Polygon domain() const { return Polygon(outline); }

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }

  double triangle_area(std::size_t t) const {
    const auto& tri = triangles[t];
    return 0.5 * cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]);
  }
  double area() const {
    double a = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) a += triangle_area(t);
    return a;
  }
  double min_angle_degrees() const {
    double best = 180.0;
    for (const auto& tri : triangles) {
      for (int k = 0; k < 3; ++k) {
        const Vec2 a = vertices[tri[(k + 1) % 3]] - vertices[tri[k]];
        const Vec2 b = vertices[tri[(k + 2) % 3]] - vertices[tri[k]];
        best = std::min(best, std::atan2(std::abs(cross(a, b)), a.dot(b)) * 180.0 / kPi);
      }
    }
    return best;
  }

  /// Image of the mesh under x -> L x (orientation restored if det L < 0).
  Mesh transformed(const Mat2& L) const {
    Mesh m = *this;
    for (auto& v : m.vertices) v = L * v;
    for (auto& v : m.outline) v = L * v;
    if (L.determinant() < 0.0) {
      for (auto& tri : m.triangles) std::swap(tri[1], tri[2]);
    }
    m.h = h * std::sqrt(std::abs(L.determinant()));
    return m;
  }
  Mesh scaled(double s) const {
    Mesh m = transformed(s * Mat2::Identity());
    m.h = h * s;
    return m;
  }
};

namespace detail {

class DelaunayBuilder {
 public:
  struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> nb;  // nb[i] is across the edge opposite v[i]
    bool alive = true;
  };

  DelaunayBuilder(const Vec2& lo, const Vec2& hi) {
    const Vec2 c = 0.5 * (lo + hi);
    const double ext = 1e3 * std::max((hi - lo).maxCoeff(), 1e-12);
    points_.push_back(c + ext * Vec2(0.0, 2.0));
    points_.push_back(c + ext * Vec2(-std::sqrt(3.0), -1.0));
    points_.push_back(c + ext * Vec2(std::sqrt(3.0), -1.0));
    tris_.push_back({{0, 1, 2}, {-1, -1, -1}, true});
  }

  /// Inserts p; returns its index, or -1 if it coincides with a vertex.
  int insert(const Vec2& p) {
    int edge = -1;
    const int t = locate(p, edge);
    if (t < 0) return -1;
    const int idx = static_cast<int>(points_.size());
    points_.push_back(p);
    if (edge < 0) split_inside(t, idx); else split_edge(t, edge, idx);
    last_ = t;
    return idx;
  }

  std::vector<Vec2>& points() { return points_; }
  const std::vector<Tri>& triangles() const { return tris_; }
  static bool is_super(int v) { return v < 3; }

  /// Restores the Delaunay property over all real interior edges after
  /// vertices have been moved.
  void flip_all() {
    for (int pass = 0; pass < 100; ++pass) {
      bool any = false;
      for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
        if (!tris_[t].alive) continue;
        for (int i = 0; i < 3; ++i) {
          const int u = tris_[t].nb[i];
          if (u < 0) continue;
          if (is_super(tris_[t].v[0]) || is_super(tris_[t].v[1]) || is_super(tris_[t].v[2])) continue;
          const int j = index_of_neighbor(u, t);
          const int d = tris_[u].v[j];
          if (is_super(d)) continue;
          if (incircle(tris_[t].v, d) > 0.0 && convex_quad(t, i, u, j)) {
            flip(t, i);
            any = true;
            break;
          }
        }
      }
      if (!any) return;
    }
  }

  bool orientation_ok(int vertex, const Vec2& candidate, const std::vector<std::vector<int>>& incident) const {
    for (int t : incident[vertex]) {
      const auto& v = tris_[t].v;
      Vec2 p[3];
      for (int k = 0; k < 3; ++k) p[k] = v[k] == vertex ? candidate : points_[v[k]];
      const double a = cross(p[1] - p[0], p[2] - p[0]);
      if (!(a > 0.0)) return false;
    }
    return true;
  }

 private:
  static double orient(const Vec2& a, const Vec2& b, const Vec2& p) { return cross(b - a, p - a); }

  bool near_zero(const Vec2& a, const Vec2& b, const Vec2& p, double o) const {
    return std::abs(o) <= 1e-12 * (b - a).norm() * ((p - a).norm() + (p - b).norm());
  }

  int locate(const Vec2& p, int& edge) {
    int t = last_;
    while (!tris_[t].alive) --t;
    for (int steps = 0; steps < 10000000; ++steps) {
      const auto& tri = tris_[t];
      int next = -1;
      for (int k = 0; k < 3; ++k) {
        const int i = (k + steps) % 3;
        const Vec2& a = points_[tri.v[(i + 1) % 3]];
        const Vec2& b = points_[tri.v[(i + 2) % 3]];
        const double o = orient(a, b, p);
        if (o < 0.0 && !near_zero(a, b, p, o)) { next = tri.nb[i]; break; }
      }
      if (next < 0) {
        edge = -1;
        int zero_edges = 0;
        for (int i = 0; i < 3; ++i) {
          const Vec2& a = points_[tri.v[(i + 1) % 3]];
          const Vec2& b = points_[tri.v[(i + 2) % 3]];
          if (near_zero(a, b, p, orient(a, b, p))) { edge = i; ++zero_edges; }
        }
        for (int i = 0; i < 3; ++i) {
          if ((points_[tri.v[i]] - p).norm() == 0.0) return -1;
        }
        if (zero_edges > 1) return -1;
        return t;
      }
      t = next;
    }
    throw std::runtime_error("point location failed");
  }

  int index_of_neighbor(int t, int other) const {
    for (int i = 0; i < 3; ++i) {
      if (tris_[t].nb[i] == other) return i;
    }
    throw std::logic_error("broken triangle adjacency");
  }

  void relink(int t, int old_nb, int new_nb) {
    if (t < 0) return;
    for (int i = 0; i < 3; ++i) {
      if (tris_[t].nb[i] == old_nb) { tris_[t].nb[i] = new_nb; return; }
    }
  }

  double incircle(const std::array<int, 3>& v, int d) const {
    const Vec2& pd = points_[d];
    long double m[3][3];
    for (int k = 0; k < 3; ++k) {
      const long double dx = static_cast<long double>(points_[v[k]].x()) - pd.x();
      const long double dy = static_cast<long double>(points_[v[k]].y()) - pd.y();
      m[k][0] = dx;
      m[k][1] = dy;
      m[k][2] = dx * dx + dy * dy;
    }
    const long double det = m[0][0] * (m[1][1] * m[2][2] - m[2][1] * m[1][2]) -
                            m[1][0] * (m[0][1] * m[2][2] - m[2][1] * m[0][2]) +
                            m[2][0] * (m[0][1] * m[1][2] - m[1][1] * m[0][2]);
    return static_cast<double>(det);
  }

  bool convex_quad(int t, int i, int u, int j) const {
    const Vec2& p = points_[tris_[t].v[i]];
    const Vec2& b = points_[tris_[t].v[(i + 1) % 3]];
    const Vec2& c = points_[tris_[t].v[(i + 2) % 3]];
    const Vec2& d = points_[tris_[u].v[j]];
    return orient(p, b, d) > 0.0 && orient(p, d, c) > 0.0;
  }

  // t = (p, b, c) with p = v[i]; u across bc holds d. Afterwards t = (p, b, d)
  // and u = (p, d, c).
  void flip(int t, int i) {
    const int u = tris_[t].nb[i];
    const int j = index_of_neighbor(u, t);
    const int p = tris_[t].v[i], b = tris_[t].v[(i + 1) % 3], c = tris_[t].v[(i + 2) % 3];
    const int d = tris_[u].v[j];
    const int t_opp_b = tris_[t].nb[(i + 1) % 3];
    const int t_opp_c = tris_[t].nb[(i + 2) % 3];
    const int u_opp_c = tris_[u].nb[(j + 1) % 3];
    const int u_opp_b = tris_[u].nb[(j + 2) % 3];
    tris_[t] = {{p, b, d}, {u_opp_c, u, t_opp_c}, true};
    tris_[u] = {{p, d, c}, {u_opp_b, t_opp_b, t}, true};
    relink(u_opp_c, u, t);
    relink(t_opp_b, t, u);
  }

  void legalize(int t) {
    // p sits at index 0 of t; test the edge opposite it.
    std::vector<int> stack{t};
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      const int u = tris_[cur].nb[0];
      if (u < 0) continue;
      const int j = index_of_neighbor(u, cur);
      const int d = tris_[u].v[j];
      if (incircle(tris_[cur].v, d) > 0.0) {
        flip(cur, 0);
        stack.push_back(cur);
        stack.push_back(u);
      }
    }
  }

  void split_inside(int t, int p) {
    const Tri old = tris_[t];
    const int base = static_cast<int>(tris_.size());
    const int ids[3] = {t, base, base + 1};
    tris_.resize(tris_.size() + 2);
    for (int i = 0; i < 3; ++i) {
      tris_[ids[i]] = {{p, old.v[(i + 1) % 3], old.v[(i + 2) % 3]}, {old.nb[i], ids[(i + 1) % 3], ids[(i + 2) % 3]}, true};
      relink(old.nb[i], t, ids[i]);
    }
    for (int id : ids) legalize(id);
  }

  void split_edge(int t, int i, int p) {
    const Tri old = tris_[t];
    const int a = old.v[i], b = old.v[(i + 1) % 3], c = old.v[(i + 2) % 3];
    const int u = old.nb[i];
    const int t1 = t;
    const int t2 = static_cast<int>(tris_.size());
    if (u < 0) {
      tris_.resize(tris_.size() + 1);
      tris_[t1] = {{p, a, b}, {old.nb[(i + 2) % 3], -1, t2}, true};
      tris_[t2] = {{p, c, a}, {old.nb[(i + 1) % 3], t1, -1}, true};
      relink(old.nb[(i + 1) % 3], t, t2);
      legalize(t1);
      legalize(t2);
      return;
    }
    const Tri uo = tris_[u];
    const int j = index_of_neighbor(u, t);
    const int w = uo.v[j];
    const int u1 = u;
    const int u2 = t2 + 1;
    tris_.resize(tris_.size() + 2);
    // All four keep p at index 0.
    tris_[t1] = {{p, a, b}, {old.nb[(i + 2) % 3], u2, t2}, true};
    tris_[t2] = {{p, c, a}, {old.nb[(i + 1) % 3], t1, u1}, true};
    tris_[u1] = {{p, w, c}, {uo.nb[(j + 2) % 3], t2, u2}, true};
    tris_[u2] = {{p, b, w}, {uo.nb[(j + 1) % 3], u1, t1}, true};
    relink(old.nb[(i + 1) % 3], t, t2);
    relink(uo.nb[(j + 1) % 3], u, u2);
    for (int id : {t1, t2, u1, u2}) legalize(id);
  }

  std::vector<Vec2> points_;
  std::vector<Tri> tris_;
  int last_ = 0;
};

inline double min_angle_degrees(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 p[3] = {a, b, c};
  double best = 180.0;
  for (int k = 0; k < 3; ++k) {
    const Vec2 u = p[(k + 1) % 3] - p[k];
    const Vec2 w = p[(k + 2) % 3] - p[k];
    best = std::min(best, std::atan2(std::abs(cross(u, w)), u.dot(w)) * 180.0 / M_PI);
  }
  return best;
}

inline Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 u = b - a, w = c - a;
  const double d = 2.0 * cross(u, w);
  return a + Vec2(w.y() * u.squaredNorm() - u.y() * w.squaredNorm(),
                  u.x() * w.squaredNorm() - w.x() * u.squaredNorm()) / d;
}

// Ruppert-style cleanup: circumcentres of triangles below the quality
// threshold are inserted unless they fall inside the diametral circle of a
// boundary segment, in which case that segment is bisected instead.
// Triangles touching a domain corner sharper than 60 degrees are left alone
// since no interior point can improve them.
inline void refine_quality(DelaunayBuilder& dt, const Polygon& omega, const std::vector<int>& boundary_ids,
                           std::vector<char>& on_boundary) {
  constexpr double kQuality = 20.0;
  auto& pts = dt.points();
  std::vector<std::pair<int, int>> segments;
  for (std::size_t i = 0; i < boundary_ids.size(); ++i) {
    segments.emplace_back(boundary_ids[i], boundary_ids[(i + 1) % boundary_ids.size()]);
  }
  std::vector<char> sharp(pts.size(), 0);
  const auto& corners = omega.vertices();
  for (std::size_t i = 0; i < corners.size(); ++i) {
    const Vec2& prev = corners[(i + corners.size() - 1) % corners.size()];
    const Vec2& next = corners[(i + 1) % corners.size()];
    const Vec2 u = prev - corners[i], w = next - corners[i];
    const double corner = std::atan2(std::abs(cross(u, w)), u.dot(w)) * 180.0 / M_PI;
    if (corner >= 60.0) continue;
    for (int id : boundary_ids) {
      if ((pts[id] - corners[i]).norm() == 0.0) sharp[id] = 1;
    }
  }

  const std::size_t budget = pts.size() + 64;
  std::size_t inserted = 0;
  for (int sweep = 0; sweep < 64 && inserted < budget; ++sweep) {
    std::vector<std::pair<int, std::array<int, 3>>> bad;
    const auto& tris = dt.triangles();
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      const auto& tri = tris[t];
      if (!tri.alive) continue;
      bool skip = false;
      for (int v : tri.v) skip = skip || DelaunayBuilder::is_super(v) || sharp[v];
      if (skip) continue;
      if (min_angle_degrees(pts[tri.v[0]], pts[tri.v[1]], pts[tri.v[2]]) < kQuality) bad.emplace_back(t, tri.v);
    }
    if (bad.empty()) return;
    bool progress = false;
    for (const auto& [t, v] : bad) {
      if (inserted >= budget) return;
      const auto& cur = dt.triangles()[t];
      if (!cur.alive || cur.v != v) continue;
      const Vec2 c = circumcenter(pts[v[0]], pts[v[1]], pts[v[2]]);
      if (!c.allFinite()) continue;
      int hit = -1;
      for (std::size_t s = 0; s < segments.size(); ++s) {
        const Vec2& a = pts[segments[s].first];
        const Vec2& b = pts[segments[s].second];
        if ((c - a).dot(c - b) < 0.0) { hit = static_cast<int>(s); break; }
      }
      if (hit < 0 && omega.max_violation(c) >= 0.0) continue;
      int id;
      if (hit >= 0) {
        const auto [a, b] = segments[hit];
        id = dt.insert(0.5 * (pts[a] + pts[b]));
        if (id < 0) continue;
        segments[hit].second = id;
        segments.emplace_back(id, b);
      } else {
        id = dt.insert(c);
        if (id < 0) continue;
      }
      on_boundary.resize(pts.size(), 0);
      sharp.resize(pts.size(), 0);
      if (hit >= 0) on_boundary[id] = 1;
      ++inserted;
      progress = true;
    }
    if (!progress) return;
  }
}

}  // namespace detail

/// Triangulates a convex polygon with target edge length h. Requires
/// h < diameter / 2.
inline Mesh triangulate(const Polygon& omega, double h) {
  if (!(h > 0.0)) throw DomainError("mesh size must be positive");
  if (!(h < 0.5 * omega.diameter())) throw DomainError("mesh size too large for the domain");

  Vec2 lo = omega.vertices()[0], hi = lo;
  for (const auto& v : omega.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  detail::DelaunayBuilder dt(lo, hi);
  std::vector<int> boundary_ids;

  for (const auto& f : omega.facets()) {
    const int pieces = std::max(1, static_cast<int>(std::ceil(f.length() / h - 1e-9)));
    for (int k = 0; k < pieces; ++k) {
      const double s = static_cast<double>(k) / pieces;
      const int id = dt.insert((1.0 - s) * f.a + s * f.b);
      if (id >= 0) boundary_ids.push_back(id);
    }
  }

  const Vec2 c = omega.centroid();
  const double dy = h * std::sqrt(3.0) / 2.0;
  const double margin = 0.55 * h;
  const int jmin = static_cast<int>(std::floor((lo.y() - c.y()) / dy)) - 1;
  const int jmax = static_cast<int>(std::ceil((hi.y() - c.y()) / dy)) + 1;
  for (int j = jmin; j <= jmax; ++j) {
    const double y = c.y() + j * dy;
    const double shift = (j % 2 == 0) ? 0.0 : 0.5 * h;
    const int imin = static_cast<int>(std::floor((lo.x() - c.x()) / h)) - 1;
    const int imax = static_cast<int>(std::ceil((hi.x() - c.x()) / h)) + 1;
    for (int i = imin; i <= imax; ++i) {
      const Vec2 p(c.x() + shift + i * h, y);
      if (omega.boundary_distance(p) >= margin) dt.insert(p);
    }
  }

  auto& pts = dt.points();
  std::vector<char> on_boundary(pts.size(), 0);
  for (int id : boundary_ids) on_boundary[id] = 1;

  // Laplacian smoothing of interior vertices, keeping every incident
  // triangle positively oriented, followed by Delaunay re-flips.
  for (int round = 0; round < 4; ++round) {
    std::vector<std::vector<int>> incident(pts.size());
    std::vector<std::vector<int>> nbrs(pts.size());
    const auto& tris = dt.triangles();
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      if (!tris[t].alive) continue;
      for (int k = 0; k < 3; ++k) {
        incident[tris[t].v[k]].push_back(t);
        nbrs[tris[t].v[k]].push_back(tris[t].v[(k + 1) % 3]);
      }
    }
    for (std::size_t v = 3; v < pts.size(); ++v) {
      if (on_boundary[v] || nbrs[v].empty()) continue;
      Vec2 avg = Vec2::Zero();
      for (int w : nbrs[v]) avg += pts[w];
      avg /= static_cast<double>(nbrs[v].size());
      const Vec2 target = 0.5 * (pts[v] + avg);
      if (dt.orientation_ok(static_cast<int>(v), target, incident)) pts[v] = target;
    }
    dt.flip_all();
  }

  detail::refine_quality(dt, omega, boundary_ids, on_boundary);

  // Compact: drop the super vertices and their triangles.
  Mesh mesh;
  mesh.h = h;
  mesh.outline = omega.vertices();
  std::vector<int> remap(pts.size(), -1);
  for (std::size_t v = 3; v < pts.size(); ++v) {
    remap[v] = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(pts[v]);
    mesh.boundary.push_back(on_boundary[v]);
  }
  for (const auto& tri : dt.triangles()) {
    if (!tri.alive) continue;
    if (detail::DelaunayBuilder::is_super(tri.v[0]) || detail::DelaunayBuilder::is_super(tri.v[1]) ||
        detail::DelaunayBuilder::is_super(tri.v[2])) continue;
    mesh.triangles.push_back({remap[tri.v[0]], remap[tri.v[1]], remap[tri.v[2]]});
  }
  const double area = mesh.area();
  if (std::abs(area - omega.area()) > 1e-9 * omega.area()) {
    throw std::runtime_error("triangulation does not cover the domain");
  }
  return mesh;
}

}  // namespace aniso
