#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

using namespace aniso;
using testsupport::Rng;

namespace {

const Polygon kUnitSquare({{0, 0}, {1, 0}, {1, 1}, {0, 1}});

double smallest_corner_degrees(const Polygon& omega) {
  const auto& v = omega.vertices();
  const std::size_t n = v.size();
  double best = 180.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = v[(i + n - 1) % n] - v[i];
    const Vec2 b = v[(i + 1) % n] - v[i];
    const double ang = std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0));
    best = std::min(best, ang * 180.0 / M_PI);
  }
  return best;
}

// A corner sharper than the target angle cannot be split without Steiner
// points on its vertex, so the bound is capped by the domain itself.
void expect_valid(const Mesh& m, const Polygon& omega, double min_angle = 15.0) {
  min_angle = std::min(min_angle, smallest_corner_degrees(omega) - 1e-9);
  ASSERT_EQ(m.boundary.size(), m.num_vertices());
  for (std::size_t t = 0; t < m.num_triangles(); ++t) ASSERT_GT(m.triangle_area(t), 0.0) << "triangle " << t;
  EXPECT_GE(m.min_angle_degrees(), min_angle);
  EXPECT_NEAR(m.area(), omega.area(), 1e-12 * omega.area());

  const double scale = std::max(1.0, omega.diameter());
  for (std::size_t v = 0; v < m.num_vertices(); ++v) {
    const double viol = omega.max_violation(m.vertices[v]);
    if (m.boundary[v]) {
      EXPECT_NEAR(viol, 0.0, 1e-12 * scale) << "boundary vertex " << v;
    } else {
      EXPECT_LT(viol, 0.0) << "interior vertex " << v;
    }
  }

  // conformity: interior edges are shared by two triangles with opposite
  // orientation, edges used once lie on the boundary
  std::map<std::pair<int, int>, int> directed;
  for (const auto& tri : m.triangles) {
    for (int k = 0; k < 3; ++k) ++directed[{tri[k], tri[(k + 1) % 3]}];
  }
  std::size_t undirected = 0;
  for (const auto& [e, count] : directed) {
    EXPECT_EQ(count, 1);
    const bool twin = directed.count({e.second, e.first}) > 0;
    if (!twin) {
      EXPECT_TRUE(m.boundary[e.first] && m.boundary[e.second]);
      const Vec2 mid = 0.5 * (m.vertices[e.first] + m.vertices[e.second]);
      EXPECT_NEAR(omega.max_violation(mid), 0.0, 1e-12 * scale);
      ++undirected;
    } else if (e.first < e.second) {
      ++undirected;
    }
  }
  // Euler characteristic of a disk
  EXPECT_EQ(static_cast<long>(m.num_vertices()) - static_cast<long>(undirected) + static_cast<long>(m.num_triangles()), 1);
}

}  // namespace

TEST(Triangulate, UnitSquareCoarse) {
  const Mesh m = triangulate(kUnitSquare, 0.5);
  EXPECT_GE(m.num_vertices(), 9u);
  EXPECT_NEAR(m.area(), 1.0, 1e-12);
  expect_valid(m, kUnitSquare);
}

TEST(Triangulate, VertexCountScalesInverseSquare) {
  for (double h : {0.1, 0.05, 0.025}) {
    const double ratio = static_cast<double>(triangulate(kUnitSquare, h / 2).num_vertices()) /
                         static_cast<double>(triangulate(kUnitSquare, h).num_vertices());
    EXPECT_GE(ratio, 3.5) << h;
    EXPECT_LE(ratio, 4.5) << h;
  }
}

TEST(Triangulate, HexagonAngles) {
  const Polygon hex = Polygon::regular(6);
  expect_valid(triangulate(hex, 0.1), hex, 15.0);
}

TEST(Triangulate, SuiteDomains) {
  for (const char* name : {"disk128", "square", "rectangle", "thin", "pentagon", "diamond", "ellipse128"}) {
    const Polygon omega = domain_from_json(read_json_file(testsupport::data_path(std::string("domains/") + name + ".json")));
    SCOPED_TRACE(name);
    expect_valid(triangulate(omega, 0.04), omega, 20.0);
  }
}

TEST(Triangulate, RandomPolygons) {
  Rng rng(51);
  for (int t = 0; t < 15; ++t) {
    const Polygon omega = rng.polygon();
    const double h = omega.diameter() * rng.uniform(0.02, 0.1);
    SCOPED_TRACE(t);
    expect_valid(triangulate(omega, h), omega);
  }
}

TEST(Triangulate, ThinSlivers) {
  const Polygon thin = Polygon::rectangle(0.05, 1.0);
  expect_valid(triangulate(thin, 0.02), thin);
  const Polygon needle({{0, 0}, {3, 0}, {3, 0.2}});
  expect_valid(triangulate(needle, 0.05), needle);
}

TEST(Triangulate, Deterministic) {
  const Polygon omega = Polygon::regular(7, 1.3);
  const Mesh a = triangulate(omega, 0.05), b = triangulate(omega, 0.05);
  ASSERT_EQ(a.num_vertices(), b.num_vertices());
  ASSERT_EQ(a.triangles, b.triangles);
  for (std::size_t i = 0; i < a.num_vertices(); ++i) EXPECT_EQ(a.vertices[i], b.vertices[i]);
}

TEST(Triangulate, RejectsBadMeshSize) {
  EXPECT_THROW(triangulate(kUnitSquare, 0.8), DomainError);
  EXPECT_THROW(triangulate(kUnitSquare, 0.0), DomainError);
  EXPECT_THROW(triangulate(kUnitSquare, -0.1), DomainError);
}

TEST(Mesh, TransformKeepsOrientation) {
  const Mesh m = triangulate(Polygon::regular(5), 0.2);
  const Mat2 reflect = (Mat2() << -1.0, 0.0, 0.3, 1.0).finished();
  const Mesh r = m.transformed(reflect);
  for (std::size_t t = 0; t < r.num_triangles(); ++t) EXPECT_GT(r.triangle_area(t), 0.0);
  EXPECT_NEAR(r.area(), m.area(), 1e-12);
  EXPECT_NEAR(r.domain().area(), m.area(), 1e-12);
  const Mesh s = m.scaled(2.0);
  EXPECT_NEAR(s.area(), 4.0 * m.area(), 1e-12);
  EXPECT_DOUBLE_EQ(s.h, 0.4);
}
