#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace aniso;
using testsupport::Rng;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// For ubar = (1 - g^2)/4 with g the polygon gauge about c: on the cone over
// facet j, g is affine from 0 at c to 1 on the facet, so the mean of g^2 is
// 1/2, giving int ubar = |Omega| / 8 and int h_K^2(grad ubar) =
// sum_j (h_K(nu_j) / b_j)^2 / 4 * |cone_j| / 2.
double ubar_oracle(const ConvexBody& K, const Polygon& omega, const Vec2& c) {
  double den = 0.0;
  for (const auto& f : omega.facets()) {
    const double b = f.offset - f.normal.dot(c);
    const double cone = 0.5 * cross(f.a - c, f.b - c);
    const double hk = K.support(f.normal) / b;
    den += 0.25 * hk * hk * cone * 0.5;
  }
  const double num = omega.area() / 8.0;
  return num * num / den;
}

// Midpoint-rule integral of d_K over the bounding box.
double grid_integral_distance(const ConvexBody& K, const Polygon& omega, int n) {
  Vec2 lo = omega.vertices()[0], hi = lo;
  for (const auto& v : omega.vertices()) lo = lo.cwiseMin(v), hi = hi.cwiseMax(v);
  const double dx = (hi.x() - lo.x()) / n, dy = (hi.y() - lo.y()) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vec2 x(lo.x() + (i + 0.5) * dx, lo.y() + (j + 0.5) * dy);
      if (omega.contains(x)) s += aniso_distance(K, x, omega);
    }
  }
  return s * dx * dy;
}

// Closed-form thin-rectangle terms for the Euclidean disk (h_K(e1) = 1),
// rectangle [-eps, eps] x [-1, 1].
double disk_thin_ratio(double eps) {
  const double center = 4.0 * eps * (1.0 - eps) * eps * eps / 3.0;
  const double ends_u = 2.0 * std::pow(eps, 4) / 3.0;
  const double ends_e = 44.0 * std::pow(eps, 4) / 45.0;
  const double s = center + ends_u;
  return s * s / (center + ends_e) / (eps * eps * 4.0 * eps);
}

}  // namespace

TEST(SandwichConstants, Planar) {
  const auto [a, b, c, d] = sandwich_constants(2);
  EXPECT_DOUBLE_EQ(a, 0.125);
  EXPECT_DOUBLE_EQ(b, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(c, kPi * kPi / 4.0);
  EXPECT_NEAR(d, 5.783185962946783, 1e-11);
  EXPECT_LT(a, b);
}

TEST(SandwichConstants, Spatial) {
  const auto [a, b, c, d] = sandwich_constants(3);
  EXPECT_DOUBLE_EQ(a, 1.0 / 15.0);
  EXPECT_DOUBLE_EQ(b, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(c, kPi * kPi / 4.0);
  EXPECT_NEAR(d, kPi * kPi, 1e-10);
  EXPECT_THROW(sandwich_constants(0), DomainError);
}

// --- ubar --------------------------------------------------------------------

TEST(TorsionLowerUbar, DiskEqualsBallValue) {
  const Polygon omega = Polygon::regular(256);
  const double v = torsion_lower_ubar(ConvexBody::disk(), omega);
  EXPECT_LT(rel(v, kPi / 8.0), 0.002);
  const double b = std::cos(kPi / 256);
  EXPECT_NEAR(v, omega.area() * b * b / 8.0, 1e-12);
}

TEST(TorsionLowerUbar, SquareIsExact) {
  EXPECT_NEAR(torsion_lower_ubar(ConvexBody::square(), Polygon::rectangle(1, 1)), 0.5, 1e-14);
}

TEST(TorsionLowerUbar, MatchesConeOracle) {
  Rng rng(61);
  for (int t = 0; t < 20; ++t) {
    const Polygon omega = rng.polygon();
    for (const auto& [name, K] : testsupport::suite_bodies()) {
      const Vec2 c = aniso_inradius(K, omega).center;
      const double oracle = ubar_oracle(K, omega, c);
      EXPECT_NEAR(torsion_lower_ubar(K, omega), oracle, 1e-12 * oracle) << name;
      EXPECT_NEAR(torsion_lower_ubar(K, omega, 5), oracle, 1e-12 * oracle) << name;
      const Vec2 other = 0.7 * c + 0.3 * omega.centroid();
      EXPECT_NEAR(torsion_lower_ubar(K, omega, 2, other), ubar_oracle(K, omega, other), 1e-12 * oracle) << name;
    }
  }
}

TEST(TorsionLowerUbar, BelowSolvedTorsion) {
  const Polygon omega = Polygon::rectangle(1, 1);
  const double T = solve_torsion(ConvexBody::disk(), triangulate(omega, 0.04)).value;
  EXPECT_LE(torsion_lower_ubar(ConvexBody::disk(), omega), T);
}

TEST(TorsionLowerUbar, OriginMustBeInterior) {
  const Polygon sq = Polygon::rectangle(1, 1);
  EXPECT_THROW(torsion_lower_ubar(ConvexBody::disk(), sq, 2, Vec2(1, 0)), DomainError);
  EXPECT_THROW(torsion_lower_ubar(ConvexBody::disk(), sq, 2, Vec2(2, 0)), DomainError);
}

// --- distance integral and refined bound ----------------------------------

TEST(IntegralDistance, MatchesGridQuadrature) {
  Rng rng(62);
  for (int t = 0; t < 4; ++t) {
    const Polygon omega = rng.polygon();
    for (const auto& [name, K] : testsupport::suite_bodies()) {
      const double exact = integral_distance(K, omega);
      EXPECT_NEAR(exact, grid_integral_distance(K, omega, 600), 2e-3 * exact) << name;
    }
  }
}

TEST(IntegralDistance, RegularPolygonClosedForm) {
  // apex-at-centre cones: d = b (1 - g), mean of g is 2/3
  const Polygon omega = Polygon::regular(256);
  const double b = std::cos(kPi / 256);
  EXPECT_NEAR(integral_distance(ConvexBody::disk(), omega), b * omega.area() / 3.0, 1e-13);
}

TEST(TorsionUpperRefined, DiskPolygon) {
  const Polygon omega = Polygon::regular(256);
  const double b = std::cos(kPi / 256);
  const double v = torsion_upper_refined(ConvexBody::disk(), omega);
  EXPECT_NEAR(v, 5.0 * b * b * omega.area() / 18.0, 1e-12);
  EXPECT_LT(rel(v, 5.0 * kPi / 18.0), 1e-3);
  EXPECT_GE(v, kPi / 8.0);
}

TEST(TorsionUpperRefined, StrictlyBelowPlainBound) {
  Rng rng(63);
  for (int t = 0; t < 30; ++t) {
    const Polygon omega = rng.polygon();
    for (const auto& [name, K] : testsupport::suite_bodies()) {
      const double R = aniso_inradius(K, omega).R;
      EXPECT_LT(torsion_upper_refined(K, omega), R * R * omega.area() / 3.0 - 1e-10) << name;
    }
  }
}

TEST(TorsionUpperRefined, ThinRectangleApproachesOneThird) {
  double prev_gap = kInf;
  for (double eps : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
    const Polygon omega = Polygon::rectangle(eps, 1.0);
    const double ratio = torsion_upper_refined(ConvexBody::disk(), omega) / (eps * eps * omega.area());
    const double gap = 1.0 / 3.0 - ratio;
    EXPECT_GT(gap, 0.0);
    EXPECT_LT(gap, prev_gap);
    prev_gap = gap;
  }
  EXPECT_LT(prev_gap, 0.01);
}

// --- barrier -----------------------------------------------------------------

TEST(TorsionUpperBarrier, SquareClosedForm) {
  // four cones with t = delta in [0, 1] and width 2 (1 - t)
  const Polygon sq = Polygon::rectangle(1, 1);
  for (double eps : {0.0, 1e-3, 0.1, 1.0}) {
    EXPECT_NEAR(torsion_upper_barrier(ConvexBody::square(), sq, eps), (3.0 + 7.0 * eps) / 3.0, 1e-13) << eps;
  }
}

TEST(TorsionUpperBarrier, MonotoneInEps) {
  Rng rng(64);
  for (int t = 0; t < 10; ++t) {
    const Polygon omega = rng.polygon();
    for (const auto& [name, K] : testsupport::suite_bodies()) {
      double prev = -kInf;
      for (double eps : {0.0, 1e-3, 0.1}) {
        const double v = torsion_upper_barrier(K, omega, eps);
        EXPECT_GT(v, prev) << name;
        prev = v;
      }
    }
  }
  EXPECT_THROW(torsion_upper_barrier(ConvexBody::disk(), Polygon::rectangle(1, 1), -0.1), DomainError);
}

TEST(TorsionUpperBarrier, FieldIsContinuousNonnegativeAndVanishesOnBoundary) {
  Rng rng(65);
  for (int t = 0; t < 10; ++t) {
    const Polygon omega = rng.polygon();
    for (const auto& [name, K] : testsupport::suite_bodies()) {
      const double R = aniso_inradius(K, omega).R;
      const auto cells = facet_decomposition(K, omega);
      auto u = [&](const FacetCell& c, const Vec2& x) {
        const double d = c.delta(x);
        return -0.5 * d * d + R * d;
      };
      for (std::size_t i = 0; i < cells.size(); ++i) {
        for (const auto& v : cells[i].region) {
          EXPECT_GE(u(cells[i], v), -1e-12) << name;
          for (std::size_t j = 0; j < cells.size(); ++j) {
            // vertices shared with another cell carry the same value there
            if (j != i && Polygon(cells[j].region).max_violation(v) <= 1e-12) {
              EXPECT_NEAR(u(cells[i], v), u(cells[j], v), 1e-9) << name;
            }
          }
        }
        const Facet& f = omega.facets()[static_cast<std::size_t>(cells[i].facet)];
        EXPECT_NEAR(u(cells[i], 0.5 * (f.a + f.b)), 0.0, 1e-12) << name;
      }
    }
  }
}

TEST(TorsionUpperBarrier, AboveSolvedTorsion) {
  const Polygon rect = Polygon::rectangle(2, 1);
  const double T = solve_torsion(ConvexBody::disk(), triangulate(rect, 0.05)).value;
  const double b0 = torsion_upper_barrier(ConvexBody::disk(), rect, 0.0);
  const double refined = torsion_upper_refined(ConvexBody::disk(), rect);
  EXPECT_GE(b0, T);
  EXPECT_GE(refined, T);
  EXPECT_LE(b0, refined + 1.0 / 6.0 * 8.0);
}

// --- bundles -------------------------------------------------------------------

TEST(TorsionBounds, OrderedWithMethods) {
  Rng rng(66);
  for (int t = 0; t < 10; ++t) {
    const Polygon omega = rng.polygon();
    for (const auto& [name, K] : testsupport::suite_bodies()) {
      const BoundCertificate c = torsion_bounds(K, omega);
      EXPECT_EQ(c.quantity, Quantity::Torsion);
      EXPECT_LE(c.lower, c.upper) << name;
      EXPECT_EQ(c.lower_method, "ubar_gauge_quotient");
      EXPECT_TRUE(c.upper_method == "facet_barrier_eps_1e-3" || c.upper_method == "refined_remainder");
      EXPECT_DOUBLE_EQ(c.upper, std::min(torsion_upper_barrier(K, omega, 1e-3), torsion_upper_refined(K, omega)));
      EXPECT_DOUBLE_EQ(c.area, omega.area());
    }
  }
}

TEST(EigenBounds, InradiusScaling) {
  const BoundCertificate one = eigen_bounds(ConvexBody::disk(), Polygon::rectangle(1, 1));
  EXPECT_NEAR(one.R, 1.0, 1e-12);
  EXPECT_NEAR(one.lower, 2.4674011002723395, 1e-10);
  EXPECT_NEAR(one.upper, 5.783185962946783, 1e-10);
  const BoundCertificate two = eigen_bounds(ConvexBody::disk(), Polygon::rectangle(2, 2));
  EXPECT_NEAR(two.lower, 0.6168502750680849, 1e-10);
  EXPECT_NEAR(two.upper, 1.4457964907366958, 1e-10);
  EXPECT_EQ(two.quantity, Quantity::Eigenvalue);
  EXPECT_LT(two.lower, two.upper);
}

TEST(EigenBounds, DiskMatchesSolverAtUpperEnd) {
  const Polygon omega = Polygon::regular(128);
  const BoundCertificate c = eigen_bounds(ConvexBody::disk(), omega);
  const double lambda = solve_eigen(ConvexBody::disk(), triangulate(omega, 0.03)).value;
  EXPECT_LT(rel(lambda, c.upper), 0.01);
}

// --- thin rectangle -----------------------------------------------------------

TEST(ThinRectangle, DiskClosedForm) {
  for (double eps : {0.2, 0.1, 0.05, 0.025}) {
    EXPECT_NEAR(thin_rectangle_ratio(ConvexBody::disk(), eps), disk_thin_ratio(eps), 1e-12) << eps;
  }
  EXPECT_GE(thin_rectangle_ratio(ConvexBody::disk(), 0.05), 0.30);
}

TEST(ThinRectangle, SquareEndCapsMatchMidpointRule) {
  const ConvexBody K = ConvexBody::square();
  const double eps = 0.1;
  const ThinRectangleTerms t = thin_rectangle_terms(K, eps, 1.0);
  const int n = 1500;
  const double hx = 2 * eps / n, hs = eps / n;
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = -eps + (i + 0.5) * hx, s = (j + 0.5) * hs;
      const double g = std::abs(s * x / eps) + (eps * eps - x * x) / (2 * eps);
      e += g * g;
    }
  }
  e *= 2 * hx * hs;
  EXPECT_NEAR(t.energy_ends, e, 1e-6 * e);
}

TEST(ThinRectangle, IncreasingTowardsOneThird) {
  for (const auto& [name, K] : testsupport::suite_bodies()) {
    double prev = 0.0;
    for (double eps : {0.2, 0.1, 0.05, 0.025}) {
      const double r = thin_rectangle_ratio(K, eps);
      EXPECT_GT(r, prev) << name;
      EXPECT_LT(r, 1.0 / 3.0) << name;
      prev = r;
    }
    EXPECT_GE(prev, 0.31) << name;
  }
}

TEST(ThinRectangle, CentralBlockIsBodyIndependent) {
  for (double eps : {0.2, 0.05}) {
    const double ref = thin_rectangle_terms(ConvexBody::disk(), eps, 1.0).center_ratio();
    EXPECT_NEAR(ref, (1.0 - eps) / 3.0, 1e-14);
    for (const auto& [name, K] : testsupport::suite_bodies()) {
      EXPECT_NEAR(thin_rectangle_terms(K, eps, 1.0).center_ratio(), ref, 1e-10) << name;
    }
  }
}

TEST(ThinRectangle, RejectsWideRectangle) {
  EXPECT_THROW(thin_rectangle_ratio(ConvexBody::disk(), 1.0), DomainError);
  EXPECT_THROW(thin_rectangle_ratio(ConvexBody::disk(), 0.0), DomainError);
  EXPECT_THROW(thin_rectangle_ratio(ConvexBody::disk(), 0.5, 0.4), DomainError);
}

TEST(ThinRectangle, LowerBoundBelowSolver) {
  const double eps = 0.1;
  const Polygon omega = Polygon::rectangle(eps, 1.0);
  for (const auto& [name, K] : testsupport::suite_bodies()) {
    const ThinRectangleTerms t = thin_rectangle_terms(K, eps, 1.0);
    const double T = solve_torsion(K, triangulate(omega, 0.01)).value;
    EXPECT_LE(t.ratio() * t.R * t.R * t.area, T * 1.01) << name;
  }
}
