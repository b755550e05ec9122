#pragma once
//
// Solver-free bounds for the anisotropic torsional rigidity and principal
// frequency of a convex polygon: explicit test functions (lower bounds for
// T), nearest-facet barrier functions (upper bounds for T), and the
// inradius constants for the eigenvalue.
//

#include "aniso/anisogeom.hpp"
#include "aniso/bessel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <tuple>

namespace aniso {

enum class Quantity { Torsion, Eigenvalue };

inline const char* to_string(Quantity q) { return q == Quantity::Torsion ? "torsion" : "eigen"; }

struct BoundCertificate {
  Quantity quantity = Quantity::Torsion;
  double lower = 0.0;
  double upper = 0.0;
  std::string lower_method;
  std::string upper_method;
  double R = 0.0;      // anisotropic inradius
  double area = 0.0;   // |Omega|
  double int_dK = 0.0; // integral of d_K(x, boundary)
};

/// (1/(N(N+2)), 1/3, pi^2/4, lambda_1(B_N)): the torsion and eigenvalue
/// sandwich constants in dimension N.
inline std::tuple<double, double, double, double> sandwich_constants(int N) {
  if (N < 1) throw DomainError("dimension must be positive");
  return {1.0 / (N * (N + 2.0)), 1.0 / 3.0, kPi * kPi / 4.0, ball_eigenvalue(N)};
}

/// Integral of d_K(., boundary) over the polygon; exact (piecewise affine
/// integrand on the nearest-facet cells).
inline double integral_distance(const ConvexBody& K, const Polygon& omega) {
  double s = 0.0;
  for (const auto& cell : facet_decomposition(K, omega)) {
    if (cell.region.size() < 3) continue;
    s += integrate_convex(cell.region, [&](const Vec2& x) { return cell.delta(x); }, 1);
  }
  return s;
}

/// Lower bound for T^K from ubar = (1 - g^2) / 4, g the polygon gauge about
/// `origin` (by default the anisotropic incenter). On each cone over a facet
/// g is affine, so both integrals are exact with a degree-2 rule.
inline double torsion_lower_ubar(const ConvexBody& K, const Polygon& omega, int quad_order = 2,
                                 const std::optional<Vec2>& origin = std::nullopt) {
  const Vec2 c = origin ? *origin : aniso_inradius(K, omega).center;
  if (!(omega.max_violation(c) < 0.0)) throw DomainError("gauge origin must be interior");
  double num = 0.0, den = 0.0;
  for (const auto& f : omega.facets()) {
    const double b = f.offset - f.normal.dot(c);
    auto g = [&](const Vec2& x) { return f.normal.dot(x - c) / b; };
    const double hk = K.support(f.normal) / b;
    num += integrate_triangle(c, f.a, f.b, [&](const Vec2& x) { return 0.25 * (1.0 - g(x) * g(x)); }, quad_order);
    // grad ubar = -g grad g / 2 with grad g = normal / b
    den += integrate_triangle(c, f.a, f.b, [&](const Vec2& x) { return 0.25 * g(x) * g(x) * hk * hk; }, quad_order);
  }
  return num * num / den;
}

/// Integral of the barrier u^eps = -delta^2 (1 + eps) / 2 + R delta (1 + 2 eps)
/// over the nearest-facet cells; an upper bound for T^K.
inline double torsion_upper_barrier(const ConvexBody& K, const Polygon& omega, double eps) {
  if (!(eps >= 0.0)) throw DomainError("barrier parameter must be nonnegative");
  const double R = aniso_inradius(K, omega).R;
  double s = 0.0;
  for (const auto& cell : facet_decomposition(K, omega)) {
    if (cell.region.size() < 3) continue;
    s += integrate_convex(
        cell.region,
        [&](const Vec2& x) {
          const double d = cell.delta(x);
          return -0.5 * d * d * (1.0 + eps) + R * d * (1.0 + 2.0 * eps);
        },
        2);
  }
  return s;
}

/// R^2 |Omega| / 3 + (R / 6) int (2 d_K - R): the plain upper bound minus
/// the completed-square remainder of the barrier estimate.
inline double torsion_upper_refined(const ConvexBody& K, const Polygon& omega) {
  const double R = aniso_inradius(K, omega).R;
  const double A = omega.area();
  return R * R * A / 3.0 + R / 6.0 * (2.0 * integral_distance(K, omega) - R * A);
}

/// Torsion certificate: ubar quotient below, min of the eps = 1e-3 barrier
/// and the refined bound above.
inline BoundCertificate torsion_bounds(const ConvexBody& K, const Polygon& omega) {
  BoundCertificate c;
  c.quantity = Quantity::Torsion;
  const InradiusResult r = aniso_inradius(K, omega);
  c.R = r.R;
  c.area = omega.area();
  c.int_dK = integral_distance(K, omega);
  c.lower = torsion_lower_ubar(K, omega, 2, r.center);
  c.lower_method = "ubar_gauge_quotient";
  const double barrier = torsion_upper_barrier(K, omega, 1e-3);
  const double refined = torsion_upper_refined(K, omega);
  c.upper = std::min(barrier, refined);
  c.upper_method = barrier <= refined ? "facet_barrier_eps_1e-3" : "refined_remainder";
  return c;
}

/// pi^2 / (4 R^2) <= lambda_1^K <= j_0^2 / R^2.
inline BoundCertificate eigen_bounds(const ConvexBody& K, const Polygon& omega) {
  BoundCertificate c;
  c.quantity = Quantity::Eigenvalue;
  c.R = aniso_inradius(K, omega).R;
  c.area = omega.area();
  c.int_dK = integral_distance(K, omega);
  c.lower = kPi * kPi / (4.0 * c.R * c.R);
  c.lower_method = "inradius_slab";
  c.upper = j0_squared() / (c.R * c.R);
  c.upper_method = "inscribed_body";
  return c;
}

/// Pieces of the thin-rectangle test function on [-eps, eps] x [-a, a]:
/// the central block C (|z| <= a - eps) and the two end caps D.
struct ThinRectangleTerms {
  double int_u_center = 0.0;
  double energy_center = 0.0;  // int_C h_K^2(grad u)
  double int_u_ends = 0.0;
  double energy_ends = 0.0;
  double R = 0.0;
  double area = 0.0;
  double ratio() const {
    const double s = int_u_center + int_u_ends;
    return s * s / (energy_center + energy_ends) / (R * R * area);
  }
  /// The same ratio restricted to the central block.
  double center_ratio() const { return int_u_center / (R * R * area); }
};

inline ThinRectangleTerms thin_rectangle_terms(const ConvexBody& K, double eps, double a) {
  if (!(eps > 0.0) || !(eps < a)) throw DomainError("need 0 < eps < a");
  const double h1 = K.support(Vec2(1.0, 0.0));
  const double h2 = K.support(Vec2(0.0, 1.0));
  ThinRectangleTerms t;
  t.R = std::min(eps / h1, a / h2);
  t.area = 4.0 * eps * a;
  const double block = 4.0 * eps * (a - eps);
  t.int_u_center = block * eps * eps / (3.0 * h1 * h1);
  t.energy_center = t.int_u_center;
  // Cap z = a - s, s in [0, eps]: u = s (eps^2 - x^2) / (2 eps h1^2). Both
  // caps give the same integrals by central symmetry of K.
  t.int_u_ends = 2.0 * eps * eps * eps * eps / (3.0 * h1 * h1);
  static const std::array<double, 5> gx{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                        0.9061798459386640};
  static const std::array<double, 5> gw{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                        0.4786286704993665, 0.2369268850561891};
  const int cells = 48;
  const double hx = 2.0 * eps / cells, hs = eps / cells;
  double e = 0.0;
  for (int i = 0; i < cells; ++i) {
    for (int j = 0; j < cells; ++j) {
      for (int p = 0; p < 5; ++p) {
        for (int q = 0; q < 5; ++q) {
          const double x = -eps + hx * (i + 0.5 * (gx[p] + 1.0));
          const double s = hs * (j + 0.5 * (gx[q] + 1.0));
          const Vec2 grad(-s * x / (eps * h1 * h1), -(eps * eps - x * x) / (2.0 * eps * h1 * h1));
          const double hk = grad.squaredNorm() > 0.0 ? K.support(grad) : 0.0;
          e += gw[p] * gw[q] * 0.25 * hx * hs * hk * hk;
        }
      }
    }
  }
  t.energy_ends = 2.0 * e;
  return t;
}

/// T_lb / (R^2 |Omega|) for the explicit thin-rectangle test function; tends
/// to 1/3 as eps -> 0.
inline double thin_rectangle_ratio(const ConvexBody& K, double eps, double a = 1.0) {
  return thin_rectangle_terms(K, eps, a).ratio();
}

}  // namespace aniso
