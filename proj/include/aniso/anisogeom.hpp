#pragma once
//
// Metric geometry of a convex polygon measured with the gauge of a body K:
// distance to the boundary, the anisotropic inradius (largest t with
// x + tK inside the domain), contact normals of the maximal inscribed copy,
// the circumscribed contact polytope, the nearest-facet decomposition and
// the unimodular shear attached to a facet normal.
//

#include "aniso/convex_body.hpp"
#include "aniso/lp.hpp"
#include "aniso/polygon.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace aniso {

/// d_K(x, facet j) for the supporting line of facet j.
inline double facet_distance(const ConvexBody& K, const Facet& f, const Vec2& x) {
  return (f.offset - f.normal.dot(x)) / K.support(f.normal);
}

/// d_K(x, boundary) = min_j (b_j - nu_j . x) / h_K(nu_j) for x inside.
inline double aniso_distance(const ConvexBody& K, const Vec2& x, const Polygon& omega) {
  const double scale = std::max(omega.diameter(), 1.0);
  if (!omega.contains(x, 1e-12 * scale)) throw DomainError("point lies outside the domain");
  double d = kInf;
  for (const auto& f : omega.facets()) d = std::min(d, facet_distance(K, f, x));
  return std::max(d, 0.0);
}

struct InradiusResult {
  double R = 0.0;
  Vec2 center = Vec2::Zero();
  std::vector<int> active;  // facets tight at the optimum
};

/// Solves max t s.t. nu_j . x + t h_K(nu_j) <= b_j. Returns the simplex
/// vertex optimum when the maximiser is not unique.
inline InradiusResult aniso_inradius(const ConvexBody& K, const Polygon& omega) {
  const auto& facets = omega.facets();
  const int m = static_cast<int>(facets.size());
  const Vec2 c0 = omega.centroid();
  // Variables (x+, y+, x-, y-, t) >= 0 with x = c0 + x+ - x-.
  Eigen::MatrixXd A(m, 5);
  Eigen::VectorXd b(m);
  for (int j = 0; j < m; ++j) {
    const auto& f = facets[j];
    const double h = K.support(f.normal);
    A.row(j) << f.normal.x(), f.normal.y(), -f.normal.x(), -f.normal.y(), h;
    b[j] = f.offset - f.normal.dot(c0);
  }
  Eigen::VectorXd c = Eigen::VectorXd::Zero(5);
  c[4] = 1.0;
  const LpResult lp = solve_lp(A, b, Eigen::MatrixXd(0, 5), Eigen::VectorXd(0), c);
  if (lp.status != LpStatus::Optimal || !(lp.objective > 0.0)) throw DomainError("domain has empty interior");

  InradiusResult res;
  res.R = lp.objective;
  res.center = c0 + Vec2(lp.x[0] - lp.x[2], lp.x[1] - lp.x[3]);
  const double tol = 1e-10 * std::max(1.0, omega.diameter());
  for (int j = 0; j < m; ++j) {
    const auto& f = facets[j];
    if (f.offset - f.normal.dot(res.center) - res.R * K.support(f.normal) <= tol) res.active.push_back(j);
  }
  return res;
}

/// Outward normals of the facets touched by center + R K.
inline std::vector<Vec2> contact_normals(const ConvexBody& K, const Polygon& omega, const InradiusResult& r) {
  std::vector<Vec2> out;
  const double tol = 1e-9 * std::max(1.0, omega.diameter());
  for (const auto& f : omega.facets()) {
    if (std::abs(f.offset - f.normal.dot(r.center) - r.R * K.support(f.normal)) <= tol) out.push_back(f.normal);
  }
  return out;
}

/// True iff every unit direction nu has nu . nu_j >= 0 for some j, i.e.
/// iff the origin lies in the convex hull of the normals.
inline bool covering_check(const std::vector<Vec2>& normals) {
  if (normals.empty()) throw DomainError("covering check needs at least one normal");
  const int k = static_cast<int>(normals.size());
  Eigen::MatrixXd Aeq(3, k);
  for (int j = 0; j < k; ++j) Aeq.col(j) << normals[j].x(), normals[j].y(), 1.0;
  Eigen::VectorXd beq(3);
  beq << 0.0, 0.0, 1.0;
  const LpResult lp = solve_lp(Eigen::MatrixXd(0, k), Eigen::VectorXd(0), Aeq, beq, Eigen::VectorXd::Zero(k));
  return lp.status == LpStatus::Optimal;
}

/// Translates and rescales omega so that its anisotropic incenter is the
/// origin and R = 1.
inline Polygon canonicalize(const ConvexBody& K, const Polygon& omega) {
  const InradiusResult r = aniso_inradius(K, omega);
  return omega.translated(-r.center).scaled(1.0 / r.R);
}

struct GaleResult {
  Polygon polytope;
  bool clipped = false;           // true when the contact halfplanes are unbounded
  std::vector<int> contact_facets;
};

/// The circumscribed polytope T = intersection of the supporting halfplanes
/// of omega at the contact points of K (omega must be canonical: K inside,
/// no dilate tK with t > 1 fits). Unbounded T is clipped to the box
/// [-bound, bound]^2 and flagged.
inline GaleResult gale_polytope(const ConvexBody& K, const Polygon& omega, double bound = 100.0) {
  const double scale = std::max(1.0, omega.diameter());
  std::vector<int> contacts;
  std::vector<Vec2> normals;
  for (std::size_t j = 0; j < omega.facets().size(); ++j) {
    const auto& f = omega.facets()[j];
    const double slack = f.offset - K.support(f.normal);
    if (slack < -1e-9 * scale) throw DomainError("domain not in canonical position");
    if (slack <= 1e-9 * scale) {
      contacts.push_back(static_cast<int>(j));
      normals.push_back(f.normal);
    }
  }
  if (normals.empty() || !covering_check(normals)) throw DomainError("domain not in canonical position");

  std::vector<Vec2> loop{{-bound, -bound}, {bound, -bound}, {bound, bound}, {-bound, bound}};
  for (int j : contacts) {
    const auto& f = omega.facets()[j];
    loop = clip_halfplane(loop, f.normal, f.offset);
  }
  bool clipped = false;
  for (const auto& p : loop) {
    if (p.cwiseAbs().maxCoeff() >= bound * (1.0 - 1e-12)) clipped = true;
  }
  return {Polygon(loop), clipped, contacts};
}

/// Nearest-facet cell Omega_j = {x in Omega : delta_j(x) <= delta_l(x)}
/// with delta_j(x) = (b_j - nu_j . x) / h_K(nu_j).
struct FacetCell {
  int facet = 0;
  std::vector<Vec2> region;  // convex loop, counterclockwise; may be empty
  Vec2 normal;
  double offset = 0.0;
  double support = 1.0;  // h_K(normal)

  double delta(const Vec2& x) const { return (offset - normal.dot(x)) / support; }
  double area() const { return region.size() < 3 ? 0.0 : signed_area(region); }
};

inline std::vector<FacetCell> facet_decomposition(const ConvexBody& K, const Polygon& omega) {
  const auto& facets = omega.facets();
  std::vector<double> hs;
  for (const auto& f : facets) {
    const double h = K.support(f.normal);
    if (!(h > 0.0)) throw DomainError("support must be positive on facet normals");
    hs.push_back(h);
  }
  std::vector<FacetCell> cells;
  for (std::size_t j = 0; j < facets.size(); ++j) {
    std::vector<Vec2> loop = omega.vertices();
    // delta_j - delta_l <= 0 is the halfplane (nu_l/h_l - nu_j/h_j) . x <= b_l/h_l - b_j/h_j.
    for (std::size_t l = 0; l < facets.size() && loop.size() >= 3; ++l) {
      if (l == j) continue;
      const Vec2 n = facets[l].normal / hs[l] - facets[j].normal / hs[j];
      const double off = facets[l].offset / hs[l] - facets[j].offset / hs[j];
      if (n.norm() <= 1e-15) {
        if (off < 0.0) loop.clear();
        continue;
      }
      loop = clip_halfplane(loop, n, off);
    }
    cells.push_back({static_cast<int>(j), loop, facets[j].normal, facets[j].offset, hs[j]});
  }
  return cells;
}

struct ShearMap {
  Mat2 matrix;
  Vec2 normal;
};

/// L = I + (nu - Dh_K(nu)/h_K(nu)) nu^T: identity on nu^perp and
/// L Dh_K(nu) = h_K(nu) nu; det L = 1.
inline ShearMap shear_map(const ConvexBody& K, const Vec2& direction) {
  detail::require_direction(direction);
  const Vec2 nu = direction.normalized();
  const double h = K.support(nu);
  const Vec2 g = K.support_gradient(nu);
  if (!(g.dot(nu) > 0.0)) throw std::logic_error("support gradient is not positively aligned with the normal");
  const Mat2 L = Mat2::Identity() + (nu - g / h) * nu.transpose();
  return {L, nu};
}

}  // namespace aniso
