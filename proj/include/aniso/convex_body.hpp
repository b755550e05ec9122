#pragma once
//
// Symmetric convex bodies in the plane and the norms they induce.
//
// A body K carries two norms: its support function h_K (the "dual" norm
// used on gradients) and its gauge h_{K*} (the norm whose unit ball is K).
// Every representation answers both, together with a.e. gradients and the
// Hessian of H_K = h_K^2 / 2 needed by the variational solvers.
//

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace aniso {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

/// Raised when an argument lies outside an operation's domain
/// (zero direction, point outside a domain, malformed body).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

inline bool lex_less(const Vec2& a, const Vec2& b) {
  return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
}

/// Convex hull (counterclockwise, no collinear points) by monotone chain.
inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), lex_less);
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) { return (a - b).norm() == 0.0; }),
            pts.end());
  if (pts.size() < 3) return pts;
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double tol = 1e-14 * scale * scale;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= tol) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= tol) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

/// Value, gradient and Hessian of H = h^2 / 2 at one point.
struct QuadraticJet {
  double value = 0.0;
  Vec2 gradient = Vec2::Zero();
  Mat2 hessian = Mat2::Zero();
};

enum class BodyKind { Polytope, PBall, Ellipsoid, Smoothed, Linear, Polar };

class ConvexBody {
 public:
  struct Polytope {
    std::vector<Vec2> vertices;       // counterclockwise hull
    std::vector<Vec2> facet_normals;  // unit outward normals, edge i -> i+1
    std::vector<double> facet_offsets;
  };
  struct PBall {
    double p = 2.0;  // 1 < p < inf; the endpoints are stored as polytopes
    Vec2 scales = Vec2::Ones();
  };
  struct Ellipsoid {
    Mat2 matrix;   // K = {y : y^T M y <= 1}
    Mat2 inverse;  // h_K(x)^2 = x^T M^{-1} x
  };
  struct Smoothed {
    std::shared_ptr<const ConvexBody> base;  // always a polytope
    double tau = 0.0;
  };
  struct Linear {
    std::shared_ptr<const ConvexBody> base;  // represents L * base
    Mat2 map;
    Mat2 inverse;
  };
  struct Polar {
    std::shared_ptr<const ConvexBody> base;
  };

  // -- construction ---------------------------------------------------------

  /// Symmetric polytope spanned by `points` (order irrelevant; the hull is
  /// taken). Throws DomainError for degenerate or asymmetric input.
  static ConvexBody polytope(const std::vector<Vec2>& points);

  /// Unit ball of the scaled l^p norm, {y : ||(y1/s1, y2/s2)||_p <= 1}.
  /// p = 1 and p = inf are represented exactly as polytopes.
  static ConvexBody pball(double p, const Vec2& scales = Vec2::Ones());

  /// {y : y^T M y <= 1} for symmetric positive-definite M.
  static ConvexBody ellipsoid(const Mat2& matrix);

  /// Log-sum-exp smoothing of a polytope (see smooth_approx).
  static ConvexBody smoothed(const ConvexBody& base, double tau);

  static ConvexBody disk(double radius = 1.0) { return pball(2.0, Vec2(radius, radius)); }
  static ConvexBody square(double half_width = 1.0) { return pball(kInf, Vec2(half_width, half_width)); }
  static ConvexBody diamond(double radius = 1.0) { return pball(1.0, Vec2(radius, radius)); }
  /// Axis-aligned ellipse with semi-axes (a, b).
  static ConvexBody ellipse(double a, double b) {
    return ellipsoid((Mat2() << 1.0 / (a * a), 0.0, 0.0, 1.0 / (b * b)).finished());
  }

  // -- queries --------------------------------------------------------------

  BodyKind kind() const { return static_cast<BodyKind>(rep_.index()); }
  template <class T>
  const T* as() const { return std::get_if<T>(&rep_); }

  /// True when h_K is differentiable away from the origin.
  bool is_smooth() const;
  /// True when H_K is a quadratic form (constant Hessian).
  bool is_quadratic() const;

  /// h_K(x) = max{x . y : y in K}.
  double support(const Vec2& x) const;
  /// h_{K*}(x), the Minkowski functional of K. gauge(0) = 0.
  double gauge(const Vec2& x) const;
  /// Dh_K(x): the maximiser of x . y over K. At non-smooth directions of a
  /// polytope the lexicographically smallest maximising vertex is returned.
  Vec2 support_gradient(const Vec2& x) const;
  /// Dh_{K*}(x); for a polytope, normal/offset of the lexicographically
  /// smallest active facet.
  Vec2 gauge_gradient(const Vec2& x) const;
  /// DH_K(x) = h_K(x) Dh_K(x); zero at the origin.
  Vec2 quadratic_gradient(const Vec2& x) const;
  /// DH_{K*}(x) = h_{K*}(x) Dh_{K*}(x).
  Vec2 dual_quadratic_gradient(const Vec2& x) const;
  /// H_K with gradient and (a.e.) Hessian in one pass.
  QuadraticJet quadratic_jet(const Vec2& x) const;

  /// The polar body K*. Smoothed bodies are wrapped; all other variants
  /// have closed forms. polar(polar(K)) returns the original representation.
  ConvexBody polar() const;
  /// The image L K of the body under an invertible linear map.
  ConvexBody transformed(const Mat2& L) const;

  /// Short human-readable description ("polytope[4]", "pball(p=3)", ...).
  std::string describe() const;

 private:
  using Rep = std::variant<Polytope, PBall, Ellipsoid, Smoothed, Linear, Polar>;
  explicit ConvexBody(Rep rep) : rep_(std::move(rep)) {}

  Rep rep_;
};

/// Result of smooth_approx: the body and the bound d_H(K_tau, K) <= bound
/// on the Hausdorff distance (equivalently sup over |x| = 1 of |h_tau - h|).
struct Smoothing {
  ConvexBody body;
  double hausdorff_bound = 0.0;
};

/// Smooth approximation K_tau of K: polytopes become the 1-homogeneous
/// log-sum-exp body h_tau(x) = tau |x| log sum_i exp(v_i . x / (tau |x|)),
/// which satisfies h <= h_tau <= h + tau |x| log m. Already smooth bodies
/// are returned unchanged with a zero bound.
Smoothing smooth_approx(const ConvexBody& body, double tau);

// ===========================================================================
// implementation
// ===========================================================================

namespace detail {

inline void require_direction(const Vec2& x) {
  if (!(x.norm() > 0.0) || !x.allFinite()) throw DomainError("direction must be a nonzero finite vector");
}

inline Mat2 outer(const Vec2& a, const Vec2& b) { return a * b.transpose(); }

inline double vertex_scale(const std::vector<Vec2>& vs) {
  double s = 0.0;
  for (const auto& v : vs) s = std::max(s, v.norm());
  return s;
}

// Index of the maximiser of f(v_i) with ties (within tol) broken by the
// lexicographically smallest vector.
template <class F>
std::size_t lexicographic_argmax(const std::vector<Vec2>& vs, F&& f, double tol) {
  double best = -kInf;
  for (const auto& v : vs) best = std::max(best, f(v));
  std::size_t arg = vs.size();
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (f(vs[i]) >= best - tol && (arg == vs.size() || lex_less(vs[i], vs[arg]))) arg = i;
  }
  return arg;
}

// ||z||_q computed without overflow.
inline double lq_norm(const Vec2& z, double q) {
  const double m = z.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  const double a = std::abs(z.x()) / m, b = std::abs(z.y()) / m;
  return m * std::pow(std::pow(a, q) + std::pow(b, q), 1.0 / q);
}

inline Vec2 lq_gradient(const Vec2& z, double q) {
  const double n = lq_norm(z, q);
  Vec2 g;
  for (int i = 0; i < 2; ++i) {
    const double r = std::abs(z[i]) / n;
    g[i] = std::copysign(std::pow(r, q - 1.0), z[i]);
    if (z[i] == 0.0) g[i] = 0.0;
  }
  return g;
}

// Hessian of ||z||_q. For q < 2 the curvature is unbounded on the axes;
// coordinates are floored at a relative 1e-8 so the matrix stays finite.
inline Mat2 lq_hessian(const Vec2& z, double q) {
  const double n = lq_norm(z, q);
  Vec2 r, s;
  for (int i = 0; i < 2; ++i) {
    r[i] = std::max(std::abs(z[i]) / n, 1e-8);
    s[i] = z[i] < 0.0 ? -1.0 : 1.0;
  }
  Mat2 hess;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double diag = i == j ? std::pow(r[i], q - 2.0) : 0.0;
      hess(i, j) = (q - 1.0) / n * (diag - s[i] * s[j] * std::pow(r[i], q - 1.0) * std::pow(r[j], q - 1.0));
    }
  }
  return hess;
}

// Log-sum-exp pieces for a smoothed polytope at unit direction u:
// F(u) = tau log sum exp(v.u / tau), gradient m = sum p_i v_i and the
// second moment S = sum p_i v_i v_i^T.
struct LseTerms {
  double value;
  Vec2 mean;
  Mat2 second;
};

inline LseTerms lse_terms(const std::vector<Vec2>& vs, double tau, const Vec2& u) {
  double amax = -kInf;
  for (const auto& v : vs) amax = std::max(amax, v.dot(u));
  Vec2 mean = Vec2::Zero();
  Mat2 second = Mat2::Zero();
  double weights[64];
  std::vector<double> spill;
  double* w = vs.size() <= 64 ? weights : (spill.resize(vs.size()), spill.data());
  for (std::size_t i = 0; i < vs.size(); ++i) {
    w[i] = std::exp((vs[i].dot(u) - amax) / tau);
    mean += w[i] * vs[i];
    second += w[i] * outer(vs[i], vs[i]);
  }
  // Summing in sorted order makes the value exactly even in u.
  std::sort(w, w + vs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < vs.size(); ++i) sum += w[i];
  return {amax + tau * std::log(sum), mean / sum, second / sum};
}

// Inverts a smooth support gradient: the unit direction u with Dh(u)
// parallel to y (pointing the same way). Used for gauges of bodies that
// only expose h and Dh in closed form. Dh(u(theta)) turns monotonically
// with theta and stays within a quarter turn of u, which brackets the root.
template <class SupportGradient>
Vec2 invert_gauss_map(const Vec2& y, SupportGradient&& dh) {
  const double phi = std::atan2(y.y(), y.x());
  const Vec2 yhat = y.normalized();
  double lo = phi - kPi / 2.0, hi = phi + kPi / 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    const Vec2 g = dh(Vec2(std::cos(mid), std::sin(mid)));
    if (cross(yhat, g) < 0.0) lo = mid; else hi = mid;
  }
  const double theta = 0.5 * (lo + hi);
  return {std::cos(theta), std::sin(theta)};
}

inline Mat2 fd_hessian(const ConvexBody& body, const Vec2& x) {
  const double step = 1e-6 * std::max(x.norm(), 1e-300);
  Mat2 hess;
  for (int j = 0; j < 2; ++j) {
    Vec2 e = Vec2::Zero();
    e[j] = step;
    hess.col(j) = (body.quadratic_gradient(x + e) - body.quadratic_gradient(x - e)) / (2.0 * step);
  }
  return 0.5 * (hess + hess.transpose());
}

}  // namespace detail

inline ConvexBody ConvexBody::polytope(const std::vector<Vec2>& points) {
  for (const auto& p : points) {
    if (!p.allFinite()) throw DomainError("polytope vertices must be finite");
  }
  std::vector<Vec2> hull = convex_hull(points);
  if (hull.size() < 3) throw DomainError("polytope must be full-dimensional");
  const double scale = detail::vertex_scale(hull);
  for (const auto& v : hull) {
    const bool mirrored = std::any_of(hull.begin(), hull.end(),
                                      [&](const Vec2& w) { return (v + w).norm() <= 1e-9 * scale; });
    if (!mirrored) throw DomainError("polytope must be symmetric about the origin");
  }
  Polytope poly;
  poly.vertices = hull;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2 edge = hull[(i + 1) % hull.size()] - hull[i];
    const Vec2 normal = Vec2(edge.y(), -edge.x()).normalized();
    const double offset = normal.dot(hull[i]);
    if (!(offset > 0.0)) throw DomainError("origin must be interior to the polytope");
    poly.facet_normals.push_back(normal);
    poly.facet_offsets.push_back(offset);
  }
  return ConvexBody(std::move(poly));
}

inline ConvexBody ConvexBody::pball(double p, const Vec2& scales) {
  if (!(p >= 1.0)) throw DomainError("p-ball exponent must satisfy p >= 1");
  if (!(scales.minCoeff() > 0.0) || !scales.allFinite()) throw DomainError("p-ball scales must be positive");
  const double sx = scales.x(), sy = scales.y();
  if (p == 1.0) return polytope({{sx, 0.0}, {0.0, sy}, {-sx, 0.0}, {0.0, -sy}});
  if (std::isinf(p)) return polytope({{sx, sy}, {-sx, sy}, {-sx, -sy}, {sx, -sy}});
  return ConvexBody(PBall{p, scales});
}

inline ConvexBody ConvexBody::ellipsoid(const Mat2& matrix) {
  if (!matrix.allFinite() || std::abs(matrix(0, 1) - matrix(1, 0)) > 1e-12 * matrix.norm()) {
    throw DomainError("ellipsoid matrix must be finite and symmetric");
  }
  const Mat2 sym = 0.5 * (matrix + matrix.transpose());
  if (!(sym(0, 0) > 0.0) || !(sym.determinant() > 0.0)) throw DomainError("ellipsoid matrix must be positive definite");
  return ConvexBody(Ellipsoid{sym, sym.inverse()});
}

inline ConvexBody ConvexBody::smoothed(const ConvexBody& base, double tau) {
  if (!(tau > 0.0)) throw DomainError("smoothing parameter must be positive");
  if (base.kind() != BodyKind::Polytope) return base;
  return ConvexBody(Smoothed{std::make_shared<const ConvexBody>(base), tau});
}

inline bool ConvexBody::is_smooth() const {
  return std::visit(
      [](const auto& r) -> bool {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Polytope>) return false;
        else if constexpr (std::is_same_v<T, Linear>) return r.base->is_smooth();
        else return true;
      },
      rep_);
}

inline bool ConvexBody::is_quadratic() const {
  return std::visit(
      [](const auto& r) -> bool {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Ellipsoid>) return true;
        else if constexpr (std::is_same_v<T, PBall>) return r.p == 2.0;
        else if constexpr (std::is_same_v<T, Linear>) return r.base->is_quadratic();
        else return false;
      },
      rep_);
}

inline double ConvexBody::support(const Vec2& x) const {
  detail::require_direction(x);
  return std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Polytope>) {
          double best = -kInf;
          for (const auto& v : r.vertices) best = std::max(best, v.dot(x));
          return best;
        } else if constexpr (std::is_same_v<T, PBall>) {
          const Vec2 z = r.scales.cwiseProduct(x);
          if (r.p == 2.0) return z.norm();
          return detail::lq_norm(z, r.p / (r.p - 1.0));
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          return std::sqrt(std::max(0.0, x.dot(r.inverse * x)));
        } else if constexpr (std::is_same_v<T, Smoothed>) {
          const double n = x.norm();
          if (n == 0.0) return 0.0;
          return n * detail::lse_terms(r.base->template as<Polytope>()->vertices, r.tau, x / n).value;
        } else if constexpr (std::is_same_v<T, Linear>) {
          return r.base->support(r.map.transpose() * x);
        } else {
          return r.base->gauge(x);
        }
      },
      rep_);
}

inline double ConvexBody::gauge(const Vec2& x) const {
  if (x.squaredNorm() == 0.0) return 0.0;
  return std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Polytope>) {
          double best = 0.0;
          for (std::size_t j = 0; j < r.facet_normals.size(); ++j) {
            best = std::max(best, r.facet_normals[j].dot(x) / r.facet_offsets[j]);
          }
          return best;
        } else if constexpr (std::is_same_v<T, PBall>) {
          const Vec2 z = x.cwiseQuotient(r.scales);
          return r.p == 2.0 ? z.norm() : detail::lq_norm(z, r.p);
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          return std::sqrt(std::max(0.0, x.dot(r.matrix * x)));
        } else if constexpr (std::is_same_v<T, Smoothed>) {
          if (x.norm() == 0.0) return 0.0;
          const Vec2 u = detail::invert_gauss_map(x, [&](const Vec2& d) { return support_gradient(d); });
          return x.dot(u) / support(u);
        } else if constexpr (std::is_same_v<T, Linear>) {
          return r.base->gauge(r.inverse * x);
        } else {
          return r.base->support(x);
        }
      },
      rep_);
}

inline Vec2 ConvexBody::support_gradient(const Vec2& x) const {
  detail::require_direction(x);
  return std::visit(
      [&](const auto& r) -> Vec2 {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Polytope>) {
          const double tol = 1e-12 * x.norm() * detail::vertex_scale(r.vertices);
          return r.vertices[detail::lexicographic_argmax(r.vertices, [&](const Vec2& v) { return v.dot(x); }, tol)];
        } else if constexpr (std::is_same_v<T, PBall>) {
          const Vec2 z = r.scales.cwiseProduct(x);
          if (r.p == 2.0) return r.scales.cwiseProduct(z / z.norm());
          return r.scales.cwiseProduct(detail::lq_gradient(z, r.p / (r.p - 1.0)));
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          const Vec2 w = r.inverse * x;
          return w / std::sqrt(x.dot(w));
        } else if constexpr (std::is_same_v<T, Smoothed>) {
          const Vec2 u = x.normalized();
          const auto lse = detail::lse_terms(r.base->template as<Polytope>()->vertices, r.tau, u);
          return lse.mean + u * (lse.value - lse.mean.dot(u));
        } else if constexpr (std::is_same_v<T, Linear>) {
          return r.map * r.base->support_gradient(r.map.transpose() * x);
        } else {
          return r.base->gauge_gradient(x);
        }
      },
      rep_);
}

inline Vec2 ConvexBody::gauge_gradient(const Vec2& x) const {
  detail::require_direction(x);
  return std::visit(
      [&](const auto& r) -> Vec2 {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Polytope>) {
          std::vector<Vec2> scaled(r.facet_normals.size());
          for (std::size_t j = 0; j < scaled.size(); ++j) scaled[j] = r.facet_normals[j] / r.facet_offsets[j];
          const double tol = 1e-12 * x.norm() * detail::vertex_scale(scaled);
          return scaled[detail::lexicographic_argmax(scaled, [&](const Vec2& v) { return v.dot(x); }, tol)];
        } else if constexpr (std::is_same_v<T, PBall>) {
          const Vec2 z = x.cwiseQuotient(r.scales);
          if (r.p == 2.0) return (z / z.norm()).cwiseQuotient(r.scales);
          return detail::lq_gradient(z, r.p).cwiseQuotient(r.scales);
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          const Vec2 w = r.matrix * x;
          return w / std::sqrt(x.dot(w));
        } else if constexpr (std::is_same_v<T, Smoothed>) {
          const Vec2 u = detail::invert_gauss_map(x, [&](const Vec2& d) { return support_gradient(d); });
          return u / support(u);
        } else if constexpr (std::is_same_v<T, Linear>) {
          return r.inverse.transpose() * r.base->gauge_gradient(r.inverse * x);
        } else {
          return r.base->support_gradient(x);
        }
      },
      rep_);
}

inline Vec2 ConvexBody::quadratic_gradient(const Vec2& x) const {
  if (x.norm() == 0.0) return Vec2::Zero();
  return support(x) * support_gradient(x);
}

inline Vec2 ConvexBody::dual_quadratic_gradient(const Vec2& x) const {
  if (x.norm() == 0.0) return Vec2::Zero();
  return gauge(x) * gauge_gradient(x);
}

inline QuadraticJet ConvexBody::quadratic_jet(const Vec2& x) const {
  // D^2 H is 0-homogeneous; at the origin it is evaluated along e1.
  const bool at_origin = x.norm() == 0.0;
  const Vec2 probe = at_origin ? Vec2(1.0, 0.0) : x;
  QuadraticJet jet;
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, PBall>) {
          if (r.p == 2.0) {
            const Vec2 s2 = r.scales.cwiseProduct(r.scales);
            jet.value = 0.5 * x.dot(s2.cwiseProduct(x));
            jet.gradient = s2.cwiseProduct(x);
            jet.hessian = s2.asDiagonal();
            return;
          }
          const double q = r.p / (r.p - 1.0);
          const Vec2 z = r.scales.cwiseProduct(probe);
          const double h = detail::lq_norm(z, q);
          const Vec2 g = detail::lq_gradient(z, q);
          const Mat2 s = r.scales.asDiagonal();
          jet.hessian = s * (detail::outer(g, g) + h * detail::lq_hessian(z, q)) * s;
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          jet.value = 0.5 * x.dot(r.inverse * x);
          jet.gradient = r.inverse * x;
          jet.hessian = r.inverse;
          return;
        } else if constexpr (std::is_same_v<T, Polytope>) {
          const Vec2 g = support_gradient(probe);
          jet.hessian = detail::outer(g, g);
        } else if constexpr (std::is_same_v<T, Smoothed>) {
          // h(x) = |x| F(x/|x|); D^2 h = ((F - u.DF) P + P D^2F P) / |x|
          // with P the projector orthogonal to u.
          const double n = probe.norm();
          const Vec2 u = probe / n;
          const auto lse = detail::lse_terms(r.base->template as<Polytope>()->vertices, r.tau, u);
          const Mat2 proj = Mat2::Identity() - detail::outer(u, u);
          const Mat2 d2f = (lse.second - detail::outer(lse.mean, lse.mean)) / r.tau;
          const double h = n * lse.value;
          const Vec2 dh = lse.mean + u * (lse.value - lse.mean.dot(u));
          const Mat2 d2h = ((lse.value - lse.mean.dot(u)) * proj + proj * d2f * proj) / n;
          jet.hessian = detail::outer(dh, dh) + h * d2h;
        } else if constexpr (std::is_same_v<T, Linear>) {
          const QuadraticJet inner = r.base->quadratic_jet(r.map.transpose() * probe);
          jet.hessian = r.map * inner.hessian * r.map.transpose();
        } else {
          jet.hessian = detail::fd_hessian(*this, probe);
        }
        if (!at_origin) {
          const double h = support(x);
          jet.value = 0.5 * h * h;
          jet.gradient = h * support_gradient(x);
        }
      },
      rep_);
  return jet;
}

inline ConvexBody ConvexBody::polar() const {
  return std::visit(
      [&](const auto& r) -> ConvexBody {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Polytope>) {
          std::vector<Vec2> vs;
          for (std::size_t j = 0; j < r.facet_normals.size(); ++j) vs.push_back(r.facet_normals[j] / r.facet_offsets[j]);
          return polytope(vs);
        } else if constexpr (std::is_same_v<T, PBall>) {
          return pball(r.p / (r.p - 1.0), r.scales.cwiseInverse());
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          return ellipsoid(r.inverse);
        } else if constexpr (std::is_same_v<T, Linear>) {
          return r.base->polar().transformed(r.inverse.transpose());
        } else if constexpr (std::is_same_v<T, Polar>) {
          return *r.base;
        } else {
          return ConvexBody(Polar{std::make_shared<const ConvexBody>(*this)});
        }
      },
      rep_);
}

inline ConvexBody ConvexBody::transformed(const Mat2& L) const {
  if (!L.allFinite() || std::abs(L.determinant()) < 1e-300) throw DomainError("linear map must be invertible");
  return std::visit(
      [&](const auto& r) -> ConvexBody {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Polytope>) {
          std::vector<Vec2> vs;
          for (const auto& v : r.vertices) vs.push_back(L * v);
          return polytope(vs);
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          const Mat2 li = L.inverse();
          return ellipsoid(li.transpose() * r.matrix * li);
        } else if constexpr (std::is_same_v<T, Linear>) {
          const Mat2 m = L * r.map;
          return ConvexBody(Linear{r.base, m, m.inverse()});
        } else {
          return ConvexBody(Linear{std::make_shared<const ConvexBody>(*this), L, L.inverse()});
        }
      },
      rep_);
}

inline std::string ConvexBody::describe() const {
  return std::visit(
      [](const auto& r) -> std::string {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Polytope>) return "polytope[" + std::to_string(r.vertices.size()) + "]";
        else if constexpr (std::is_same_v<T, PBall>) return "pball(p=" + std::to_string(r.p) + ")";
        else if constexpr (std::is_same_v<T, Ellipsoid>) return "ellipsoid";
        else if constexpr (std::is_same_v<T, Smoothed>) return "smoothed(" + r.base->describe() + ", tau=" + std::to_string(r.tau) + ")";
        else if constexpr (std::is_same_v<T, Linear>) return "linear(" + r.base->describe() + ")";
        else return "polar(" + r.base->describe() + ")";
      },
      rep_);
}

inline Smoothing smooth_approx(const ConvexBody& body, double tau) {
  if (!(tau > 0.0)) throw DomainError("smoothing parameter must be positive");
  if (const auto* poly = body.as<ConvexBody::Polytope>()) {
    return {ConvexBody::smoothed(body, tau), tau * std::log(static_cast<double>(poly->vertices.size()))};
  }
  return {body, 0.0};
}

}  // namespace aniso
