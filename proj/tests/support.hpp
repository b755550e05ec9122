#pragma once
// Seeded generators and small oracles shared by the test binaries.

#include "aniso/aniso.hpp"

#include <random>
#include <string>
#include <utility>
#include <vector>

namespace testsupport {

using aniso::ConvexBody;
using aniso::Polygon;
using aniso::Vec2;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  Vec2 direction() {
    const double t = uniform(0.0, 2.0 * aniso::kPi);
    return {std::cos(t), std::sin(t)};
  }
  Vec2 vector(double rmin = 0.1, double rmax = 10.0) { return uniform(rmin, rmax) * direction(); }

  /// Convex polygon: sorted random angles on a randomly stretched circle,
  /// with at least one vertex in every open half plane.
  Polygon polygon(int min_sides = 3, int max_sides = 9) {
    for (;;) {
      const int n = static_cast<int>(uniform(min_sides, max_sides + 1));
      std::vector<double> angles;
      for (int i = 0; i < n; ++i) angles.push_back(uniform(0.0, 2.0 * aniso::kPi));
      std::sort(angles.begin(), angles.end());
      bool gap_ok = true;
      for (int i = 0; i < n; ++i) {
        const double next = i + 1 < n ? angles[i + 1] : angles[0] + 2.0 * aniso::kPi;
        if (next - angles[i] > 0.9 * aniso::kPi || next - angles[i] < 0.05) gap_ok = false;
      }
      if (!gap_ok) continue;
      const double a = uniform(0.5, 2.0), b = uniform(0.5, 2.0);
      const Vec2 shift(uniform(-1.0, 1.0), uniform(-1.0, 1.0));
      std::vector<Vec2> pts;
      for (double t : angles) pts.emplace_back(shift.x() + a * std::cos(t), shift.y() + b * std::sin(t));
      try {
        return Polygon(pts);
      } catch (const aniso::DomainError&) {
      }
    }
  }

 private:
  std::mt19937_64 gen_;
};

/// The four bodies of the verification suite.
inline std::vector<std::pair<std::string, ConvexBody>> suite_bodies() {
  return {{"disk", ConvexBody::disk()},
          {"square", ConvexBody::square()},
          {"diamond", ConvexBody::diamond()},
          {"ellipse", ConvexBody::ellipse(2.0, 1.0)}};
}

/// Bodies with differentiable support functions.
inline std::vector<std::pair<std::string, ConvexBody>> smooth_bodies() {
  return {{"disk", ConvexBody::disk()},
          {"ellipse", ConvexBody::ellipse(2.0, 1.0)},
          {"tilted_ellipse", ConvexBody::ellipsoid((aniso::Mat2() << 2.0, 0.6, 0.6, 0.5).finished())},
          {"p3", ConvexBody::pball(3.0)},
          {"p1.5_scaled", ConvexBody::pball(1.5, Vec2(2.0, 0.7))},
          {"smoothed_square", aniso::smooth_approx(ConvexBody::square(), 0.1).body},
          {"smoothed_hexagon",
           aniso::smooth_approx(ConvexBody::polytope({{1, 0}, {0.5, 0.9}, {-0.5, 0.9}, {-1, 0}, {-0.5, -0.9}, {0.5, -0.9}}),
                                0.05)
               .body}};
}

/// Brute-force support function: max of x . y over 2e5 boundary samples of
/// the gauge's unit sphere.
inline double sampled_support(const ConvexBody& K, const Vec2& x, int samples = 200000) {
  double best = -1e300;
  for (int i = 0; i < samples; ++i) {
    const double t = 2.0 * aniso::kPi * i / samples;
    const Vec2 d(std::cos(t), std::sin(t));
    const Vec2 y = d / K.gauge(d);
    best = std::max(best, x.dot(y));
  }
  return best;
}

inline std::string data_path(const std::string& rel) { return std::string(ANISO_DATA_DIR) + "/" + rel; }

}  // namespace testsupport
