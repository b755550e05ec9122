#pragma once
//
// First zeros of Bessel functions of the first kind, used for the
// Dirichlet eigenvalue of the unit ball, lambda_1(B_N) = j_{N/2-1,1}^2.
//

#include "aniso/convex_body.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace aniso {

/// J_nu(x) by its ascending series; accurate to ~1e-13 for x <= nu + 15.
inline double bessel_j(double nu, double x) {
  const double half = 0.5 * x;
  double term = std::pow(half, nu) / std::tgamma(nu + 1.0);
  double sum = term;
  const double q = -half * half;
  for (int k = 1; k < 300; ++k) {
    term *= q / (k * (k + nu));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum) && k > 5) break;
  }
  return sum;
}

/// First positive zero of J_nu, located by a coarse scan and refined by
/// bisection to `tol`.
inline double bessel_first_zero(double nu, double tol = 1e-13) {
  if (nu < 0.0) throw DomainError("order must be nonnegative");
  double lo = nu + 0.5, hi = lo;
  // j_{nu,1} > nu; scan forward for the first sign change.
  double flo = bessel_j(nu, lo);
  for (;;) {
    hi = lo + 0.05;
    const double fhi = bessel_j(nu, hi);
    if ((flo > 0.0) != (fhi > 0.0)) break;
    lo = hi;
    flo = fhi;
    if (lo > nu + 20.0) throw std::runtime_error("bessel zero scan failed");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = bessel_j(nu, mid);
    if ((fm > 0.0) == (flo > 0.0)) { lo = mid; flo = fm; } else { hi = mid; }
  }
  return 0.5 * (lo + hi);
}

/// First Dirichlet eigenvalue of the unit ball in dimension N (cached).
inline double ball_eigenvalue(int N) {
  static std::mutex mu;
  static std::map<int, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(N);
  if (it != cache.end()) return it->second;
  if (N < 1) throw DomainError("dimension must be positive");
  double value;
  if (N == 1) {
    value = kPi * kPi / 4.0;  // interval [-1, 1]
  } else {
    const double j = bessel_first_zero(0.5 * N - 1.0);
    value = j * j;
  }
  cache.emplace(N, value);
  return value;
}

/// j_0^2 ~ 5.783185962946784, the unit-disk Dirichlet eigenvalue.
inline double j0_squared() { return ball_eigenvalue(2); }

}  // namespace aniso
