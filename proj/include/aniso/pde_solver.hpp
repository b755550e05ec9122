#pragma once
//
// P1 finite-element evaluation and minimisation of the anisotropic torsion
// and Rayleigh quotients on a triangle mesh.
//
// Energies are Newton-minimised: quadratic bodies need one sparse Cholesky
// factorisation; other smooth bodies use damped Newton; polytopes are
// approached through log-sum-exp smoothings along a tau schedule, followed
// by a variable-metric subgradient stage on the exact (tau = 0) energy.
//

#include "aniso/anisogeom.hpp"
#include "aniso/mesh.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace aniso {

/// Nodal values of a P1 field, one per mesh vertex.
using ScalarField = Eigen::VectorXd;

struct SolverOptions {
  /// Smoothing parameters for polytopal bodies; a trailing 0 requests the
  /// exact-body stage. Ignored for smooth bodies.
  std::vector<double> tau_schedule{1e-1, 1e-2, 1e-3, 0.0};
  int max_newton = 100;          // per energy minimisation
  int max_iters = 300;           // eigen outer iterations
  int polish_iters = 40;         // exact-body stage
  double newton_tol = 1e-13;     // on the Newton decrement relative to |J|
  double eigen_tol = 1e-8;       // relative change of the eigenvalue
  double stage_tol = 1e-6;       // eigen tolerance for intermediate tau stages
};

struct SolveReport {
  double value = 0.0;
  ScalarField field;
  int iterations = 0;
  double tau_final = 0.0;
  std::vector<double> energy_history;
  double residual = 0.0;  // torsion: weak-form mismatch; eigen: last relative change
};

/// Raised when an iteration fails; carries the value history.
class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// Precomputed per-triangle gradient operators, lumped masses and the
/// sparsity pattern over interior (free) vertices.
class P1Space {
 public:
  explicit P1Space(const Mesh& mesh) : mesh_(&mesh) {
    const std::size_t nv = mesh.num_vertices();
    const std::size_t nt = mesh.num_triangles();
    free_index_.assign(nv, -1);
    for (std::size_t v = 0; v < nv; ++v) {
      if (!mesh.boundary[v]) free_index_[v] = static_cast<int>(free_.size()), free_.push_back(static_cast<int>(v));
    }
    if (free_.empty()) throw DomainError("mesh has no interior vertices");
    area_.resize(nt);
    grads_.resize(nt);
    mass_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nv));
    for (std::size_t t = 0; t < nt; ++t) {
      const auto& tri = mesh.triangles[t];
      const Vec2& a = mesh.vertices[tri[0]];
      const Vec2& b = mesh.vertices[tri[1]];
      const Vec2& c = mesh.vertices[tri[2]];
      const double A = 0.5 * cross(b - a, c - a);
      if (!(A > 0.0)) throw DomainError("mesh has a non-positive triangle");
      area_[t] = A;
      // grad phi_k = J (opposite edge) / (2A), J the rotation by -90 degrees
      const Vec2 e0 = c - b, e1 = a - c, e2 = b - a;
      grads_[t] = {Vec2(e0.y(), -e0.x()) / (2 * A), Vec2(e1.y(), -e1.x()) / (2 * A), Vec2(e2.y(), -e2.x()) / (2 * A)};
      for (int k = 0; k < 3; ++k) mass_[tri[k]] += A / 3.0;
    }

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * nt);
    for (std::size_t t = 0; t < nt; ++t) {
      for (int k = 0; k < 3; ++k) {
        for (int l = 0; l < 3; ++l) {
          const int i = free_index_[mesh.triangles[t][k]], j = free_index_[mesh.triangles[t][l]];
          if (i >= 0 && j >= 0) trip.emplace_back(i, j, 0.0);
        }
      }
    }
    const auto n = static_cast<Eigen::Index>(free_.size());
    pattern_.resize(n, n);
    pattern_.setFromTriplets(trip.begin(), trip.end());
    pattern_.makeCompressed();
    slots_.assign(9 * nt, -1);
    for (std::size_t t = 0; t < nt; ++t) {
      for (int k = 0; k < 3; ++k) {
        for (int l = 0; l < 3; ++l) {
          const int i = free_index_[mesh.triangles[t][k]], j = free_index_[mesh.triangles[t][l]];
          if (i >= 0 && j >= 0) slots_[9 * t + 3 * k + l] = static_cast<int>(&pattern_.coeffRef(i, j) - pattern_.valuePtr());
        }
      }
    }
  }

  const Mesh& mesh() const { return *mesh_; }
  std::size_t num_free() const { return free_.size(); }
  const std::vector<int>& free_vertices() const { return free_; }
  const Eigen::VectorXd& mass() const { return mass_; }
  double triangle_area(std::size_t t) const { return area_[t]; }

  Vec2 gradient(const ScalarField& u, std::size_t t) const {
    const auto& tri = mesh_->triangles[t];
    return u[tri[0]] * grads_[t][0] + u[tri[1]] * grads_[t][1] + u[tri[2]] * grads_[t][2];
  }

  /// Copies the field with boundary values set to zero.
  ScalarField clamp_boundary(const ScalarField& u) const {
    if (u.size() != static_cast<Eigen::Index>(mesh_->num_vertices())) throw DomainError("field size does not match the mesh");
    ScalarField v = u;
    for (std::size_t i = 0; i < mesh_->num_vertices(); ++i) {
      if (mesh_->boundary[i]) v[static_cast<Eigen::Index>(i)] = 0.0;
    }
    return v;
  }
  ScalarField expand(const Eigen::VectorXd& x) const {
    ScalarField u = ScalarField::Zero(static_cast<Eigen::Index>(mesh_->num_vertices()));
    for (std::size_t i = 0; i < free_.size(); ++i) u[free_[i]] = x[static_cast<Eigen::Index>(i)];
    return u;
  }
  Eigen::VectorXd restrict(const ScalarField& u) const {
    Eigen::VectorXd x(static_cast<Eigen::Index>(free_.size()));
    for (std::size_t i = 0; i < free_.size(); ++i) x[static_cast<Eigen::Index>(i)] = u[free_[i]];
    return x;
  }

  /// Lumped integral of u and of u^2.
  double integral(const ScalarField& u) const { return mass_.dot(u); }
  double mass_norm2(const ScalarField& u) const { return mass_.dot(u.cwiseAbs2()); }

  /// Sum over triangles of |T| h_K(grad u)^2, exact for P1 fields.
  double dirichlet(const ConvexBody& K, const ScalarField& u) const {
    double s = 0.0;
    for (std::size_t t = 0; t < area_.size(); ++t) {
      const Vec2 g = gradient(u, t);
      if (g.squaredNorm() == 0.0) continue;
      const double h = K.support(g);
      s += area_[t] * h * h;
    }
    return s;
  }

  /// Gradient (over free vertices) of sum |T| H_K(grad u).
  Eigen::VectorXd dirichlet_gradient(const ConvexBody& K, const ScalarField& u) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(free_.size()));
    for (std::size_t t = 0; t < area_.size(); ++t) {
      const Vec2 d = area_[t] * K.quadratic_gradient(gradient(u, t));
      const auto& tri = mesh_->triangles[t];
      for (int k = 0; k < 3; ++k) {
        const int i = free_index_[tri[k]];
        if (i >= 0) g[i] += d.dot(grads_[t][k]);
      }
    }
    return g;
  }

  /// Energy, gradient and Hessian of sum |T| H_K(grad u) in one pass; the
  /// Hessian is written into the shared pattern.
  double assemble(const ConvexBody& K, const ScalarField& u, Eigen::VectorXd& grad,
                  Eigen::SparseMatrix<double>& hess) const {
    hess = pattern_;
    std::fill(hess.valuePtr(), hess.valuePtr() + hess.nonZeros(), 0.0);
    double* vals = hess.valuePtr();
    grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(free_.size()));
    double energy = 0.0;
    for (std::size_t t = 0; t < area_.size(); ++t) {
      const QuadraticJet jet = K.quadratic_jet(gradient(u, t));
      const double A = area_[t];
      energy += A * jet.value;
      const auto& tri = mesh_->triangles[t];
      Vec2 sg[3];
      for (int k = 0; k < 3; ++k) sg[k] = jet.hessian * grads_[t][k];
      for (int k = 0; k < 3; ++k) {
        const int i = free_index_[tri[k]];
        if (i < 0) continue;
        grad[i] += A * jet.gradient.dot(grads_[t][k]);
        for (int l = 0; l < 3; ++l) {
          const int slot = slots_[9 * t + 3 * k + l];
          if (slot >= 0) vals[slot] += A * grads_[t][k].dot(sg[l]);
        }
      }
    }
    return energy;
  }

  /// Energy sum |T| H_K(grad u) only.
  double quadratic_energy(const ConvexBody& K, const ScalarField& u) const { return 0.5 * dirichlet(K, u); }

 private:
  const Mesh* mesh_;
  std::vector<int> free_;
  std::vector<int> free_index_;
  std::vector<double> area_;
  std::vector<std::array<Vec2, 3>> grads_;
  Eigen::VectorXd mass_;
  Eigen::SparseMatrix<double> pattern_;
  std::vector<int> slots_;
};

// ---------------------------------------------------------------------------
// quotients

/// (int u)^2 / int h_K^2(grad u), boundary values taken as zero. Any field
/// gives a lower bound for the discrete torsional rigidity.
inline double torsion_quotient(const ConvexBody& K, const Mesh& mesh, const ScalarField& u) {
  const P1Space space(mesh);
  const ScalarField v = space.clamp_boundary(u);
  if (v.cwiseAbs().maxCoeff() == 0.0) throw DomainError("field vanishes identically");
  const double q = space.dirichlet(K, v);
  if (!(q > 0.0)) throw std::logic_error("zero Dirichlet energy for a nonzero field");
  const double s = space.integral(v);
  return s * s / q;
}

/// int h_K^2(grad u) / int u^2, boundary values taken as zero.
inline double rayleigh_quotient(const ConvexBody& K, const Mesh& mesh, const ScalarField& u) {
  const P1Space space(mesh);
  const ScalarField v = space.clamp_boundary(u);
  if (v.cwiseAbs().maxCoeff() == 0.0) throw DomainError("field vanishes identically");
  const double q = space.dirichlet(K, v);
  if (!(q > 0.0)) throw std::logic_error("zero Dirichlet energy for a nonzero field");
  return q / space.mass_norm2(v);
}

/// Nodal interpolant of f on the mesh.
template <class F>
ScalarField interpolate(const Mesh& mesh, F&& f) {
  ScalarField u(static_cast<Eigen::Index>(mesh.num_vertices()));
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) u[static_cast<Eigen::Index>(i)] = f(mesh.vertices[i]);
  return u;
}

namespace detail {

using Factorization = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>;

/// Minimises J(w) = sum |T| H_K(grad w) - load . w over boundary-zero w by
/// damped Newton from `w`. K must be smooth away from the origin. The last
/// Hessian factorisation is left in `factor`.
class EnergyMinimizer {
 public:
  EnergyMinimizer(const P1Space& space, const SolverOptions& opts) : space_(space), opts_(opts) {}

  /// Returns the number of Newton steps taken.
  int minimize(const ConvexBody& K, const Eigen::VectorXd& load, ScalarField& w, std::vector<double>& history) {
    Eigen::VectorXd grad;
    Eigen::SparseMatrix<double> hess;
    for (int it = 0; it < opts_.max_newton; ++it) {
      const double quad = space_.assemble(K, w, grad, hess);
      const Eigen::VectorXd x = space_.restrict(w);
      const double J = quad - load.dot(x);
      history.push_back(J);
      grad -= load;
      factorize(hess);
      const Eigen::VectorXd step = -factor_.solve(grad);
      const double decrement = -grad.dot(step);
      if (!(decrement >= 0.0)) throw SolveError("Newton direction is not a descent direction", history);
      if (decrement <= opts_.newton_tol * std::max(std::abs(J), 1e-300)) return it;
      if (K.is_quadratic()) {
        w = space_.expand(x + step);
        return it + 1;
      }
      const double s = line_search(K, load, x, step, J, decrement);
      if (s <= 0.0) return it;  // no further progress at machine precision
      w = space_.expand(x + s * step);
    }
    throw SolveError("energy minimisation did not converge", history);
  }

  // Full step when it passes the Armijo test; otherwise the minimiser of
  // the convex restriction phi(s) = J(x + s d) on [0, 1], located by
  // regula falsi on phi'.
  double line_search(const ConvexBody& K, const Eigen::VectorXd& load, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& d, double J, double decrement) const {
    auto phi = [&](double s) { return space_.quadratic_energy(K, space_.expand(x + s * d)) - load.dot(x + s * d); };
    auto dphi = [&](double s) {
      return (space_.dirichlet_gradient(K, space_.expand(x + s * d)) - load).dot(d);
    };
    if (phi(1.0) <= J - 1e-4 * decrement) return 1.0;
    double a = 0.0, fa = -decrement, b = 1.0, fb = dphi(1.0);
    if (!(fb > 0.0)) return 1.0;
    int side = 0;
    double s = 0.5;
    for (int k = 0; k < 12; ++k) {
      s = (a * fb - b * fa) / (fb - fa);
      const double fs = dphi(s);
      if (fs > 0.0) {
        b = s, fb = fs;
        if (side == -1) fa *= 0.5;
        side = -1;
      } else {
        a = s, fa = fs;
        if (side == 1) fb *= 0.5;
        side = 1;
      }
      if (std::abs(fs) <= 1e-3 * decrement) break;
    }
    return phi(s) < J ? s : 0.0;
  }

  void factorize(const Eigen::SparseMatrix<double>& hess) {
    if (!analyzed_) {
      factor_.analyzePattern(hess);
      analyzed_ = true;
    }
    factor_.factorize(hess);
    if (factor_.info() != Eigen::Success) throw SolveError("Hessian factorisation failed", {});
  }

  Factorization& factor() { return factor_; }

 private:
  const P1Space& space_;
  const SolverOptions& opts_;
  Factorization factor_;
  bool analyzed_ = false;
};

/// Armijo descent on phi along -M^{-1} g, with M held in `metric`.
template <class Phi, class Grad>
int metric_descent(const P1Space& space, Factorization& metric, Phi&& phi, Grad&& subgrad, ScalarField& u, int iters,
                   std::vector<double>& history) {
  double value = phi(u);
  int taken = 0;
  for (int it = 0; it < iters; ++it) {
    const Eigen::VectorXd g = subgrad(u);
    const Eigen::VectorXd d = -metric.solve(g);
    const double slope = g.dot(d);
    if (!(slope < 0.0)) break;
    const Eigen::VectorXd x = space.restrict(u);
    double s = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls, s *= 0.5) {
      const ScalarField trial = space.expand(x + s * d);
      const double v = phi(trial);
      if (v <= value + 1e-4 * s * slope) {
        u = trial;
        value = v;
        moved = true;
        break;
      }
    }
    if (!moved) break;
    history.push_back(value);
    ++taken;
  }
  return taken;
}

inline std::vector<double> effective_schedule(const ConvexBody& K, const SolverOptions& opts) {
  if (K.is_smooth()) return {0.0};
  std::vector<double> s = opts.tau_schedule;
  if (s.empty() || s.back() != 0.0) s.push_back(0.0);
  return s;
}

inline ScalarField distance_start(const ConvexBody& K, const Mesh& mesh, const P1Space& space) {
  const Polygon omega = mesh.domain();
  ScalarField u(static_cast<Eigen::Index>(mesh.num_vertices()));
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    const Vec2& x = mesh.vertices[i];
    u[static_cast<Eigen::Index>(i)] = mesh.boundary[i] ? 0.0 : aniso_distance(K, x, omega);
  }
  u = space.clamp_boundary(u);
  const double q = space.dirichlet(K, u);
  return (q > 0.0) ? ScalarField(u * (space.integral(u) / q)) : u;
}

}  // namespace detail

/// Minimises sum |T| H_K(grad u) - int u over boundary-zero P1 fields and
/// reports T = int u, rescaled along its ray so that int h_K^2(grad u) =
/// int u holds exactly for the exact body.
inline SolveReport solve_torsion(const ConvexBody& K, const Mesh& mesh, const SolverOptions& opts = {}) {
  const P1Space space(mesh);
  const Eigen::VectorXd load = space.restrict(space.mass());
  detail::EnergyMinimizer newton(space, opts);
  SolveReport rep;
  ScalarField u = detail::distance_start(K, mesh, space);

  const auto schedule = detail::effective_schedule(K, opts);
  for (double tau : schedule) {
    if (tau > 0.0) {
      rep.iterations += newton.minimize(smooth_approx(K, tau).body, load, u, rep.energy_history);
    } else if (K.is_smooth()) {
      rep.iterations += newton.minimize(K, load, u, rep.energy_history);
    } else if (schedule.size() > 1) {
      auto phi = [&](const ScalarField& w) { return space.quadratic_energy(K, w) - space.integral(w); };
      auto sub = [&](const ScalarField& w) { return Eigen::VectorXd(space.dirichlet_gradient(K, w) - load); };
      rep.iterations += detail::metric_descent(space, newton.factor(), phi, sub, u, opts.polish_iters, rep.energy_history);
    } else {
      throw DomainError("a non-smooth body needs a positive smoothing parameter in the schedule");
    }
    rep.tau_final = tau;
  }

  const double q = space.dirichlet(K, u);
  if (!(q > 0.0)) throw SolveError("torsion minimiser vanished", rep.energy_history);
  u *= space.integral(u) / q;
  rep.field = u;
  rep.value = space.integral(u);
  rep.residual = std::abs(space.dirichlet(K, u) - rep.value) / rep.value;
  return rep;
}

namespace detail {

/// Newton's method on the bordered system grad E(u) = lambda M u, u'Mu = 1
/// for a smooth body. Converges regardless of the spectral gap but only
/// locally, so the result is accepted only if lambda did not increase and the
/// field kept one sign; otherwise `u` and `lambda` are left untouched.
inline bool bordered_newton(const ConvexBody& K, const P1Space& space, ScalarField& u, double& lambda, double tol,
                            double& last_change) {
  const Eigen::VectorXd m = space.restrict(space.mass());
  const auto n = static_cast<Eigen::Index>(space.num_free());
  Eigen::VectorXd x = space.restrict(u);
  double mu = lambda;
  Eigen::VectorXd g;
  Eigen::SparseMatrix<double> hess;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool done = false;
  double change = 0.0;
  for (int it = 0; it < 20 && !done; ++it) {
    space.assemble(K, space.expand(x), g, hess);
    const Eigen::VectorXd mx = m.cwiseProduct(x);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(hess.nonZeros() + 3 * n));
    for (Eigen::Index c = 0; c < hess.outerSize(); ++c) {
      for (Eigen::SparseMatrix<double>::InnerIterator e(hess, c); e; ++e) trip.emplace_back(e.row(), e.col(), e.value());
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      trip.emplace_back(i, i, -mu * m[i]);
      trip.emplace_back(i, n, -mx[i]);
      trip.emplace_back(n, i, -mx[i]);
    }
    Eigen::SparseMatrix<double> jac(n + 1, n + 1);
    jac.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd rhs(n + 1);
    rhs.head(n) = -(g - mu * mx);
    rhs[n] = -0.5 * (1.0 - x.dot(mx));
    lu.compute(jac);
    if (lu.info() != Eigen::Success) return false;
    const Eigen::VectorXd step = lu.solve(rhs);
    if (!step.allFinite()) return false;
    x += step.head(n);
    mu += step[n];
    change = std::abs(step[n]) / std::abs(mu);
    done = change <= tol && step.head(n).norm() <= 1e-8 * x.norm();
  }
  if (!done) return false;
  ScalarField v = space.expand(x);
  if (space.integral(v) < 0.0) v = -v;
  if (v.minCoeff() < -1e-8 * v.maxCoeff()) return false;
  v /= std::sqrt(space.mass_norm2(v));
  const double q = space.dirichlet(K, v);
  if (!(q <= lambda * (1.0 + 1e-12))) return false;
  u = v;
  lambda = q;
  last_change = change;
  return true;
}

/// Nonlinear inverse iteration for a smooth body: w = argmin sum |T| H(grad w)
/// - (m u) . w, u <- w / |w|_M, until the Rayleigh quotient settles.
inline double inverse_iteration(const ConvexBody& K, const P1Space& space, EnergyMinimizer& newton, ScalarField& u,
                                double tol, int max_iters, SolveReport& rep, std::vector<double>& lambdas) {
  double lambda = space.dirichlet(K, u) / space.mass_norm2(u);
  lambdas.push_back(lambda);
  int sign_changes = 0;
  int newton_at = 0;
  double last_delta = 0.0;
  if (K.is_quadratic()) {
    Eigen::VectorXd g;
    Eigen::SparseMatrix<double> hess;
    space.assemble(K, u, g, hess);
    newton.factorize(hess);
  }
  for (int it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd load = space.restrict(space.mass().cwiseProduct(u));
    ScalarField w = u / lambda;
    if (K.is_quadratic()) {
      w = space.expand(newton.factor().solve(load));
    } else {
      std::vector<double> inner;
      rep.iterations += newton.minimize(K, load, w, inner);
    }
    ++rep.iterations;
    const double norm = std::sqrt(space.mass_norm2(w));
    if (!(norm > 0.0)) throw SolveError("inverse iteration collapsed", lambdas);
    u = w / norm;
    if (space.integral(u) < 0.0) u = -u;
    const double next = space.dirichlet(K, u);
    const double delta = next - lambda;
    lambdas.push_back(next);
    rep.energy_history.push_back(next);
    const double rel = std::abs(delta) / next;
    lambda = next;
    rep.residual = rel;
    if (rel < tol) return lambda;
    // small spectral gaps make the plain iteration crawl; finish with Newton
    // once the iterate is close enough
    if (rel < 1e-3 && it >= newton_at) {
      if (bordered_newton(K, space, u, lambda, tol, rep.residual)) {
        lambdas.push_back(lambda);
        rep.energy_history.push_back(lambda);
        return lambda;
      }
      newton_at = it + 25;
    }
    if (it > 0 && delta * last_delta < 0.0 && rel > 10.0 * tol) ++sign_changes;
    if (sign_changes >= 6) throw SolveError("possible eigenvalue multiplicity", lambdas);
    last_delta = delta;
  }
  throw SolveError("eigenvalue iteration did not converge", lambdas);
}

}  // namespace detail

/// First eigenvalue of -Delta_K by nonlinear inverse iteration started from
/// the torsion function (or `start`); the returned field is positive, unit in the lumped
/// L2 norm, and value is its Rayleigh quotient for the exact body.
inline SolveReport solve_eigen(const ConvexBody& K, const Mesh& mesh, const SolverOptions& opts = {},
                               const ScalarField* start = nullptr) {
  const P1Space space(mesh);
  SolveReport rep;
  ScalarField u = start ? space.clamp_boundary(*start) : solve_torsion(K, mesh, opts).field;
  if (!(space.mass_norm2(u) > 0.0)) throw DomainError("start field vanishes identically");
  u /= std::sqrt(space.mass_norm2(u));
  detail::EnergyMinimizer newton(space, opts);
  std::vector<double> lambdas;

  const auto schedule = detail::effective_schedule(K, opts);
  for (std::size_t s = 0; s < schedule.size(); ++s) {
    const double tau = schedule[s];
    if (tau > 0.0) {
      const double tol = (s + 2 < schedule.size()) ? std::max(opts.stage_tol, opts.eigen_tol) : opts.eigen_tol;
      detail::inverse_iteration(smooth_approx(K, tau).body, space, newton, u, tol, opts.max_iters, rep, lambdas);
    } else if (K.is_smooth()) {
      detail::inverse_iteration(K, space, newton, u, opts.eigen_tol, opts.max_iters, rep, lambdas);
    } else if (schedule.size() > 1) {
      auto phi = [&](const ScalarField& w) { return space.dirichlet(K, w) / space.mass_norm2(w); };
      auto sub = [&](const ScalarField& w) {
        const double n = space.mass_norm2(w);
        const double r = space.dirichlet(K, w) / n;
        const Eigen::VectorXd m = space.restrict(space.mass().cwiseProduct(w));
        return Eigen::VectorXd((2.0 * space.dirichlet_gradient(K, w) - 2.0 * r * m) / n);
      };
      std::vector<double> hist;
      const double before = phi(u);
      rep.iterations += detail::metric_descent(space, newton.factor(), phi, sub, u, opts.polish_iters, hist);
      rep.energy_history.insert(rep.energy_history.end(), hist.begin(), hist.end());
      if (!hist.empty()) {
        const double prev = hist.size() > 1 ? hist[hist.size() - 2] : before;
        rep.residual = std::abs(prev - hist.back()) / hist.back();
      }
      u /= std::sqrt(space.mass_norm2(u));
    } else {
      throw DomainError("a non-smooth body needs a positive smoothing parameter in the schedule");
    }
    rep.tau_final = tau;
  }
  if (space.integral(u) < 0.0) u = -u;
  rep.field = u;
  rep.value = space.dirichlet(K, u) / space.mass_norm2(u);
  return rep;
}

}  // namespace aniso
