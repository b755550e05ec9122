#pragma once
//
// Dense two-phase simplex for the tiny linear programs that appear in the
// geometry code (a handful of variables, at most a few hundred rows).
// Bland's rule keeps it finite on the highly degenerate problems produced
// by symmetric polygons.
//

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

namespace aniso {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
};

/// maximize c.x  subject to  A x <= b,  Aeq x = beq,  x >= 0.
/// Either constraint block may have zero rows.
inline LpResult solve_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::MatrixXd& Aeq,
                         const Eigen::VectorXd& beq, const Eigen::VectorXd& c, double tol = 1e-10) {
  const int n = static_cast<int>(c.size());
  const int mi = static_cast<int>(A.rows());
  const int me = static_cast<int>(Aeq.rows());
  const int m = mi + me;

  // Columns: structural | slacks (one per inequality) | artificials | rhs.
  std::vector<int> needs_artificial;
  for (int i = 0; i < mi; ++i) {
    if (b[i] < 0.0) needs_artificial.push_back(i);
  }
  for (int i = 0; i < me; ++i) needs_artificial.push_back(mi + i);
  const int na = static_cast<int>(needs_artificial.size());
  const int cols = n + mi + na;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + 1, cols + 1);
  std::vector<int> basis(m);

  for (int i = 0; i < mi; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    T.row(i).head(n) = sign * A.row(i);
    T(i, n + i) = sign;
    T(i, cols) = sign * b[i];
    basis[i] = n + i;
  }
  for (int i = 0; i < me; ++i) {
    const double sign = beq[i] < 0.0 ? -1.0 : 1.0;
    T.row(mi + i).head(n) = sign * Aeq.row(i);
    T(mi + i, cols) = sign * beq[i];
  }
  for (int k = 0; k < na; ++k) {
    T(needs_artificial[k], n + mi + k) = 1.0;
    basis[needs_artificial[k]] = n + mi + k;
  }

  auto pivot = [&](int row, int col) {
    T.row(row) /= T(row, col);
    for (int r = 0; r <= m; ++r) {
      if (r != row && T(r, col) != 0.0) T.row(r) -= T(r, col) * T.row(row);
    }
    basis[row] = col;
  };

  // Maximise the objective held in the last row (stored as reduced costs
  // z_j - c_j); `allowed` limits entering columns.
  auto run = [&](int allowed) -> bool {
    for (int iter = 0; iter < 50000; ++iter) {
      int enter = -1;
      for (int j = 0; j < allowed; ++j) {
        if (T(m, j) < -tol) { enter = j; break; }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (T(i, enter) > tol) {
          const double ratio = T(i, cols) / T(i, enter);
          if (ratio < best - tol || (std::abs(ratio - best) <= tol && leave >= 0 && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    return true;
  };

  LpResult result;
  if (na > 0) {
    // Phase 1: maximise -sum(artificials).
    T.row(m).setZero();
    for (int k = 0; k < na; ++k) T(m, n + mi + k) = 1.0;
    for (int k = 0; k < na; ++k) T.row(m) -= T.row(needs_artificial[k]);
    run(cols);
    // T(m, cols) now holds -sum(artificials) at the phase-1 optimum.
    if (T(m, cols) < -1e-9) {
      result.status = LpStatus::Infeasible;
      return result;
    }
    // Drive remaining artificials out of the basis where possible.
    for (int i = 0; i < m; ++i) {
      if (basis[i] >= n + mi) {
        for (int j = 0; j < n + mi; ++j) {
          if (std::abs(T(i, j)) > tol) { pivot(i, j); break; }
        }
      }
    }
  }

  // Phase 2 over structural and slack columns only.
  T.row(m).setZero();
  T.row(m).head(n) = -c.transpose();
  for (int i = 0; i < m; ++i) {
    const int j = basis[i];
    if (j < n && c[j] != 0.0) T.row(m) += c[j] * T.row(i);
  }
  if (!run(n + mi)) {
    result.status = LpStatus::Unbounded;
    return result;
  }
  result.status = LpStatus::Optimal;
  result.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) result.x[basis[i]] = T(i, cols);
  }
  result.objective = c.dot(result.x);
  return result;
}

}  // namespace aniso
