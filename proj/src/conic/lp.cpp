#include "hostcap/conic/lp.hpp"

#include "hostcap/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace hostcap {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kResidualTol = 1e-9;

}  // namespace

LpFeasibility solve_lp_feasibility(const Eigen::MatrixXd& A, const Vector& b, const Vector& lower) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  require(b.size() == m && lower.size() == n, ErrorKind::DimensionMismatch, "LP data dimensions disagree");

  // Shift to x' = x - lower >= 0 and make the right-hand side nonnegative.
  Vector rhs = b - A * lower;
  Eigen::MatrixXd Ashift = A;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (rhs[i] < 0.0) {
      rhs[i] = -rhs[i];
      Ashift.row(i) *= -1.0;
    }
  }
  const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>() + (n > 0 ? Ashift.lpNorm<Eigen::Infinity>() : 0.0);

  // Tableau [A I | rhs] with phase-1 cost row at index m.
  const Eigen::Index cols = n + m;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + 1, cols + 1);
  T.topLeftCorner(m, n) = Ashift;
  T.block(0, n, m, m).setIdentity();
  T.topRightCorner(m, 1) = rhs;
  for (Eigen::Index i = 0; i < m; ++i) T.row(m) -= T.row(i);
  T.block(m, n, 1, m).setZero();
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

  const double eps = kPivotTol * scale;
  for (int iter = 0; iter < 50000; ++iter) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (T(m, j) < -eps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    Eigen::Index leave = -1;
    double best = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (T(i, enter) > eps) {
        const double ratio = T(i, cols) / T(i, enter);
        if (leave < 0 || ratio < best - 1e-15 ||
            (std::abs(ratio - best) <= 1e-15 && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
          leave = i;
          best = ratio;
        }
      }
    }
    if (leave < 0) break;  // cannot happen in phase 1 (objective bounded below)
    T.row(leave) /= T(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i != leave && T(i, enter) != 0.0) T.row(i) -= T(i, enter) * T.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
  }

  const double infeasibility = -T(m, cols);
  if (infeasibility > 1e-9 * scale) return LpFeasibility{false, {}, infeasibility};

  // Recompute the basic solution from the original columns.
  std::vector<Eigen::Index> basic_cols;
  for (Eigen::Index col : basis) {
    if (col < n) basic_cols.push_back(col);
  }
  Vector x = Vector::Zero(n);
  if (!basic_cols.empty()) {
    Eigen::MatrixXd B(m, static_cast<Eigen::Index>(basic_cols.size()));
    for (std::size_t k = 0; k < basic_cols.size(); ++k) B.col(static_cast<Eigen::Index>(k)) = Ashift.col(basic_cols[k]);
    const Vector xb = B.colPivHouseholderQr().solve(rhs);
    for (std::size_t k = 0; k < basic_cols.size(); ++k) x[basic_cols[k]] = std::max(0.0, xb[static_cast<Eigen::Index>(k)]);
  }
  x += lower;
  const double residual = m > 0 ? (A * x - b).lpNorm<Eigen::Infinity>() : 0.0;
  require(residual <= kResidualTol, ErrorKind::NumericalFailure,
          "LP basis solve residual " + std::to_string(residual) + " above tolerance");
  return LpFeasibility{true, x, residual};
}

}  // namespace hostcap
