#pragma once

#include "hostcap/network.hpp"

#include <Eigen/Core>

namespace hostcap {

struct LpFeasibility {
  bool feasible = false;
  Vector x;               ///< feasible point when feasible
  double residual = 0.0;  ///< inf-norm of A x - b at x
};

/// Decides whether {x : A x = b, x >= lower} is nonempty with a dense
/// phase-1 simplex (Bland's rule). A returned point is re-solved on its
/// basis and satisfies ||A x - b||_inf <= 1e-9. Throws NumericalFailure
/// when the basis solve cannot reach that accuracy.
[[nodiscard]] LpFeasibility solve_lp_feasibility(const Eigen::MatrixXd& A, const Vector& b, const Vector& lower);

}  // namespace hostcap
