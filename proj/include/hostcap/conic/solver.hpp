#pragma once

#include "hostcap/conic/program.hpp"

#include <string_view>

namespace hostcap {

enum class SolveStatus { Optimal, Infeasible, InfeasibleNoCertificate, Unbounded, NumericalFailure };

[[nodiscard]] std::string_view to_string(SolveStatus status) noexcept;

/// Dual multipliers in the layout of the program blocks: lambda for the
/// equalities, mu for the orthant rows, cone for the stacked cone rows
/// (per cone: the scalar multiplier first, then the vector part).
struct Certificate {
  Vector lambda;
  Vector mu;
  Vector cone;

  [[nodiscard]] double inf_norm() const;
  [[nodiscard]] Certificate scaled(double factor) const;
};

struct SolverOptions {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iter = 200;
  /// Multiplier applied to the cost vector before solving.
  double objective_scale = 1.0;
  int equilibration_passes = 3;
  double static_regularization = 1e-8;
  int refinement_steps = 8;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vector x;
  Certificate dual;         ///< optimal multipliers when Optimal
  Certificate certificate;  ///< infeasibility ray when Infeasible, inf-norm 1
  double objective = 0.0;   ///< c'x of the unscaled program
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
};

/// Primal-dual interior point on the homogeneous self-dual embedding.
[[nodiscard]] SolveOutcome solve(const ConicProgram& program, const SolverOptions& opts = {});

/// Dual objective of the feasibility problem at psi:
///   (C psi - E)'lambda - b_in'mu - sum_i (G_i'mu1_i + g_i mu2_i).
[[nodiscard]] double dual_objective(const Certificate& cert, const ConicProgram& program, const Vector& psi);

/// inf-norm of  A_in'mu - A_eq'lambda - H'cone  (stationarity of the dual).
[[nodiscard]] double stationarity_residual(const Certificate& cert, const ConicProgram& program);

/// Largest amount by which mu leaves the orthant or a cone multiplier leaves its cone.
[[nodiscard]] double dual_cone_violation(const Certificate& cert, const ConicProgram& program);

}  // namespace hostcap
