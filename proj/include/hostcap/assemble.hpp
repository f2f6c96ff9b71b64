#pragma once

#include "hostcap/conic/program.hpp"
#include "hostcap/network.hpp"
#include "hostcap/scenarios.hpp"

namespace hostcap {

/// CVaR levels for the voltage (nu) and line-flow (gamma) constraints.
struct RiskParams {
  double nu = 0.9;
  double gamma = 0.9;

  /// Throws BadDelta unless both levels lie in [0, 1).
  void validate() const;
};

struct AssembleOptions {
  /// Weight on the scenario-averaged resistive losses sum_e r_e L_e added to
  /// the objective. Zero reproduces the pure capacity/feasibility programs; a
  /// positive weight pushes the cone relaxation onto its boundary.
  double loss_weight = 0.0;
};

/// Variable layout (all blocks contiguous, in this order):
///   psi (n-1, capacity program only), w_upper (n), w_lower (n), s_flow (n-1),
///   then per scenario k: P, Q (n-1), W (n), L (n-1), t_upper (n),
///   t_lower (n), t_flow (n-1).
namespace block {
inline constexpr const char* psi = "psi";
inline constexpr const char* w_upper = "w_upper";
inline constexpr const char* w_lower = "w_lower";
inline constexpr const char* s_flow = "s_flow";
inline constexpr const char* P = "P";
inline constexpr const char* Q = "Q";
inline constexpr const char* W = "W";
inline constexpr const char* L = "L";
inline constexpr const char* t_upper = "t_upper";
inline constexpr const char* t_lower = "t_lower";
inline constexpr const char* t_flow = "t_flow";
}  // namespace block

/// Capacity maximization: min -1'psi (+ losses) over the sampled CVaR program.
[[nodiscard]] ConicProgram build_hc_max(const RadialNetwork& net, const ScenarioSet& scen, const RiskParams& risk,
                                        const AssembleOptions& opts = {});

/// Feasibility program at fixed psi. psi enters only the balance equalities,
/// through C_psi / E_psi of the program.
[[nodiscard]] ConicProgram build_acceptability(const RadialNetwork& net, const ScenarioSet& scen,
                                               const RiskParams& risk, const Vector& psi,
                                               const AssembleOptions& opts = {});

/// Per-scenario flow state read back from a solution vector.
[[nodiscard]] FlowState extract_flow(const ConicProgram& program, const Vector& x, int scenario);

struct CvarAnchors {
  Vector w_upper;
  Vector w_lower;
  Vector s_flow;
};

[[nodiscard]] CvarAnchors extract_anchors(const ConicProgram& program, const Vector& x);

/// Per-scenario program size. Constraints are counted as modelling rows:
/// the fixed substation voltage is a boundary condition rather than a row,
/// and a flow hinge cone together with its slack sign row counts once.
struct ScenarioSize {
  int variables = 0;
  int constraints = 0;
  int raw_rows = 0;  ///< every equality, inequality and cone tagged with the scenario
};

[[nodiscard]] ScenarioSize scenario_size(const ConicProgram& program, int scenario);

/// True when 0 <= psi <= psi_max.
[[nodiscard]] bool psi_in_box(const RadialNetwork& net, const Vector& psi, double tol = 0.0);

}  // namespace hostcap
