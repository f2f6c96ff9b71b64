#pragma once

#include "hostcap/assemble.hpp"
#include "hostcap/conic/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hostcap {

struct HcOptions {
  SolverOptions solver;
  AssembleOptions assemble;
  /// Solve the psi = 0 feasibility problem first and fail with
  /// BaseInfeasible if it has no solution.
  bool check_base = true;
};

struct SolverStats {
  std::string status;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
};

/// Fractions of scenarios violating each limit.
struct ViolationFractions {
  Vector upper_voltage;  ///< per bus, W > W_max
  Vector lower_voltage;  ///< per bus, W < W_min
  Vector flow;           ///< per line, P^2 + Q^2 > S_max^2
};

struct HcResult {
  Vector psi_star;
  double objective = 0.0;  ///< sum(psi_star), recomputed
  std::vector<FlowState> flow_states;
  CvarAnchors anchors;
  SolverStats solver;
  RiskParams risk;
  int scenarios = 0;
  std::string scenario_digest;
  std::string network_digest;
  ViolationFractions violations;
};

[[nodiscard]] std::string network_digest(const RadialNetwork& net);

[[nodiscard]] ViolationFractions violation_fractions(const RadialNetwork& net,
                                                     const std::vector<FlowState>& flow_states);

/// Maximizes 1'psi subject to the sampled CVaR constraints.
/// Throws BaseInfeasible, NumericalFailure, DimensionMismatch, BadDelta.
[[nodiscard]] HcResult maximize_capacity(const RadialNetwork& net, const ScenarioSet& scen, const RiskParams& risk,
                                         const HcOptions& opts = {});

struct StudyRow {
  int size = 0;
  int trials = 0;      ///< successful trials
  int failures = 0;    ///< trials whose solve threw
  double mean = 0.0;
  double stddev = 0.0;  ///< sample standard deviation
  bool stddev_defined = false;
  std::vector<double> objectives;
};

struct StudyOptions {
  HcOptions hc;
  int threads = 1;
};

/// For each size, `trials` independent subsamples and maximizations.
/// Trial seeds are drawn in order from one generator seeded with `seed`.
[[nodiscard]] std::vector<StudyRow> subsample_study(const RadialNetwork& net, const ScenarioSet& scen,
                                                    const RiskParams& risk, const std::vector<int>& sizes,
                                                    int trials, std::uint64_t seed, const StudyOptions& opts = {});

/// Result file with sorted keys; deterministic for identical inputs.
[[nodiscard]] std::string result_to_json(const HcResult& result);
[[nodiscard]] HcResult parse_result(const std::string& json_text);

}  // namespace hostcap
