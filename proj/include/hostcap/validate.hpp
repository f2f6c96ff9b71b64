#pragma once

#include "hostcap/hca.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hostcap {

struct GapEntry {
  int scenario = 0;
  int line = 0;
  double gap = 0.0;
};

/// W_from * L - P^2 - Q^2 for every line and scenario (rows: scenarios).
struct GapReport {
  Matrix gaps;
  double max_gap = 0.0;
  double min_gap = 0.0;
  /// Entries with gap > exactness_tol, where the relaxation is not tight.
  std::vector<GapEntry> loose;
  /// min_gap >= -feas_tol.
  bool direction_ok = true;

  [[nodiscard]] bool tight() const noexcept { return loose.empty(); }
};

[[nodiscard]] GapReport relaxation_gap(const RadialNetwork& net, const std::vector<FlowState>& flow_states,
                                       double exactness_tol = 1e-6, double feas_tol = 1e-8);
[[nodiscard]] GapReport relaxation_gap(const RadialNetwork& net, const HcResult& result,
                                       double exactness_tol = 1e-6, double feas_tol = 1e-8);

enum class LimitKind { UpperVoltage, LowerVoltage, Flow };
[[nodiscard]] std::string_view to_string(LimitKind kind) noexcept;

struct ViolationRow {
  LimitKind kind = LimitKind::UpperVoltage;
  int index = 0;  ///< 0-based bus (voltage) or line (flow)
  int violations = 0;
  int scenarios = 0;
  double fraction = 0.0;
  double bound = 0.0;  ///< 1 - nu or 1 - gamma
  /// Largest admissible count, bound * scenarios rounded down (with the same
  /// 1e-9 snapping as cvar so that 1 - 0.9 admits exactly 10%).
  int allowed = 0;
  [[nodiscard]] bool within() const noexcept { return violations <= allowed; }
};

struct ViolationTable {
  std::vector<ViolationRow> rows;
  [[nodiscard]] bool all_within() const;
};

/// One row per voltage limit at buses 2..n (2(n - 1)) and per flow limit (n - 1).
[[nodiscard]] ViolationTable violation_histogram(const RadialNetwork& net, const std::vector<FlowState>& flow_states,
                                                 const RiskParams& risk);

/// Columns: constraint,index,violations,scenarios,fraction,bound,within (index 1-based).
void write_violation_csv(const ViolationTable& table, std::ostream& out);

struct CvarCheck {
  LimitKind kind = LimitKind::UpperVoltage;
  int index = 0;
  double cvar = 0.0;              ///< closed form on the solved samples
  double limit = 0.0;
  double anchor_objective = 0.0;  ///< variational objective at the stored anchor
  [[nodiscard]] double margin() const noexcept { return limit - cvar; }
};

struct CvarRecheck {
  std::vector<CvarCheck> checks;
  double tolerance = 1e-6;
  /// Every cvar <= limit + tolerance.
  [[nodiscard]] bool within_limits() const;
  /// Every anchor objective >= cvar (up to round-off). A failure means the
  /// closed form and the variational form disagree.
  [[nodiscard]] bool anchors_consistent(double tol = 1e-9) const;
};

/// Quantities checked: W (upper, level nu), -W against -W_min (lower, level nu)
/// and P^2 + Q^2 against S_max^2 (level gamma).
[[nodiscard]] CvarRecheck recheck_cvar(const RadialNetwork& net, const HcResult& result, const RiskParams& risk,
                                       double tolerance = 1e-6);

struct ValidationReport {
  GapReport gap;
  ViolationTable violations;
  CvarRecheck cvar;
  /// Gap direction, chance bound and CVaR limits all hold.
  [[nodiscard]] bool passed() const;
};

[[nodiscard]] ValidationReport validate_result(const RadialNetwork& net, const ScenarioSet& scen,
                                               const HcResult& result, double exactness_tol = 1e-6,
                                               double feas_tol = 1e-8);

/// Summary JSON (sorted keys); per-entry gap matrix omitted, loose entries listed.
[[nodiscard]] std::string report_to_json(const ValidationReport& report);

}  // namespace hostcap
