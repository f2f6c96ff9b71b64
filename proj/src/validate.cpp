#include "hostcap/validate.hpp"

#include "hostcap/cvar.hpp"
#include "hostcap/error.hpp"
#include "hostcap/util.hpp"
#include "json_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace hostcap {

using detail::json;

GapReport relaxation_gap(const RadialNetwork& net, const std::vector<FlowState>& flow_states, double exactness_tol,
                         double feas_tol) {
  const int m = net.lines();
  const auto K = static_cast<Eigen::Index>(flow_states.size());
  GapReport rep;
  rep.gaps = Matrix::Zero(K, m);
  if (K == 0 || m == 0) return rep;
  rep.max_gap = -std::numeric_limits<double>::infinity();
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < K; ++k) {
    const FlowState& fs = flow_states[static_cast<std::size_t>(k)];
    require(fs.P.size() == m && fs.Q.size() == m && fs.L.size() == m && fs.W.size() == net.buses(),
            ErrorKind::DimensionMismatch, "flow state does not match network");
    for (int e = 0; e < m; ++e) {
      const double w_from = fs.W[net.edges()[static_cast<std::size_t>(e)].from];
      const double g = w_from * fs.L[e] - fs.P[e] * fs.P[e] - fs.Q[e] * fs.Q[e];
      rep.gaps(k, e) = g;
      rep.max_gap = std::max(rep.max_gap, g);
      rep.min_gap = std::min(rep.min_gap, g);
      if (g > exactness_tol) rep.loose.push_back(GapEntry{static_cast<int>(k), e, g});
    }
  }
  rep.direction_ok = rep.min_gap >= -feas_tol;
  return rep;
}

GapReport relaxation_gap(const RadialNetwork& net, const HcResult& result, double exactness_tol, double feas_tol) {
  return relaxation_gap(net, result.flow_states, exactness_tol, feas_tol);
}

std::string_view to_string(LimitKind kind) noexcept {
  switch (kind) {
    case LimitKind::UpperVoltage: return "upper_voltage";
    case LimitKind::LowerVoltage: return "lower_voltage";
    case LimitKind::Flow: return "flow";
  }
  return "unknown";
}

bool ViolationTable::all_within() const {
  return std::all_of(rows.begin(), rows.end(), [](const ViolationRow& r) { return r.within(); });
}

ViolationTable violation_histogram(const RadialNetwork& net, const std::vector<FlowState>& flow_states,
                                   const RiskParams& risk) {
  const int n = net.buses();
  const int m = net.lines();
  const int K = static_cast<int>(flow_states.size());
  ViolationTable table;
  auto add = [&](LimitKind kind, int index, int count, double bound) {
    const double mass = bound * K;
    const int allowed = static_cast<int>(std::floor(mass + 1e-9 * std::max(1, K)));
    ViolationRow row{kind, index, count, K, K > 0 ? static_cast<double>(count) / K : 0.0, bound, allowed};
    table.rows.push_back(row);
  };
  // The substation voltage is fixed, so only buses 2..n carry voltage limits.
  for (int j = 1; j < n; ++j) {
    int up = 0, lo = 0;
    for (const FlowState& fs : flow_states) {
      up += fs.W[j] > net.w_max()[j];
      lo += fs.W[j] < net.w_min()[j];
    }
    add(LimitKind::UpperVoltage, j, up, 1.0 - risk.nu);
    add(LimitKind::LowerVoltage, j, lo, 1.0 - risk.nu);
  }
  for (int e = 0; e < m; ++e) {
    int c = 0;
    for (const FlowState& fs : flow_states) c += fs.P[e] * fs.P[e] + fs.Q[e] * fs.Q[e] > net.s_max()[e] * net.s_max()[e];
    add(LimitKind::Flow, e, c, 1.0 - risk.gamma);
  }
  return table;
}

void write_violation_csv(const ViolationTable& table, std::ostream& out) {
  out << "constraint,index,violations,scenarios,fraction,bound,within\n";
  for (const ViolationRow& r : table.rows) {
    out << to_string(r.kind) << ',' << r.index + 1 << ',' << r.violations << ',' << r.scenarios << ','
        << format_double(r.fraction) << ',' << format_double(r.bound) << ',' << (r.within() ? 1 : 0) << '\n';
  }
}

bool CvarRecheck::within_limits() const {
  return std::all_of(checks.begin(), checks.end(),
                     [this](const CvarCheck& c) { return c.cvar <= c.limit + tolerance; });
}

bool CvarRecheck::anchors_consistent(double tol) const {
  return std::all_of(checks.begin(), checks.end(), [tol](const CvarCheck& c) {
    return c.anchor_objective >= c.cvar - tol * std::max(1.0, std::abs(c.cvar));
  });
}

CvarRecheck recheck_cvar(const RadialNetwork& net, const HcResult& result, const RiskParams& risk, double tolerance) {
  risk.validate();
  const int n = net.buses();
  const int m = net.lines();
  const auto& states = result.flow_states;
  require(!states.empty(), ErrorKind::InvalidArgument, "result has no flow states");
  const bool have_anchors = result.anchors.w_upper.size() == n && result.anchors.w_lower.size() == n &&
                            result.anchors.s_flow.size() == m;
  CvarRecheck out;
  out.tolerance = tolerance;
  std::vector<double> v(states.size());
  auto check = [&](LimitKind kind, int index, double delta, double limit, double anchor) {
    CvarCheck c{kind, index, cvar(v, delta), limit, 0.0};
    c.anchor_objective = have_anchors ? cvar_objective(v, delta, anchor) : c.cvar;
    out.checks.push_back(c);
  };
  for (int j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < states.size(); ++k) v[k] = states[k].W[j];
    check(LimitKind::UpperVoltage, j, risk.nu, net.w_max()[j], have_anchors ? result.anchors.w_upper[j] : 0.0);
  }
  for (int j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < states.size(); ++k) v[k] = -states[k].W[j];
    check(LimitKind::LowerVoltage, j, risk.nu, -net.w_min()[j], have_anchors ? result.anchors.w_lower[j] : 0.0);
  }
  for (int e = 0; e < m; ++e) {
    for (std::size_t k = 0; k < states.size(); ++k) {
      v[k] = states[k].P[e] * states[k].P[e] + states[k].Q[e] * states[k].Q[e];
    }
    check(LimitKind::Flow, e, risk.gamma, net.s_max()[e] * net.s_max()[e],
          have_anchors ? result.anchors.s_flow[e] : 0.0);
  }
  return out;
}

bool ValidationReport::passed() const { return gap.direction_ok && violations.all_within() && cvar.within_limits(); }

ValidationReport validate_result(const RadialNetwork& net, const ScenarioSet& scen, const HcResult& result,
                                 double exactness_tol, double feas_tol) {
  if (!result.scenario_digest.empty() && result.scenario_digest != scenario_digest(scen)) {
    throw Error(ErrorKind::ProvenanceMismatch, "result was computed from a different scenario file");
  }
  if (!result.network_digest.empty() && result.network_digest != network_digest(net)) {
    throw Error(ErrorKind::ProvenanceMismatch, "result was computed for a different network");
  }
  require(static_cast<int>(result.flow_states.size()) == scen.count(), ErrorKind::DimensionMismatch,
          "result flow states do not match the scenario count");
  ValidationReport rep;
  rep.gap = relaxation_gap(net, result, exactness_tol, feas_tol);
  rep.violations = violation_histogram(net, result.flow_states, result.risk);
  rep.cvar = recheck_cvar(net, result, result.risk);
  return rep;
}

std::string report_to_json(const ValidationReport& rep) {
  json doc;
  json loose = json::array();
  for (const GapEntry& g : rep.gap.loose) loose.push_back(json{{"scenario", g.scenario + 1}, {"line", g.line + 1}, {"gap", g.gap}});
  doc["relaxation"] = json{{"max_gap", rep.gap.max_gap},
                           {"min_gap", rep.gap.min_gap},
                           {"direction_ok", rep.gap.direction_ok},
                           {"tight", rep.gap.tight()},
                           {"loose", std::move(loose)}};
  json viol = json::array();
  for (const ViolationRow& r : rep.violations.rows) {
    viol.push_back(json{{"constraint", std::string(to_string(r.kind))},
                        {"index", r.index + 1},
                        {"fraction", r.fraction},
                        {"bound", r.bound},
                        {"within", r.within()}});
  }
  doc["violations"] = std::move(viol);
  json checks = json::array();
  for (const CvarCheck& c : rep.cvar.checks) {
    checks.push_back(json{{"constraint", std::string(to_string(c.kind))},
                          {"index", c.index + 1},
                          {"cvar", c.cvar},
                          {"limit", c.limit},
                          {"margin", c.margin()},
                          {"anchor_objective", c.anchor_objective}});
  }
  doc["cvar"] = json{{"checks", std::move(checks)},
                     {"within_limits", rep.cvar.within_limits()},
                     {"anchors_consistent", rep.cvar.anchors_consistent()}};
  doc["passed"] = rep.passed();
  return doc.dump(2);
}

}  // namespace hostcap
