#include "hostcap/hca.hpp"

#include "hostcap/error.hpp"
#include "hostcap/util.hpp"
#include "json_util.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <optional>
#include <thread>

namespace hostcap {

using detail::json;

std::string network_digest(const RadialNetwork& net) { return sha256_hex(network_to_json(net)); }

ViolationFractions violation_fractions(const RadialNetwork& net, const std::vector<FlowState>& flow_states) {
  const int n = net.buses();
  const int m = net.lines();
  ViolationFractions v{Vector::Zero(n), Vector::Zero(n), Vector::Zero(m)};
  if (flow_states.empty()) return v;
  const double K = static_cast<double>(flow_states.size());
  for (const FlowState& fs : flow_states) {
    for (int j = 0; j < n; ++j) {
      if (fs.W[j] > net.w_max()[j]) v.upper_voltage[j] += 1.0;
      if (net.w_min()[j] > fs.W[j]) v.lower_voltage[j] += 1.0;
    }
    for (int e = 0; e < m; ++e) {
      if (fs.P[e] * fs.P[e] + fs.Q[e] * fs.Q[e] > net.s_max()[e] * net.s_max()[e]) v.flow[e] += 1.0;
    }
  }
  v.upper_voltage /= K;
  v.lower_voltage /= K;
  v.flow /= K;
  return v;
}

HcResult maximize_capacity(const RadialNetwork& net, const ScenarioSet& scen, const RiskParams& risk,
                           const HcOptions& opts) {
  risk.validate();
  const int m = net.lines();
  require(scen.width() == m, ErrorKind::DimensionMismatch, "scenario width does not match network");

  if (opts.check_base) {
    const ConicProgram base = build_acceptability(net, scen, risk, Vector::Zero(m), opts.assemble);
    SolverOptions base_opts = opts.solver;
    base_opts.objective_scale = 1.0;
    const SolveOutcome out = solve(base, base_opts);
    if (out.status == SolveStatus::Infeasible || out.status == SolveStatus::InfeasibleNoCertificate) {
      throw Error(ErrorKind::BaseInfeasible, "the network violates the risk constraints without any solar");
    }
    if (out.status != SolveStatus::Optimal) {
      throw Error(ErrorKind::NumericalFailure, "zero-capacity check ended with " + std::string(to_string(out.status)));
    }
  }

  const ConicProgram program = build_hc_max(net, scen, risk, opts.assemble);
  const SolveOutcome out = solve(program, opts.solver);
  if (out.status != SolveStatus::Optimal) {
    throw Error(ErrorKind::NumericalFailure, "capacity maximization ended with " + std::string(to_string(out.status)) +
                                                 " after " + std::to_string(out.iterations) + " iterations");
  }

  HcResult result;
  const VariableBlock& psi = program.block(block::psi, -1);
  result.psi_star = out.x.segment(psi.offset, psi.size);
  result.objective = result.psi_star.sum();
  result.flow_states.reserve(static_cast<std::size_t>(scen.count()));
  for (int k = 0; k < scen.count(); ++k) result.flow_states.push_back(extract_flow(program, out.x, k));
  result.anchors = extract_anchors(program, out.x);
  result.solver = SolverStats{std::string(to_string(out.status)), out.iterations, out.primal_residual,
                              out.dual_residual, out.gap};
  result.risk = risk;
  result.scenarios = scen.count();
  result.scenario_digest = scenario_digest(scen);
  result.network_digest = network_digest(net);
  result.violations = violation_fractions(net, result.flow_states);
  return result;
}

std::vector<StudyRow> subsample_study(const RadialNetwork& net, const ScenarioSet& scen, const RiskParams& risk,
                                      const std::vector<int>& sizes, int trials, std::uint64_t seed,
                                      const StudyOptions& opts) {
  require(trials >= 1, ErrorKind::BadCount, "at least one trial is needed");
  for (int size : sizes) {
    require(size >= 1 && size <= scen.count(), ErrorKind::BadCount, "subsample size outside [1, K]");
  }
  struct Job {
    std::size_t row;
    int size;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  Rng rng(seed);
  for (std::size_t r = 0; r < sizes.size(); ++r) {
    for (int t = 0; t < trials; ++t) jobs.push_back(Job{r, sizes[r], rng()});
  }

  // A full-size subsample is the whole set whatever the seed; solve it once.
  std::vector<double> objective(jobs.size(), std::nan(""));
  std::mutex full_mutex;
  std::optional<double> full_objective;
  bool full_failed = false;

  auto run = [&](std::size_t i) {
    const Job& job = jobs[i];
    try {
      if (job.size == scen.count()) {
        std::lock_guard lock(full_mutex);
        if (!full_objective && !full_failed) {
          try {
            full_objective = maximize_capacity(net, scen, risk, opts.hc).objective;
          } catch (const Error&) {
            full_failed = true;
          }
        }
        if (full_objective) objective[i] = *full_objective;
        return;
      }
      objective[i] = maximize_capacity(net, subsample(scen, job.size, job.seed), risk, opts.hc).objective;
    } catch (const Error&) {
      // Recorded as a failed trial below.
    }
  };

  const int workers = std::max(1, std::min<int>(opts.threads, static_cast<int>(jobs.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) run(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<StudyRow> rows(sizes.size());
  for (std::size_t r = 0; r < sizes.size(); ++r) rows[r].size = sizes[r];
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    StudyRow& row = rows[jobs[i].row];
    if (std::isnan(objective[i])) {
      ++row.failures;
    } else {
      ++row.trials;
      row.objectives.push_back(objective[i]);
    }
  }
  for (StudyRow& row : rows) {
    if (row.trials == 0) continue;
    double sum = 0.0;
    for (double v : row.objectives) sum += v;
    row.mean = sum / row.trials;
    if (row.trials >= 2) {
      double ss = 0.0;
      for (double v : row.objectives) ss += (v - row.mean) * (v - row.mean);
      row.stddev = std::sqrt(ss / (row.trials - 1));
      row.stddev_defined = true;
    }
  }
  return rows;
}

namespace {

json flow_json(const FlowState& fs) {
  return json{{"P", detail::to_json(fs.P)}, {"Q", detail::to_json(fs.Q)}, {"L", detail::to_json(fs.L)},
              {"W", detail::to_json(fs.W)}};
}

}  // namespace

std::string result_to_json(const HcResult& r) {
  json doc;
  doc["psi_star"] = detail::to_json(r.psi_star);
  doc["objective"] = r.objective;
  doc["nu"] = r.risk.nu;
  doc["gamma"] = r.risk.gamma;
  doc["K"] = r.scenarios;
  doc["scenario_digest"] = r.scenario_digest;
  doc["network_digest"] = r.network_digest;
  doc["solver"] = json{{"status", r.solver.status},
                       {"iters", r.solver.iterations},
                       {"residuals", json{{"primal", r.solver.primal_residual},
                                          {"dual", r.solver.dual_residual},
                                          {"gap", r.solver.gap}}}};
  doc["violations"] = json{{"upper_voltage", detail::to_json(r.violations.upper_voltage)},
                           {"lower_voltage", detail::to_json(r.violations.lower_voltage)},
                           {"flow", detail::to_json(r.violations.flow)}};
  doc["anchors"] = json{{"w_upper", detail::to_json(r.anchors.w_upper)},
                        {"w_lower", detail::to_json(r.anchors.w_lower)},
                        {"s_flow", detail::to_json(r.anchors.s_flow)}};
  json states = json::array();
  for (const FlowState& fs : r.flow_states) states.push_back(flow_json(fs));
  doc["flow_states"] = std::move(states);
  return doc.dump(2);
}

HcResult parse_result(const std::string& text) {
  const json doc = detail::parse_json(text, "result JSON");
  HcResult r;
  try {
    r.psi_star = detail::vector_from_json(detail::field(doc, "psi_star"), "psi_star");
    r.objective = detail::field(doc, "objective").get<double>();
    r.risk.nu = detail::field(doc, "nu").get<double>();
    r.risk.gamma = detail::field(doc, "gamma").get<double>();
    r.scenarios = detail::field(doc, "K").get<int>();
    r.scenario_digest = detail::field(doc, "scenario_digest").get<std::string>();
    r.network_digest = detail::field(doc, "network_digest").get<std::string>();
    const json& solver = detail::field(doc, "solver");
    r.solver.status = detail::field(solver, "status").get<std::string>();
    r.solver.iterations = detail::field(solver, "iters").get<int>();
    const json& res = detail::field(solver, "residuals");
    r.solver.primal_residual = detail::field(res, "primal").get<double>();
    r.solver.dual_residual = detail::field(res, "dual").get<double>();
    r.solver.gap = detail::field(res, "gap").get<double>();
    const json& viol = detail::field(doc, "violations");
    r.violations.upper_voltage = detail::vector_from_json(detail::field(viol, "upper_voltage"), "upper_voltage");
    r.violations.lower_voltage = detail::vector_from_json(detail::field(viol, "lower_voltage"), "lower_voltage");
    r.violations.flow = detail::vector_from_json(detail::field(viol, "flow"), "flow");
    const json& anchors = detail::field(doc, "anchors");
    r.anchors.w_upper = detail::vector_from_json(detail::field(anchors, "w_upper"), "w_upper");
    r.anchors.w_lower = detail::vector_from_json(detail::field(anchors, "w_lower"), "w_lower");
    r.anchors.s_flow = detail::vector_from_json(detail::field(anchors, "s_flow"), "s_flow");
    for (const json& fs : detail::field(doc, "flow_states")) {
      r.flow_states.push_back(FlowState{detail::vector_from_json(detail::field(fs, "P"), "P"),
                                        detail::vector_from_json(detail::field(fs, "Q"), "Q"),
                                        detail::vector_from_json(detail::field(fs, "L"), "L"),
                                        detail::vector_from_json(detail::field(fs, "W"), "W")});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("result JSON: ") + e.what());
  }
  require(static_cast<int>(r.flow_states.size()) == r.scenarios, ErrorKind::ParseError,
          "result has " + std::to_string(r.flow_states.size()) + " flow states for K=" + std::to_string(r.scenarios));
  return r;
}

}  // namespace hostcap
