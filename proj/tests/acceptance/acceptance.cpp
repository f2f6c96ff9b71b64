// Runs the acceptance checks and prints one PASS/FAIL line per criterion.
// Exit status is nonzero when any criterion fails.

#include "hostcap/accept.hpp"
#include "hostcap/cvar.hpp"
#include "hostcap/hca.hpp"
#include "hostcap/synth.hpp"
#include "hostcap/validate.hpp"
#include "support.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <sys/wait.h>

using namespace hostcap;
using hostcap::testing::TempDir;
using hostcap::testing::uniform;
using hostcap::testing::write_text;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

class Clock {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string num(double v) { return format_double(v); }

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// The shared 3-bus desk instance.
const RadialNetwork& desk() {
  static const RadialNetwork net = desk_network();
  return net;
}

const ScenarioSet& desk_k500() {
  static const ScenarioSet s = synth_scenarios(3, ScenarioSpec{.count = 500}, 42);
  return s;
}

const std::vector<double> kLevels{0.5, 0.6, 0.7, 0.8, 0.9};
const RiskParams kStreamRisk{0.8, 0.8};

// ---------------------------------------------------------------------------

double brute_force_cvar(const std::vector<double>& x, double delta) {
  // The variational objective is convex and piecewise linear in t with kinks
  // at the samples, so its minimum sits at one of them.
  double best = std::numeric_limits<double>::infinity();
  for (double t : x) {
    double tail = 0.0;
    for (double v : x) tail += std::max(v - t, 0.0);
    best = std::min(best, t + tail / (static_cast<double>(x.size()) * (1.0 - delta)));
  }
  return best;
}

Verdict cvar_oracle() {
  Clock clock;
  Rng rng(101);
  double worst = 0.0;
  int order_breaks = 0, bound_breaks = 0;
  for (int sample = 0; sample < 200; ++sample) {
    const int K = 1 + static_cast<int>(uniform_below(rng, 50));
    std::vector<double> x(static_cast<std::size_t>(K));
    const double scale = std::pow(10.0, uniform(rng, -2, 2));
    for (double& v : x) v = scale * uniform(rng, -1, 1);
    std::vector<double> deltas{0.0, 0.25, 0.5, 0.75, 0.9, 1.0 - 1.0 / K};
    std::sort(deltas.begin(), deltas.end());
    // Extended-precision sum so that the reference mean is correctly rounded.
    long double total = 0.0L;
    for (double v : x) total += v;
    const double mean = static_cast<double>(total / K);
    const double max = *std::max_element(x.begin(), x.end());
    double prev = -std::numeric_limits<double>::infinity();
    for (double d : deltas) {
      const double c = cvar(x, d);
      worst = std::max(worst, std::abs(c - brute_force_cvar(x, d)));
      if (c < prev) ++order_breaks;
      if (c < mean || c > max) ++bound_breaks;
      prev = c;
    }
  }
  const double secs = clock.seconds();
  std::ostringstream d;
  d << "max |closed - brute| " << num(worst) << ", order breaks " << order_breaks << ", bound breaks "
    << bound_breaks << ", " << num(secs) << " s";
  return {worst <= 1e-9 && order_breaks == 0 && bound_breaks == 0 && secs < 5.0, d.str()};
}

// ---------------------------------------------------------------------------

bool in_limits(const RadialNetwork& net, const FlowState& fs) {
  for (int i = 0; i < net.buses(); ++i) {
    if (fs.W[i] < net.w_min()[i] || fs.W[i] > net.w_max()[i]) return false;
  }
  for (int e = 0; e < net.lines(); ++e) {
    if (fs.P[e] * fs.P[e] + fs.Q[e] * fs.Q[e] > net.s_max()[e] * net.s_max()[e]) return false;
  }
  return true;
}

Verdict relaxation_exactness() {
  Clock clock;
  Rng rng(202);
  int in_lim = 0, infeasible = 0;
  double worst_gap = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(uniform_below(rng, 4));
    const RadialNetwork net = random_tree(n, rng);
    Matrix p(1, n - 1), q(1, n - 1);
    for (int j = 0; j < n - 1; ++j) {
      p(0, j) = uniform(rng, 0, 0.6);
      q(0, j) = uniform(rng, 0, 0.3);
    }
    const ScenarioSet scen(Matrix::Zero(1, n - 1), p, q);
    const Injections inj = injections(net, scen.alpha_row(0), scen.p_row(0), scen.q_row(0), Vector::Zero(n - 1));
    std::optional<FlowState> exact;
    try {
      exact = solve_power_flow_oracle(net, inj);
    } catch (const Error&) {
    }
    if (!exact || !in_limits(net, *exact)) continue;
    ++in_lim;
    const ConicProgram prog =
        build_acceptability(net, scen, RiskParams{}, Vector::Zero(n - 1), AssembleOptions{1.0});
    const SolveOutcome out = solve(prog);
    if (out.status != SolveStatus::Optimal) {
      ++infeasible;
      continue;
    }
    const GapReport g = relaxation_gap(net, std::vector<FlowState>{extract_flow(prog, out.x, 0)});
    worst_gap = std::max({worst_gap, g.max_gap, -g.min_gap});
  }
  const double secs = clock.seconds();
  std::ostringstream d;
  d << in_lim << " of 50 trees in limits, " << infeasible << " relaxations not solved, max gap " << num(worst_gap)
    << ", " << num(secs) << " s";
  return {in_lim > 0 && infeasible == 0 && worst_gap <= 1e-6 && secs < 120.0, d.str()};
}

// ---------------------------------------------------------------------------

Verdict problem_size() {
  const ScenarioSet one(Matrix::Constant(1, 2, 0.5), Matrix::Constant(1, 2, 0.4), Matrix::Constant(1, 2, 0.1));
  const ConicProgram p = build_hc_max(desk(), one, RiskParams{});
  const ScenarioSize s = scenario_size(p, 0);
  std::ostringstream d;
  d << s.constraints << " constraints, " << s.variables << " variables per scenario";
  return {s.constraints == 22 && s.variables == 17, d.str()};
}

// ---------------------------------------------------------------------------

struct Sweep {
  std::vector<HcResult> results;
  double seconds = 0.0;
};

const Sweep& risk_sweep() {
  static const Sweep sweep = [] {
    Clock clock;
    Sweep s;
    for (double level : kLevels) s.results.push_back(maximize_capacity(desk(), desk_k500(), RiskParams{level, level}));
    s.seconds = clock.seconds();
    return s;
  }();
  return sweep;
}

Verdict risk_monotone() {
  const Sweep& s = risk_sweep();
  std::ostringstream d;
  bool ok = true;
  for (std::size_t i = 0; i < s.results.size(); ++i) {
    d << (i ? ", " : "objectives ") << num(s.results[i].objective);
    if (i > 0 && s.results[i].objective > s.results[i - 1].objective + 1e-5) ok = false;
  }
  d << "; " << num(s.seconds) << " s";
  return {ok && s.seconds < 600.0, d.str()};
}

Verdict chance_bound() {
  const Sweep& s = risk_sweep();
  int rows = 0, bad = 0;
  std::ostringstream d;
  for (std::size_t i = 0; i < s.results.size(); ++i) {
    const ViolationTable t = violation_histogram(desk(), s.results[i].flow_states, s.results[i].risk);
    for (const ViolationRow& r : t.rows) {
      ++rows;
      if (!r.within()) {
        ++bad;
        d << to_string(r.kind) << ' ' << r.index + 1 << " at level " << kLevels[i] << ": " << r.violations << '/'
          << r.scenarios << "; ";
      }
    }
  }
  d << rows << " limit rows checked, " << bad << " above the bound";
  return {bad == 0, d.str()};
}

// ---------------------------------------------------------------------------

Verdict subsample_trend() {
  Clock clock;
  const ScenarioSet big = synth_scenarios(3, ScenarioSpec{.count = 2000}, 7);
  int good = 0;
  std::ostringstream d;
  for (std::uint64_t batch = 0; batch < 5; ++batch) {
    const auto rows = subsample_study(desk(), big, kStreamRisk, {100, 500, 2000}, 20, 1000 + batch);
    bool ok = true;
    for (const StudyRow& r : rows) ok = ok && r.failures == 0 && r.stddev_defined;
    for (std::size_t i = 1; i < rows.size(); ++i) ok = ok && rows[i].stddev <= rows[i - 1].stddev;
    good += ok;
    d << "batch " << batch << " [" << num(rows[0].stddev) << ' ' << num(rows[1].stddev) << ' '
      << num(rows[2].stddev) << "] ";
  }
  const double secs = clock.seconds();
  d << "; " << good << " of 5 non-increasing, " << num(secs) << " s";
  return {good >= 4 && secs < 1800.0, d.str()};
}

// ---------------------------------------------------------------------------

Verdict certificate_validity() {
  Rng rng(707);
  const AcceptOptions opts;
  std::vector<Vector> accepted;
  std::vector<Cut> cuts;
  int infeasible = 0, no_cert = 0, bad = 0;
  std::ostringstream diag;
  for (int i = 0; i < 100; ++i) {
    const Vector psi = (Vector(2) << uniform(rng, 0, 4), uniform(rng, 0, 4)).finished();
    const ConicProgram prog = build_acceptability(desk(), desk_k500(), kStreamRisk, psi, opts.assemble);
    const SolveOutcome out = solve(prog, opts.solver);
    if (out.status == SolveStatus::Optimal) {
      accepted.push_back(psi);
      continue;
    }
    if (out.status == SolveStatus::InfeasibleNoCertificate) {
      ++no_cert;
      continue;
    }
    if (out.status != SolveStatus::Infeasible) {
      ++bad;
      diag << "candidate " << i << " ended " << to_string(out.status) << "; ";
      continue;
    }
    ++infeasible;
    const double stat = stationarity_residual(out.certificate, prog);
    const double cone = dual_cone_violation(out.certificate, prog);
    const double value = dual_objective(out.certificate, prog, psi);
    if (stat > 1e-7 || cone > 1e-7 || value < opts.cut_margin) {
      ++bad;
      diag << "candidate " << i << ": stationarity " << num(stat) << " cone " << num(cone) << " margin " << num(value)
           << "; ";
      continue;
    }
    cuts.push_back(make_cut(out.certificate, prog, psi, opts.solver.feas_tol, opts.cut_margin));
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (const Cut& c : cuts) {
    for (const Vector& a : accepted) {
      const double v = c.value(a);
      worst = std::max(worst, v);
      if (v > 1e-8) {
        ++bad;
        diag << "accepted " << a.transpose() << " violates cut from " << c.source_psi.transpose() << " by " << num(v)
             << "; ";
      }
    }
  }
  std::ostringstream d;
  d << infeasible << " certified infeasible, " << no_cert << " without certificate, " << accepted.size()
    << " accepted, worst cut value at an accepted point " << num(cuts.empty() || accepted.empty() ? 0.0 : worst);
  if (bad) d << "; " << diag.str();
  return {bad == 0 && infeasible > 0, d.str()};
}

// ---------------------------------------------------------------------------

struct StreamRecord {
  Vector psi;
  TestOutcome outcome;
};

struct Stream {
  std::vector<StreamRecord> records;
  int audited = 0;
  int disagreements = 0;
  std::string disagreement_detail;
  std::string kb_json;
};

// 300 uniform candidates in the box against one knowledge base, with a 10%
// shadow audit of the shortcut decisions.
const Stream& candidate_stream() {
  static const Stream stream = [] {
    Stream s;
    const AcceptanceTester tester(desk(), desk_k500(), kStreamRisk);
    KnowledgeBase kb = tester.fresh_kb();
    Rng rng(808), audit_rng(909);
    for (int i = 0; i < 300; ++i) {
      const Vector psi = (Vector(2) << uniform(rng, 0, 4), uniform(rng, 0, 4)).finished();
      const TestOutcome out = tester.test(kb, psi);
      s.records.push_back({psi, out});
      if (out.method != Method::FullSolve && uniform_unit(audit_rng) < 0.1) {
        ++s.audited;
        if (tester.full_decision(psi) != out.decision) {
          ++s.disagreements;
          s.disagreement_detail += "candidate " + std::to_string(i) + " by " + std::string(to_string(out.method)) + "; ";
        }
      }
    }
    s.kb_json = kb_to_json(kb);
    return s;
  }();
  return stream;
}

Verdict shadow_audit() {
  const Stream& s = candidate_stream();
  std::ostringstream d;
  d << s.audited << " shortcut decisions audited, " << s.disagreements << " disagreements";
  if (s.disagreements) d << ": " << s.disagreement_detail;
  return {s.audited > 0 && s.disagreements == 0, d.str()};
}

Verdict absorption() {
  const Stream& s = candidate_stream();
  int first = 0, last = 0;
  std::map<Method, std::vector<double>> times;
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    const TestOutcome& o = s.records[i].outcome;
    times[o.method].push_back(o.seconds);
    if (o.method != Method::FullSolve) continue;
    if (i < 100) ++first;
    if (i >= 200) ++last;
  }
  const double outer = median(times[Method::OuterCut]);
  const double inner = median(times[Method::InnerHull]);
  const double full = median(times[Method::FullSolve]);
  std::ostringstream d;
  d << "FullSolve " << first << " in tests 1-100, " << last << " in tests 201-300; median seconds OuterCut "
    << num(outer) << " (" << times[Method::OuterCut].size() << "), InnerHull " << num(inner) << " ("
    << times[Method::InnerHull].size() << "), FullSolve " << num(full) << " (" << times[Method::FullSolve].size()
    << ")";
  return {2 * last <= first && outer < inner && inner < full, d.str()};
}

// ---------------------------------------------------------------------------

Verdict scaling_stability() {
  const Sweep& s = risk_sweep();
  HcOptions scaled;
  scaled.solver.objective_scale = 1e9;
  double worst = 0.0;
  for (std::size_t i = 0; i < kLevels.size(); ++i) {
    const HcResult r = maximize_capacity(desk(), desk_k500(), RiskParams{kLevels[i], kLevels[i]}, scaled);
    worst = std::max(worst, (r.psi_star - s.results[i].psi_star).lpNorm<Eigen::Infinity>());
  }
  return {worst <= 1e-4, "max componentwise change " + num(worst)};
}

// ---------------------------------------------------------------------------

struct Process {
  int code = -1;
  std::string out;
};

Process run_process(const std::string& cmd) {
  Process p;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return p;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) p.out.append(buf, got);
  const int status = ::pclose(pipe);
  p.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return p;
}

Verdict kb_persistence() {
  const Stream& s = candidate_stream();
  TempDir dir("acceptance");
  save_network(desk(), dir / "net.json");
  save_scenarios(desk_k500(), dir / "scen.csv", true);
  write_text(dir / "kb.json", s.kb_json);

  const KnowledgeBase loaded = load_kb(dir / "kb.json");
  if (kb_to_json(loaded) != s.kb_json) return {false, "knowledge base changed across save and load"};

  std::string cands;
  for (const StreamRecord& r : s.records) cands += format_double(r.psi[0]) + ", " + format_double(r.psi[1]) + '\n';
  write_text(dir / "cands.txt", cands);

  const std::string cmd = std::string(HOSTCAP_CLI_PATH) + " --json test --network " + (dir / "net.json").string() +
                          " --scenarios " + (dir / "scen.csv").string() + " --nu " + format_double(kStreamRisk.nu) +
                          " --gamma " + format_double(kStreamRisk.gamma) + " --psi " + (dir / "cands.txt").string() +
                          " --kb " + (dir / "kb.json").string() + " 2>" + (dir / "stderr.txt").string();
  const Process proc = run_process(cmd);
  if (proc.code != 0 && proc.code != 3) {
    return {false, "rerun exited " + std::to_string(proc.code) + ": " + hostcap::testing::read_text(dir / "stderr.txt")};
  }
  const nlohmann::json rerun = nlohmann::json::parse(proc.out);
  if (rerun.size() != s.records.size()) return {false, "rerun returned " + std::to_string(rerun.size()) + " decisions"};

  int changed = 0, full = 0, novel_full = 0;
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    const TestOutcome& before = s.records[i].outcome;
    if (rerun[i]["decision"].get<std::string>() != to_string(before.decision)) ++changed;
    if (rerun[i]["method"].get<std::string>() != "FullSolve") continue;
    ++full;
    // A repeat needs a solve only when the first pass left nothing behind:
    // an unacceptable candidate whose solve gave no usable cut.
    if (before.method == Method::FullSolve && before.decision == Decision::Unacceptable && !before.cut_added) {
      ++novel_full;
    }
  }
  const double resolved = 1.0 - static_cast<double>(full) / static_cast<double>(s.records.size());
  std::ostringstream d;
  d << "rerun in a fresh process: " << changed << " decisions changed, " << full << " FullSolve (" << novel_full
    << " without a stored cut), " << num(100.0 * resolved) << "% resolved without FullSolve";
  return {changed == 0 && full == novel_full && resolved >= 0.8, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"cvar closed form vs brute force", cvar_oracle},
      {"relaxation exact on load-only trees", relaxation_exactness},
      {"per-scenario problem size", problem_size},
      {"capacity non-increasing in risk level", risk_monotone},
      {"empirical violations within chance bounds", chance_bound},
      {"subsample spread shrinks with size", subsample_trend},
      {"infeasibility certificates and cuts", certificate_validity},
      {"shadow audit of shortcut decisions", shadow_audit},
      {"incremental absorption and timings", absorption},
      {"objective scaling leaves argmax", scaling_stability},
      {"knowledge base persistence", kb_persistence},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << " | "
              << v.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
