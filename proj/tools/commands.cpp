#include "commands.hpp"

#include "hostcap/accept.hpp"
#include "hostcap/cvar.hpp"
#include "hostcap/error.hpp"
#include "hostcap/hca.hpp"
#include "hostcap/util.hpp"
#include "hostcap/validate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#ifndef HOSTCAP_VERSION
#define HOSTCAP_VERSION "0.0.0"
#endif

namespace hostcap::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct Common {
  bool json_output = false;
  int threads = 1;
};

struct DataArgs {
  std::string network;
  std::string scenarios;
  double nu = 0.9;
  double gamma = 0.9;
};

struct SolverArgs {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iter = 200;
  double objective_scale = 1.0;
  double loss_weight = 0.0;

  [[nodiscard]] SolverOptions solver() const {
    SolverOptions o;
    o.feas_tol = feas_tol;
    o.gap_tol = gap_tol;
    o.max_iter = max_iter;
    o.objective_scale = objective_scale;
    return o;
  }
  [[nodiscard]] json to_json() const {
    return json{{"feas_tol", feas_tol},
                {"gap_tol", gap_tol},
                {"max_iter", max_iter},
                {"objective_scale", objective_scale},
                {"loss_weight", loss_weight}};
  }
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::BadDelta:
    case ErrorKind::BadCount: return kUsage;
    case ErrorKind::NoSolution:
    case ErrorKind::NonConvergence:
    case ErrorKind::NumericalFailure:
    case ErrorKind::InvalidCertificate:
    case ErrorKind::InvariantViolation: return kNumerical;
    default: return kData;
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

/// Accumulated wall time per named phase.
class Phases {
 public:
  template <class F>
  auto run(const std::string& name, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    struct Stop {
      Phases* self;
      std::string name;
      std::chrono::steady_clock::time_point start;
      ~Stop() {
        self->seconds_[name] += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }
    } stop{this, name, start};
    return f();
  }
  [[nodiscard]] json to_json() const { return json(seconds_); }

 private:
  std::map<std::string, double> seconds_;
};

struct Manifest {
  json doc = json::object();

  Manifest(const std::string& subcommand, const Common& common) {
    doc["tool"] = "hostcap";
    doc["version"] = HOSTCAP_VERSION;
    doc["subcommand"] = subcommand;
    doc["threads"] = common.threads;
    doc["inputs"] = json::object();
    doc["outputs"] = json::array();
  }
  void input(const std::string& role, const std::string& path, const std::string& semantic_digest = {}) {
    json entry{{"path", path}, {"sha256", sha256_hex(read_file(path))}};
    if (!semantic_digest.empty()) entry["digest"] = semantic_digest;
    doc["inputs"][role] = std::move(entry);
  }
  void output(const std::string& path) { doc["outputs"].push_back(path); }
  void write(const fs::path& beside, const Phases& phases) {
    doc["timings"] = phases.to_json();
    write_file(beside.string() + ".manifest.json", doc.dump(2) + "\n");
  }
};

RiskParams risk_from(const DataArgs& d) {
  RiskParams r{d.nu, d.gamma};
  r.validate();
  return r;
}

std::string vector_text(const Vector& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

/// Candidates from a file (JSON array of arrays, or one comma/space separated
/// row per line) or, when no such file exists, one inline comma list.
std::vector<Vector> read_candidates(const std::string& arg) {
  std::string text = fs::exists(arg) ? read_file(arg) : arg;
  std::vector<Vector> out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::ParseError, std::string("psi: ") + e.what());
    }
    if (!doc.empty() && doc[0].is_number()) doc = json::array({doc});
    for (const json& row : doc) {
      if (!row.is_array()) throw Error(ErrorKind::ParseError, "psi: expected an array of arrays");
      Vector v(static_cast<Eigen::Index>(row.size()));
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (!row[i].is_number()) throw Error(ErrorKind::ParseError, "psi: non-numeric entry");
        v[static_cast<Eigen::Index>(i)] = row[i].get<double>();
      }
      out.push_back(std::move(v));
    }
    return out;
  }
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line) {
      if (c == ',' || c == ';' || c == '\t' || c == '\r') c = ' ';
    }
    std::istringstream fields(line);
    std::vector<double> values;
    std::string tok;
    while (fields >> tok) {
      double v = 0.0;
      if (!parse_double(tok, v)) throw Error(ErrorKind::ParseError, "psi: cannot parse '" + tok + "'");
      values.push_back(v);
    }
    if (!values.empty()) out.push_back(Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
  }
  if (out.empty()) throw Error(ErrorKind::EmptyFile, "psi: no candidate given");
  return out;
}

std::vector<int> parse_sizes(const std::string& text) {
  std::vector<int> sizes;
  std::string tok;
  std::istringstream in(text);
  while (std::getline(in, tok, ',')) {
    int v = 0;
    try {
      std::size_t used = 0;
      v = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "bad subsample size '" + tok + "'");
    }
    sizes.push_back(v);
  }
  return sizes;
}

void add_data_options(CLI::App* app, DataArgs& d) {
  app->add_option("--network", d.network, "Network JSON")->required()->check(CLI::ExistingFile);
  app->add_option("--scenarios", d.scenarios, "Scenario CSV")->required()->check(CLI::ExistingFile);
  app->add_option("--nu", d.nu, "CVaR level of the voltage constraints, in [0, 1)")->capture_default_str();
  app->add_option("--gamma", d.gamma, "CVaR level of the flow constraints, in [0, 1)")->capture_default_str();
}

void add_solver_options(CLI::App* app, SolverArgs& s) {
  app->add_option("--feas-tol", s.feas_tol, "Primal/dual feasibility tolerance")->capture_default_str();
  app->add_option("--gap-tol", s.gap_tol, "Duality gap tolerance")->capture_default_str();
  app->add_option("--max-iter", s.max_iter, "Interior-point iteration limit")->capture_default_str();
  app->add_option("--objective-scale", s.objective_scale, "Multiplier on the objective vector")
      ->capture_default_str();
  app->add_option("--loss-weight", s.loss_weight, "Weight of the average resistive losses in the objective")
      ->capture_default_str();
}

// ---------------------------------------------------------------------------

struct MaximizeArgs {
  DataArgs data;
  SolverArgs solver;
  std::optional<int> subsample;
  std::uint64_t seed = 1;
  std::string study_sizes;
  int trials = 20;
  std::string out;
  std::string dump_program;
};

int cmd_maximize(const MaximizeArgs& a, const Common& common, std::ostream& out) {
  const RiskParams risk = risk_from(a.data);
  Manifest manifest("maximize", common);
  Phases phases;
  const RadialNetwork net = phases.run("load", [&] { return load_network(a.data.network); });
  ScenarioSet scen = phases.run("load", [&] { return load_scenarios(a.data.scenarios, net.buses()); });
  manifest.input("network", a.data.network, network_digest(net));
  manifest.input("scenarios", a.data.scenarios, scenario_digest(scen));
  manifest.doc["risk"] = json{{"nu", risk.nu}, {"gamma", risk.gamma}};
  manifest.doc["tolerances"] = a.solver.to_json();
  manifest.doc["seed"] = a.seed;

  HcOptions opts;
  opts.solver = a.solver.solver();
  opts.assemble.loss_weight = a.solver.loss_weight;

  if (!a.study_sizes.empty()) {
    const std::vector<int> sizes = parse_sizes(a.study_sizes);
    StudyOptions so{opts, common.threads};
    const auto rows = phases.run("solve", [&] { return subsample_study(net, scen, risk, sizes, a.trials, a.seed, so); });
    json doc = json::array();
    for (const StudyRow& r : rows) {
      json row{{"size", r.size}, {"trials", r.trials}, {"failures", r.failures}, {"mean", r.mean},
               {"objectives", r.objectives}};
      row["stddev"] = r.stddev_defined ? json(r.stddev) : json(nullptr);
      doc.push_back(std::move(row));
    }
    manifest.doc["study"] = json{{"sizes", sizes}, {"trials", a.trials}};
    if (common.json_output) {
      out << doc.dump(2) << '\n';
    } else {
      out << "size,trials,failures,mean,stddev\n";
      for (const StudyRow& r : rows) {
        out << r.size << ',' << r.trials << ',' << r.failures << ',' << format_double(r.mean) << ','
            << (r.stddev_defined ? format_double(r.stddev) : "nan") << '\n';
      }
    }
    if (!a.out.empty()) {
      phases.run("write", [&] { write_file(a.out, doc.dump(2) + "\n"); });
      manifest.output(a.out);
      manifest.write(a.out, phases);
    }
    return kOk;
  }

  if (a.subsample) {
    scen = subsample(scen, *a.subsample, a.seed);
    manifest.doc["subsample"] = json{{"size", *a.subsample}, {"digest", scenario_digest(scen)}};
  }
  if (!a.dump_program.empty()) {
    std::ofstream dump(a.dump_program);
    if (!dump) throw Error(ErrorKind::IoError, "cannot write " + a.dump_program);
    build_hc_max(net, scen, risk, opts.assemble).write_dump(dump);
    manifest.output(a.dump_program);
  }
  const HcResult result = phases.run("solve", [&] { return maximize_capacity(net, scen, risk, opts); });
  const std::string text = result_to_json(result);
  if (common.json_output) {
    out << text << '\n';
  } else {
    out << "psi_star " << vector_text(result.psi_star) << '\n'
        << "objective " << format_double(result.objective) << '\n'
        << "iterations " << result.solver.iterations << '\n';
  }
  if (!a.out.empty()) {
    phases.run("write", [&] { write_file(a.out, text + "\n"); });
    manifest.output(a.out);
    manifest.write(a.out, phases);
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct TestArgs {
  DataArgs data;
  SolverArgs solver;
  std::string psi;
  std::string kb;
  bool shadow_check = false;
  bool seed_corners = false;
  int max_generators = 0;
};

int cmd_test(const TestArgs& a, const Common& common, std::ostream& out, std::ostream& err) {
  const RiskParams risk = risk_from(a.data);
  const std::vector<Vector> candidates = read_candidates(a.psi);
  Manifest manifest("test", common);
  Phases phases;
  const RadialNetwork net = phases.run("load", [&] { return load_network(a.data.network); });
  const ScenarioSet scen = phases.run("load", [&] { return load_scenarios(a.data.scenarios, net.buses()); });
  manifest.input("network", a.data.network, network_digest(net));
  manifest.input("scenarios", a.data.scenarios, scenario_digest(scen));
  manifest.doc["risk"] = json{{"nu", risk.nu}, {"gamma", risk.gamma}};
  manifest.doc["tolerances"] = a.solver.to_json();

  AcceptOptions opts;
  opts.solver = a.solver.solver();
  opts.assemble.loss_weight = a.solver.loss_weight;
  opts.max_generators = a.max_generators;
  opts.audit_overlap = a.shadow_check;
  const AcceptanceTester tester(net, scen, risk, opts);
  KnowledgeBase kb = phases.run("load", [&] {
    return fs::exists(a.kb) ? load_kb(a.kb, tester.provenance(), opts.cut_eps) : tester.fresh_kb();
  });
  if (a.seed_corners && kb.accepted().empty() && kb.cuts().empty()) {
    phases.run("corners", [&] { return tester.seed_corners(kb); });
  }

  json results = json::array();
  bool all_acceptable = true;
  for (const Vector& psi : candidates) {
    const TestOutcome o = phases.run("test", [&] { return tester.test(kb, psi); });
    std::optional<Decision> shadow;
    if (a.shadow_check && o.method != Method::FullSolve) {
      shadow = phases.run("shadow", [&] { return tester.full_decision(psi); });
    }
    if (o.overlap) err << "psi " << vector_text(psi) << " is in the inner hull and beyond a cut; the cut wins\n";
    all_acceptable = all_acceptable && o.decision == Decision::Acceptable;
    json r{{"psi", std::vector<double>(psi.data(), psi.data() + psi.size())},
           {"decision", std::string(to_string(o.decision))},
           {"method", std::string(to_string(o.method))},
           {"seconds", o.seconds},
           {"cut_added", o.cut_added}};
    if (o.solve_status) r["solver_status"] = std::string(to_string(*o.solve_status));
    if (shadow) r["shadow_decision"] = std::string(to_string(*shadow));
    if (!common.json_output) {
      out << "psi " << vector_text(psi) << " decision " << to_string(o.decision) << " method " << to_string(o.method)
          << " seconds " << format_double(o.seconds) << '\n';
    }
    results.push_back(std::move(r));
    if (shadow && *shadow != o.decision) {
      // Save nothing: a disagreement means the knowledge base cannot be trusted.
      err << "shadow check disagrees at psi " << vector_text(psi) << ": " << to_string(o.method) << " said "
          << to_string(o.decision) << ", full solve says " << to_string(*shadow) << '\n';
      if (common.json_output) out << results.dump(2) << '\n';
      return kNumerical;
    }
  }
  if (common.json_output) out << (results.size() == 1 ? results[0] : results).dump(2) << '\n';
  phases.run("write", [&] { save_kb(kb, a.kb); });
  manifest.output(a.kb);
  manifest.doc["candidates"] = candidates.size();
  manifest.write(a.kb, phases);
  return all_acceptable ? kOk : kUnacceptable;
}

// ---------------------------------------------------------------------------

struct CvarArgs {
  std::string input;
  double delta = 0.0;
  int column = 1;
};

int cmd_cvar(const CvarArgs& a, const Common& common, std::ostream& out) {
  require(a.delta >= 0.0 && a.delta < 1.0, ErrorKind::BadDelta, "delta must lie in [0, 1)");
  require(a.column >= 1, ErrorKind::InvalidArgument, "column is 1-based");
  std::istringstream in(read_file(a.input));
  std::vector<double> values;
  std::string line;
  bool first = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row(line);
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) < a.column) {
      throw Error(ErrorKind::DimensionMismatch, "line " + std::to_string(lineno) + " has no column " +
                                                    std::to_string(a.column));
    }
    double v = 0.0;
    if (!parse_double(cells[static_cast<std::size_t>(a.column - 1)], v)) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": not a number");
    }
    if (!std::isfinite(v)) throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": not finite");
    first = false;
    values.push_back(v);
  }
  require(!values.empty(), ErrorKind::EmptyFile, "no values in " + a.input);
  const double value = cvar(values, a.delta);
  if (common.json_output) {
    out << json{{"cvar", value}, {"delta", a.delta}, {"count", values.size()}}.dump(2) << '\n';
  } else {
    out << format_double(value) << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct ValidateArgs {
  std::string result;
  std::string network;
  std::string scenarios;
  std::string out_csv;
  double exactness_tol = 1e-6;
  double feas_tol = 1e-8;
};

int cmd_validate(const ValidateArgs& a, const Common& common, std::ostream& out, std::ostream& err) {
  Manifest manifest("validate", common);
  Phases phases;
  const HcResult result = phases.run("load", [&] { return parse_result(read_file(a.result)); });
  const RadialNetwork net = phases.run("load", [&] { return load_network(a.network); });
  const ScenarioSet scen = phases.run("load", [&] { return load_scenarios(a.scenarios, net.buses()); });
  manifest.input("result", a.result);
  manifest.input("network", a.network, network_digest(net));
  manifest.input("scenarios", a.scenarios, scenario_digest(scen));
  const ValidationReport rep =
      phases.run("validate", [&] { return validate_result(net, scen, result, a.exactness_tol, a.feas_tol); });
  if (common.json_output) {
    out << report_to_json(rep) << '\n';
  } else {
    out << "max_gap " << format_double(rep.gap.max_gap) << '\n'
        << "min_gap " << format_double(rep.gap.min_gap) << '\n'
        << "loose_entries " << rep.gap.loose.size() << '\n'
        << "chance_bound " << (rep.violations.all_within() ? "ok" : "VIOLATED") << '\n'
        << "cvar_limits " << (rep.cvar.within_limits() ? "ok" : "VIOLATED") << '\n';
  }
  if (!rep.gap.direction_ok) err << "relaxation gap below -feas_tol: " << format_double(rep.gap.min_gap) << '\n';
  for (const ViolationRow& r : rep.violations.rows) {
    if (!r.within()) {
      err << to_string(r.kind) << ' ' << r.index + 1 << ": violated in " << r.violations << " of " << r.scenarios
          << " scenarios, bound " << format_double(r.bound) << '\n';
    }
  }
  if (!a.out_csv.empty()) {
    std::ostringstream csv;
    write_violation_csv(rep.violations, csv);
    phases.run("write", [&] { write_file(a.out_csv, csv.str()); });
    manifest.output(a.out_csv);
    manifest.write(a.out_csv, phases);
  }
  return rep.passed() ? kOk : kUnacceptable;
}

// ---------------------------------------------------------------------------

struct InspectArgs {
  std::string kb;
};

int cmd_kb_inspect(const InspectArgs& a, const Common& common, std::ostream& out) {
  const KnowledgeBase kb = load_kb(a.kb);
  if (common.json_output) {
    out << kb_to_json(kb) << '\n';
    return kOk;
  }
  out << "network_digest " << kb.provenance().network_digest << '\n'
      << "scenario_digest " << kb.provenance().scenario_digest << '\n'
      << "nu " << format_double(kb.provenance().nu) << " gamma " << format_double(kb.provenance().gamma) << '\n'
      << "psi_max " << vector_text(kb.psi_max()) << '\n'
      << "accepted " << kb.accepted().size() << '\n'
      << "rejected " << kb.rejected().size() << '\n'
      << "cuts " << kb.cuts().size() << '\n';
  for (Method m : {Method::OuterCut, Method::InnerHull, Method::FullSolve}) {
    const MethodStats& s = kb.stats(m);
    out << to_string(m) << " acceptable " << s.acceptable << " unacceptable " << s.unacceptable << " mean_seconds "
        << format_double(s.count() ? s.total_seconds / s.count() : 0.0) << " max_seconds "
        << format_double(s.max_seconds) << '\n';
  }
  return kOk;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Risk-sensitive solar hosting capacity for radial feeders", "hostcap"};
  app.require_subcommand(1);
  app.set_version_flag("--version", HOSTCAP_VERSION);
  app.set_config("--config", "", "Key/value file; [subcommand] sections; flags override it");

  Common common;
  app.add_flag("--json", common.json_output, "Machine-readable JSON on stdout and stderr");
  app.add_option("--threads", common.threads, "Worker threads for subsample studies")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  MaximizeArgs max_args;
  CLI::App* maximize = app.add_subcommand("maximize", "Maximize total installed capacity");
  add_data_options(maximize, max_args.data);
  add_solver_options(maximize, max_args.solver);
  maximize->add_option("--subsample", max_args.subsample, "Solve on M scenarios drawn without replacement");
  maximize->add_option("--seed", max_args.seed, "Seed for subsampling")->capture_default_str();
  maximize->add_option("--study", max_args.study_sizes, "Comma-separated subsample sizes for a variance study");
  maximize->add_option("--trials", max_args.trials, "Trials per study size")->capture_default_str();
  maximize->add_option("--out", max_args.out, "Result JSON (a manifest is written next to it)");
  maximize->add_option("--dump-program", max_args.dump_program, "Write the assembled cone program as text");

  TestArgs test_args;
  CLI::App* test = app.add_subcommand("test", "Decide acceptability of capacity configurations");
  add_data_options(test, test_args.data);
  add_solver_options(test, test_args.solver);
  test->add_option("--psi", test_args.psi, "Candidate file (one row per candidate, or JSON) or an inline list")
      ->required();
  test->add_option("--kb", test_args.kb, "Knowledge base JSON, created when missing")->required();
  test->add_flag("--shadow-check", test_args.shadow_check, "Confirm cheap decisions with a full solve");
  test->add_flag("--seed-corners", test_args.seed_corners, "Test the box corners first on an empty knowledge base");
  test->add_option("--max-generators", test_args.max_generators, "Cap on hull generators (0 = none)")
      ->capture_default_str();

  CvarArgs cvar_args;
  CLI::App* cvar_cmd = app.add_subcommand("cvar", "Empirical CVaR of one CSV column");
  cvar_cmd->add_option("--input", cvar_args.input, "CSV file")->required()->check(CLI::ExistingFile);
  cvar_cmd->add_option("--delta", cvar_args.delta, "Level in [0, 1)")->capture_default_str();
  cvar_cmd->add_option("--column", cvar_args.column, "1-based column")->capture_default_str();

  ValidateArgs val_args;
  CLI::App* validate = app.add_subcommand("validate", "Check a result: relaxation gap, chance bound, CVaR");
  validate->add_option("--result", val_args.result, "Result JSON from maximize")->required()->check(CLI::ExistingFile);
  validate->add_option("--network", val_args.network, "Network JSON")->required()->check(CLI::ExistingFile);
  validate->add_option("--scenarios", val_args.scenarios, "Scenario CSV")->required()->check(CLI::ExistingFile);
  validate->add_option("--out-csv", val_args.out_csv, "Violation fractions for plotting");
  validate->add_option("--exactness-tol", val_args.exactness_tol, "Gap above which the relaxation is loose")
      ->capture_default_str();
  validate->add_option("--feas-tol", val_args.feas_tol, "Allowed negative gap")->capture_default_str();

  InspectArgs inspect_args;
  CLI::App* inspect = app.add_subcommand("kb-inspect", "Summarize a knowledge base");
  inspect->add_option("--kb", inspect_args.kb, "Knowledge base JSON")->required()->check(CLI::ExistingFile);

  auto report = [&](const std::string& kind, const std::string& message) {
    if (common.json_output) {
      err << json{{"error", kind}, {"message", message}}.dump() << '\n';
    } else {
      err << "hostcap: " << message << '\n';
    }
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    // --help (per subcommand) and --version.
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report("UsageError", e.what());
    return kUsage;
  }

  try {
    if (*maximize) return cmd_maximize(max_args, common, out);
    if (*test) return cmd_test(test_args, common, out, err);
    if (*cvar_cmd) return cmd_cvar(cvar_args, common, out);
    if (*validate) return cmd_validate(val_args, common, out, err);
    if (*inspect) return cmd_kb_inspect(inspect_args, common, out);
  } catch (const Error& e) {
    report(std::string(to_string(e.kind())), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    report("InternalError", e.what());
    return kNumerical;
  }
  return kUsage;
}

}  // namespace hostcap::cli
