#include "hostcap/accept.hpp"

#include "hostcap/conic/lp.hpp"
#include "hostcap/error.hpp"
#include "hostcap/hca.hpp"
#include "hostcap/util.hpp"
#include "json_util.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace hostcap {

using detail::json;

std::string_view to_string(Decision d) noexcept {
  return d == Decision::Acceptable ? "Acceptable" : "Unacceptable";
}

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::OuterCut: return "OuterCut";
    case Method::InnerHull: return "InnerHull";
    case Method::FullSolve: return "FullSolve";
  }
  return "Unknown";
}

KnowledgeBase::KnowledgeBase(Provenance provenance, Vector psi_max)
    : provenance_(std::move(provenance)), psi_max_(std::move(psi_max)) {}

void KnowledgeBase::add_accepted(const Vector& psi, double tol, int max_generators) {
  require(psi.size() == psi_max_.size(), ErrorKind::DimensionMismatch, "psi length does not match knowledge base");
  for (std::size_t i = 0; i < cuts_.size(); ++i) {
    const double v = cuts_[i].value(psi);
    if (v > tol) {
      std::ostringstream msg;
      msg << "accepted configuration violates cut " << i << " by " << v
          << "; a certificate or the convexity of the acceptable set is broken";
      throw Error(ErrorKind::InvariantViolation, msg.str());
    }
  }
  accepted_.push_back(psi);
  if (max_generators > 0 && static_cast<int>(accepted_.size()) > max_generators) {
    // Keep the spread of the hull: drop the generator nearest the centroid.
    Vector centroid = Vector::Zero(psi.size());
    for (const Vector& p : accepted_) centroid += p;
    centroid /= static_cast<double>(accepted_.size());
    std::size_t drop = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < accepted_.size(); ++i) {
      const double d = (accepted_[i] - centroid).norm();
      if (d < best) {
        best = d;
        drop = i;
      }
    }
    accepted_.erase(accepted_.begin() + static_cast<std::ptrdiff_t>(drop));
  }
}

void KnowledgeBase::add_rejected(const Vector& psi) { rejected_.push_back(psi); }

void KnowledgeBase::add_cut(Cut cut, double tol) {
  require(cut.a.size() == psi_max_.size(), ErrorKind::DimensionMismatch, "cut dimension does not match knowledge base");
  for (std::size_t i = 0; i < accepted_.size(); ++i) {
    const double v = cut.value(accepted_[i]);
    if (v > tol) {
      std::ostringstream msg;
      msg << "new cut is violated by accepted configuration " << i << " (value " << v
          << "); the certificate is not a valid separator";
      throw Error(ErrorKind::InvariantViolation, msg.str());
    }
  }
  cuts_.push_back(std::move(cut));
}

void KnowledgeBase::record(Method m, Decision d, double seconds) {
  MethodStats& s = stats_[static_cast<std::size_t>(m)];
  (d == Decision::Acceptable ? s.acceptable : s.unacceptable) += 1;
  s.total_seconds += seconds;
  s.max_seconds = std::max(s.max_seconds, seconds);
}

void KnowledgeBase::check_invariants(double tol) const {
  for (std::size_t c = 0; c < cuts_.size(); ++c) {
    require(cuts_[c].a.size() == psi_max_.size(), ErrorKind::InvariantViolation, "cut has the wrong dimension");
    for (std::size_t i = 0; i < accepted_.size(); ++i) {
      const double v = cuts_[c].value(accepted_[i]);
      if (v > tol) {
        std::ostringstream msg;
        msg << "accepted configuration " << i << " violates cut " << c << " by " << v;
        throw Error(ErrorKind::InvariantViolation, msg.str());
      }
    }
  }
  for (const Vector& p : accepted_) {
    require(p.size() == psi_max_.size(), ErrorKind::InvariantViolation, "accepted point has the wrong dimension");
  }
}

Provenance make_provenance(const RadialNetwork& net, const ScenarioSet& scen, const RiskParams& risk) {
  return Provenance{network_digest(net), scenario_digest(scen), risk.nu, risk.gamma};
}

bool in_inner(const KnowledgeBase& kb, const Vector& psi) {
  const auto& pts = kb.accepted();
  if (pts.empty()) return false;
  const Eigen::Index d = psi.size();
  require(d == kb.psi_max().size(), ErrorKind::DimensionMismatch, "psi length does not match knowledge base");
  // Cheap exits: outside the bounding box of the generators, or a generator itself.
  Vector lo = pts.front(), hi = pts.front();
  for (const Vector& p : pts) {
    if (p == psi) return true;
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  if ((psi.array() < lo.array()).any() || (psi.array() > hi.array()).any()) return false;

  const auto N = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd A(d + 1, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    A.col(i).head(d) = pts[static_cast<std::size_t>(i)];
    A(d, i) = 1.0;
  }
  Vector b(d + 1);
  b << psi, 1.0;
  return solve_lp_feasibility(A, b, Vector::Zero(N)).feasible;
}

bool outside_outer(const KnowledgeBase& kb, const Vector& psi, double cut_eps) {
  require(psi.size() == kb.psi_max().size(), ErrorKind::DimensionMismatch, "psi length does not match knowledge base");
  if ((psi.array() < 0.0).any() || (psi.array() > kb.psi_max().array()).any()) return true;
  for (const Cut& c : kb.cuts()) {
    if (c.value(psi) > cut_eps) return true;
  }
  return false;
}

Cut make_cut(const Certificate& cert, const ConicProgram& program, const Vector& source_psi, double feas_tol,
             double cut_margin) {
  require(program.psi_dimension() > 0, ErrorKind::InvalidCertificate, "program has no psi-dependent rows");
  require(source_psi.size() == program.psi_dimension(), ErrorKind::DimensionMismatch,
          "source psi does not match program");
  require(cert.lambda.size() == program.equalities() && cert.mu.size() == program.inequalities() &&
              cert.cone.size() == program.cone_rows(),
          ErrorKind::DimensionMismatch, "certificate does not match program");
  const double resid = stationarity_residual(cert, program);
  const double cone = dual_cone_violation(cert, program);
  const double scale = std::max(cert.inf_norm(), 1e-300);
  if (resid > 10.0 * feas_tol * scale || cone > 10.0 * feas_tol * scale) {
    std::ostringstream msg;
    msg << "dual residuals too large (stationarity " << resid << ", cone " << cone << ")";
    throw Error(ErrorKind::InvalidCertificate, msg.str());
  }
  Cut cut;
  cut.a = program.C_psi().transpose() * cert.lambda;
  cut.b = program.E_psi().dot(cert.lambda) + program.b_in().dot(cert.mu) + program.h().dot(cert.cone);
  cut.source_psi = source_psi;
  const double margin = cut.value(source_psi);
  if (!(margin >= cut_margin)) {
    std::ostringstream msg;
    msg << "certificate margin " << margin << " below " << cut_margin;
    throw Error(ErrorKind::InvalidCertificate, msg.str());
  }
  std::string bytes;
  for (const Vector* v : {&cert.lambda, &cert.mu, &cert.cone}) {
    for (Eigen::Index i = 0; i < v->size(); ++i) bytes += format_double((*v)[i]) + ',';
    bytes += ';';
  }
  cut.certificate_digest = sha256_hex(bytes);
  return cut;
}

AcceptanceTester::AcceptanceTester(const RadialNetwork& net, const ScenarioSet& scen, const RiskParams& risk,
                                   AcceptOptions opts)
    : net_(net), scen_(scen), risk_(risk), opts_(std::move(opts)) {
  risk_.validate();
  require(scen.width() == net.lines(), ErrorKind::DimensionMismatch, "scenario width does not match network");
  provenance_ = make_provenance(net, scen, risk);
}

KnowledgeBase AcceptanceTester::fresh_kb() const { return KnowledgeBase(provenance_, net_.psi_max()); }

Decision AcceptanceTester::full_decision(const Vector& psi) const {
  // The acceptable set lives inside the capacity box, as the outer set does.
  if (!psi_in_box(net_, psi, opts_.cut_eps)) return Decision::Unacceptable;
  const ConicProgram program = build_acceptability(net_, scen_, risk_, psi, opts_.assemble);
  const SolveOutcome out = solve(program, opts_.solver);
  switch (out.status) {
    case SolveStatus::Optimal: return Decision::Acceptable;
    case SolveStatus::Infeasible:
    case SolveStatus::InfeasibleNoCertificate: return Decision::Unacceptable;
    default:
      throw Error(ErrorKind::NumericalFailure, "acceptability solve ended with " + std::string(to_string(out.status)));
  }
}

TestOutcome AcceptanceTester::test(KnowledgeBase& kb, const Vector& psi) const {
  if (!(kb.provenance() == provenance_)) {
    throw Error(ErrorKind::ProvenanceMismatch, "knowledge base was built for other data or risk levels");
  }
  require(psi.size() == net_.lines(), ErrorKind::DimensionMismatch, "psi must have one entry per non-substation bus");
  require(psi.allFinite(), ErrorKind::InvalidArgument, "psi must be finite");
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  TestOutcome out;
  if (outside_outer(kb, psi, opts_.cut_eps)) {
    out.decision = Decision::Unacceptable;
    out.method = Method::OuterCut;
    if (opts_.audit_overlap) out.overlap = in_inner(kb, psi);
    out.seconds = elapsed();
    kb.record(out.method, out.decision, out.seconds);
    return out;
  }
  if (in_inner(kb, psi)) {
    out.decision = Decision::Acceptable;
    out.method = Method::InnerHull;
    out.seconds = elapsed();
    kb.record(out.method, out.decision, out.seconds);
    return out;
  }

  out.method = Method::FullSolve;
  const ConicProgram program = build_acceptability(net_, scen_, risk_, psi, opts_.assemble);
  const SolveOutcome solved = solve(program, opts_.solver);
  out.solve_status = solved.status;
  switch (solved.status) {
    case SolveStatus::Optimal:
      out.decision = Decision::Acceptable;
      kb.add_accepted(psi, opts_.cut_eps, opts_.max_generators);
      break;
    case SolveStatus::Infeasible: {
      out.decision = Decision::Unacceptable;
      std::optional<Cut> cut;
      try {
        cut = make_cut(solved.certificate, program, psi, opts_.solver.feas_tol, opts_.cut_margin);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::InvalidCertificate) throw;
      }
      kb.add_rejected(psi);
      if (cut) {
        kb.add_cut(std::move(*cut), opts_.cut_eps);
        out.cut_added = true;
      }
      break;
    }
    case SolveStatus::InfeasibleNoCertificate:
      out.decision = Decision::Unacceptable;
      kb.add_rejected(psi);
      break;
    default:
      throw Error(ErrorKind::NumericalFailure,
                  "acceptability solve ended with " + std::string(to_string(solved.status)) + " after " +
                      std::to_string(solved.iterations) + " iterations");
  }
  out.seconds = elapsed();
  kb.record(out.method, out.decision, out.seconds);
  return out;
}

std::vector<TestOutcome> AcceptanceTester::seed_corners(KnowledgeBase& kb) const {
  const int d = net_.lines();
  require(d <= 12, ErrorKind::InvalidArgument, "corner seeding is limited to 12 capacity dimensions");
  std::vector<TestOutcome> outcomes;
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    Vector psi(d);
    for (int j = 0; j < d; ++j) psi[j] = (mask >> j) & 1u ? net_.psi_max()[j] : 0.0;
    outcomes.push_back(test(kb, psi));
  }
  return outcomes;
}

TestOutcome test(KnowledgeBase& kb, const RadialNetwork& net, const ScenarioSet& scen, const RiskParams& risk,
                 const Vector& psi, const AcceptOptions& opts) {
  return AcceptanceTester(net, scen, risk, opts).test(kb, psi);
}

// ---------------------------------------------------------------------------

std::string kb_to_json(const KnowledgeBase& kb) {
  json doc;
  doc["provenance"] = json{{"network_digest", kb.provenance().network_digest},
                           {"scenario_digest", kb.provenance().scenario_digest},
                           {"nu", kb.provenance().nu},
                           {"gamma", kb.provenance().gamma}};
  doc["psi_max"] = detail::to_json(kb.psi_max());
  json accepted = json::array();
  for (const Vector& p : kb.accepted()) accepted.push_back(detail::to_json(p));
  doc["accepted"] = std::move(accepted);
  json rejected = json::array();
  for (const Vector& p : kb.rejected()) rejected.push_back(detail::to_json(p));
  doc["rejected"] = std::move(rejected);
  json cuts = json::array();
  for (const Cut& c : kb.cuts()) {
    cuts.push_back(json{{"a", detail::to_json(c.a)},
                        {"b", c.b},
                        {"source_psi", detail::to_json(c.source_psi)},
                        {"certificate_digest", c.certificate_digest}});
  }
  doc["cuts"] = std::move(cuts);
  json stats = json::object();
  for (Method m : {Method::OuterCut, Method::InnerHull, Method::FullSolve}) {
    const MethodStats& s = kb.stats(m);
    stats[std::string(to_string(m))] = json{{"acceptable", s.acceptable},
                                            {"unacceptable", s.unacceptable},
                                            {"total_seconds", s.total_seconds},
                                            {"max_seconds", s.max_seconds}};
  }
  doc["stats"] = std::move(stats);
  return doc.dump(2);
}

KnowledgeBase parse_kb(const std::string& text, const std::optional<Provenance>& expected, double tol) {
  const json doc = detail::parse_json(text, "knowledge base");
  try {
    const json& prov = detail::field(doc, "provenance");
    Provenance p{detail::field(prov, "network_digest").get<std::string>(),
                 detail::field(prov, "scenario_digest").get<std::string>(), detail::field(prov, "nu").get<double>(),
                 detail::field(prov, "gamma").get<double>()};
    if (expected && !(p == *expected)) {
      throw Error(ErrorKind::ProvenanceMismatch, "knowledge base provenance does not match the given inputs");
    }
    KnowledgeBase kb(p, detail::vector_from_json(detail::field(doc, "psi_max"), "psi_max"));
    const auto dim = kb.psi_max().size();
    auto point = [&](const json& j, const char* what) {
      Vector v = detail::vector_from_json(j, what);
      require(v.size() == dim, ErrorKind::ParseError, std::string(what) + " entry has the wrong dimension");
      return v;
    };
    std::vector<Cut> cuts;
    for (const json& c : detail::field(doc, "cuts")) {
      Cut cut{point(detail::field(c, "a"), "cut"), detail::field(c, "b").get<double>(),
              point(detail::field(c, "source_psi"), "source_psi"),
              c.contains("certificate_digest") ? c.at("certificate_digest").get<std::string>() : std::string()};
      cuts.push_back(std::move(cut));
    }
    // Points first, then cuts, so that add_cut checks every pair.
    for (const json& a : detail::field(doc, "accepted")) kb.add_accepted(point(a, "accepted"), tol);
    for (const json& r : detail::field(doc, "rejected")) kb.add_rejected(point(r, "rejected"));
    for (Cut& c : cuts) kb.add_cut(std::move(c), tol);
    if (doc.contains("stats")) {
      for (Method m : {Method::OuterCut, Method::InnerHull, Method::FullSolve}) {
        const std::string key(to_string(m));
        if (!doc["stats"].contains(key)) continue;
        const json& s = doc["stats"][key];
        MethodStats ms{detail::field(s, "acceptable").get<int>(), detail::field(s, "unacceptable").get<int>(),
                       detail::field(s, "total_seconds").get<double>(), detail::field(s, "max_seconds").get<double>()};
        kb.set_stats(m, ms);
      }
    }
    return kb;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("knowledge base: ") + e.what());
  }
}

void save_kb(const KnowledgeBase& kb, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorKind::IoError, "cannot write knowledge base " + tmp.string());
    out << kb_to_json(kb) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

KnowledgeBase load_kb(const std::filesystem::path& path, const std::optional<Provenance>& expected, double tol) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open knowledge base " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_kb(buffer.str(), expected, tol);
}

}  // namespace hostcap
