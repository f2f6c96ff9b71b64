#pragma once

#include "hostcap/assemble.hpp"
#include "hostcap/conic/solver.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hostcap {

enum class Decision { Acceptable, Unacceptable };
enum class Method { OuterCut, InnerHull, FullSolve };

[[nodiscard]] std::string_view to_string(Decision d) noexcept;
[[nodiscard]] std::string_view to_string(Method m) noexcept;

/// Half-space a'psi - b <= 0 that every acceptable psi satisfies.
struct Cut {
  Vector a;
  double b = 0.0;
  Vector source_psi;
  std::string certificate_digest;

  [[nodiscard]] double value(const Vector& psi) const { return a.dot(psi) - b; }
};

struct Provenance {
  std::string network_digest;
  std::string scenario_digest;
  double nu = 0.0;
  double gamma = 0.0;

  bool operator==(const Provenance&) const = default;
};

struct MethodStats {
  int acceptable = 0;
  int unacceptable = 0;
  double total_seconds = 0.0;
  double max_seconds = 0.0;

  [[nodiscard]] int count() const { return acceptable + unacceptable; }
};

struct AcceptOptions {
  SolverOptions solver;
  AssembleOptions assemble;
  /// Cut values up to this are treated as satisfied.
  double cut_eps = 1e-8;
  /// Minimum dual objective at the source psi for a certificate to become a cut.
  double cut_margin = 1e-7;
  /// Hull generator cap; 0 keeps every accepted point.
  int max_generators = 0;
  /// Also run the hull check when the outer test rejects, to flag overlaps.
  bool audit_overlap = false;
};

/// Accepted points (hull generators), rejected points and cuts for one
/// (network, scenarios, nu, gamma). Every accepted point satisfies every cut.
class KnowledgeBase {
 public:
  KnowledgeBase(Provenance provenance, Vector psi_max);

  [[nodiscard]] const Provenance& provenance() const noexcept { return provenance_; }
  [[nodiscard]] const Vector& psi_max() const noexcept { return psi_max_; }
  [[nodiscard]] const std::vector<Vector>& accepted() const noexcept { return accepted_; }
  [[nodiscard]] const std::vector<Vector>& rejected() const noexcept { return rejected_; }
  [[nodiscard]] const std::vector<Cut>& cuts() const noexcept { return cuts_; }
  [[nodiscard]] const std::array<MethodStats, 3>& stats() const noexcept { return stats_; }
  [[nodiscard]] const MethodStats& stats(Method m) const { return stats_[static_cast<std::size_t>(m)]; }

  /// Throws InvariantViolation if psi violates a cut by more than tol.
  void add_accepted(const Vector& psi, double tol, int max_generators = 0);
  void add_rejected(const Vector& psi);
  /// Throws InvariantViolation if an accepted point violates the cut by more than tol.
  void add_cut(Cut cut, double tol);
  void record(Method m, Decision d, double seconds);
  void set_stats(Method m, const MethodStats& s) { stats_[static_cast<std::size_t>(m)] = s; }

  /// Throws InvariantViolation when an accepted point violates a cut.
  void check_invariants(double tol) const;

 private:
  Provenance provenance_;
  Vector psi_max_;
  std::vector<Vector> accepted_;
  std::vector<Vector> rejected_;
  std::vector<Cut> cuts_;
  std::array<MethodStats, 3> stats_{};
};

[[nodiscard]] Provenance make_provenance(const RadialNetwork& net, const ScenarioSet& scen, const RiskParams& risk);

/// psi in the convex hull of the accepted points (membership LP).
[[nodiscard]] bool in_inner(const KnowledgeBase& kb, const Vector& psi);

/// psi outside the box [0, psi_max] or strictly beyond some cut (value > cut_eps).
[[nodiscard]] bool outside_outer(const KnowledgeBase& kb, const Vector& psi, double cut_eps = 1e-8);

/// Turns an infeasibility certificate of the feasibility program into a cut.
/// Throws InvalidCertificate when the dual residuals exceed 10 * feas_tol or the
/// margin at source_psi is below cut_margin.
[[nodiscard]] Cut make_cut(const Certificate& cert, const ConicProgram& program, const Vector& source_psi,
                           double feas_tol = 1e-8, double cut_margin = 1e-7);

struct TestOutcome {
  Decision decision = Decision::Unacceptable;
  Method method = Method::FullSolve;
  double seconds = 0.0;
  /// FullSolve only: solver status and whether a cut was added.
  std::optional<SolveStatus> solve_status;
  bool cut_added = false;
  /// Set when audit_overlap found psi both in the hull and beyond a cut.
  bool overlap = false;
};

/// Runs the incremental test against a knowledge base. Digests of the
/// inputs are computed once at construction.
class AcceptanceTester {
 public:
  AcceptanceTester(const RadialNetwork& net, const ScenarioSet& scen, const RiskParams& risk,
                   AcceptOptions opts = {});

  [[nodiscard]] const Provenance& provenance() const noexcept { return provenance_; }
  [[nodiscard]] KnowledgeBase fresh_kb() const;

  /// Outer cuts, then inner hull, then a full conic solve. Throws
  /// ProvenanceMismatch, NumericalFailure (kb unchanged), InvariantViolation.
  TestOutcome test(KnowledgeBase& kb, const Vector& psi) const;

  /// Full conic solve without consulting or changing any knowledge base.
  /// Candidates outside the box are unacceptable without a solve.
  [[nodiscard]] Decision full_decision(const Vector& psi) const;

  /// Tests all corners of the box [0, psi_max] (at most 2^12 of them).
  std::vector<TestOutcome> seed_corners(KnowledgeBase& kb) const;

 private:
  const RadialNetwork& net_;
  const ScenarioSet& scen_;
  RiskParams risk_;
  AcceptOptions opts_;
  Provenance provenance_;
};

/// Free-function form of AcceptanceTester::test.
TestOutcome test(KnowledgeBase& kb, const RadialNetwork& net, const ScenarioSet& scen, const RiskParams& risk,
                 const Vector& psi, const AcceptOptions& opts = {});

[[nodiscard]] std::string kb_to_json(const KnowledgeBase& kb);
/// Parses and verifies invariants (tol = cut_eps). When `expected` is given the
/// stored provenance must match it exactly.
[[nodiscard]] KnowledgeBase parse_kb(const std::string& json_text, const std::optional<Provenance>& expected = {},
                                     double tol = 1e-8);
void save_kb(const KnowledgeBase& kb, const std::filesystem::path& path);
[[nodiscard]] KnowledgeBase load_kb(const std::filesystem::path& path, const std::optional<Provenance>& expected = {},
                                    double tol = 1e-8);

}  // namespace hostcap
