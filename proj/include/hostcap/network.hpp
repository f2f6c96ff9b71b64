#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <filesystem>
#include <string>
#include <vector>

namespace hostcap {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// A distribution line. Bus indices are zero-based inside the library;
/// files and CLI output use one-based indices.
struct Line {
  int from = 0;
  int to = 0;
  double r = 0.0;
  double x = 0.0;
  double s_max = 0.0;
};

/// Raw network description as read from disk, before validation.
struct NetworkData {
  int buses = 0;
  std::vector<Line> lines;
  Vector w_min;
  Vector w_max;
  Vector psi_max;
  Vector eta_g;
  double w_substation = 1.0;
};

/// Single-phase radial feeder rooted at bus 0 (the substation).
///
/// Construction validates the tree structure and the limit vectors and
/// reorients every line parent->child by breadth-first search from the
/// substation. Line order is kept as given. Immutable afterwards.
class RadialNetwork {
 public:
  explicit RadialNetwork(NetworkData data);

  [[nodiscard]] int buses() const noexcept { return n_; }
  [[nodiscard]] int lines() const noexcept { return n_ - 1; }

  [[nodiscard]] const std::vector<Line>& edges() const noexcept { return lines_; }
  [[nodiscard]] const Vector& r() const noexcept { return r_; }
  [[nodiscard]] const Vector& x() const noexcept { return x_; }
  [[nodiscard]] const Vector& s_max() const noexcept { return s_max_; }
  [[nodiscard]] const Vector& w_min() const noexcept { return w_min_; }
  [[nodiscard]] const Vector& w_max() const noexcept { return w_max_; }
  /// Capacity caps for buses 2..n (length n-1).
  [[nodiscard]] const Vector& psi_max() const noexcept { return psi_max_; }
  [[nodiscard]] const Vector& eta_g() const noexcept { return eta_g_; }
  [[nodiscard]] double w_substation() const noexcept { return w_sub_; }

  /// Index of the line feeding `bus` (bus > 0).
  [[nodiscard]] int parent_line(int bus) const { return parent_line_.at(static_cast<std::size_t>(bus)); }
  /// Lines leaving `bus`.
  [[nodiscard]] const std::vector<int>& child_lines(int bus) const {
    return child_lines_.at(static_cast<std::size_t>(bus));
  }
  /// Buses in breadth-first order from the substation.
  [[nodiscard]] const std::vector<int>& bfs_order() const noexcept { return bfs_; }

  [[nodiscard]] NetworkData data() const;

 private:
  int n_ = 0;
  std::vector<Line> lines_;
  Vector r_, x_, s_max_, w_min_, w_max_, psi_max_, eta_g_;
  double w_sub_ = 1.0;
  std::vector<int> parent_line_;
  std::vector<std::vector<int>> child_lines_;
  std::vector<int> bfs_;
};

/// Signed line-to-bus incidence: +1 at the sending bus, -1 at the receiving bus.
struct IncidenceDecomposition {
  SparseMatrix B;
  SparseMatrix B_plus;
  SparseMatrix B_minus;
  /// Row-drop operator: maps a bus-indexed vector to buses 2..n.
  /// `drop_first[i]` is the bus index feeding entry i of the reduced vector.
  std::vector<int> drop_first;

  /// Applies the row-drop operator to a length-n vector.
  [[nodiscard]] Vector drop(const Vector& v) const;
};

[[nodiscard]] IncidenceDecomposition build_incidence(const RadialNetwork& net);

/// Validates that `lines` form a spanning tree over `buses` rooted at bus 0.
/// Throws GraphNotTree otherwise.
void check_spanning_tree(int buses, const std::vector<Line>& lines);

struct Injections {
  Vector p;
  Vector q;
};

/// Net nodal injections at buses 2..n for a single scenario and capacity vector.
[[nodiscard]] Injections injections(const RadialNetwork& net, const Vector& alpha, const Vector& p_demand,
                                    const Vector& q_demand, const Vector& psi);

/// Per-scenario branch-flow state: sending-end flows, squared currents and
/// squared bus voltages.
struct FlowState {
  Vector P;
  Vector Q;
  Vector L;
  Vector W;
};

/// Residuals of the exact branch-flow equations (balance, voltage drop and
/// the quadratic current relation) evaluated at `state`.
struct FlowResiduals {
  double real_balance = 0.0;
  double reactive_balance = 0.0;
  double voltage_drop = 0.0;
  double current_relation = 0.0;
  double substation = 0.0;

  [[nodiscard]] double max() const;
};

[[nodiscard]] FlowResiduals flow_residuals(const RadialNetwork& net, const Injections& inj, const FlowState& state);

struct OracleOptions {
  int max_iter = 1000;
  double tolerance = 1e-13;
  /// Divergence guard: squared currents above this bound mean no solution.
  double divergence_bound = 1e8;
};

/// Exact (nonconvex) power flow by backward/forward sweep with fixed-point
/// iteration on the squared currents, started from zero current so that the
/// high-voltage solution branch is returned.
///
/// Throws NoSolution when the sweep diverges and NonConvergence when the
/// iteration cap is hit.
[[nodiscard]] FlowState solve_power_flow_oracle(const RadialNetwork& net, const Injections& inj,
                                                const OracleOptions& opts = {});

// JSON network files. Indices are one-based; unknown fields are rejected.
[[nodiscard]] RadialNetwork load_network(const std::filesystem::path& path);
[[nodiscard]] RadialNetwork parse_network(const std::string& json_text);
[[nodiscard]] std::string network_to_json(const RadialNetwork& net);
void save_network(const RadialNetwork& net, const std::filesystem::path& path);

}  // namespace hostcap
