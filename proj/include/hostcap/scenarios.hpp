#pragma once

#include "hostcap/network.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>

namespace hostcap {

using Matrix = Eigen::MatrixXd;

/// K equally weighted scenarios; row k of each matrix belongs to scenario k and
/// column j to bus j+2.
class ScenarioSet {
 public:
  ScenarioSet(Matrix alpha, Matrix p_demand, Matrix q_demand);

  [[nodiscard]] int count() const noexcept { return static_cast<int>(alpha_.rows()); }
  /// Number of non-substation buses.
  [[nodiscard]] int width() const noexcept { return static_cast<int>(alpha_.cols()); }

  [[nodiscard]] const Matrix& alpha() const noexcept { return alpha_; }
  [[nodiscard]] const Matrix& p_demand() const noexcept { return p_; }
  [[nodiscard]] const Matrix& q_demand() const noexcept { return q_; }

  [[nodiscard]] Vector alpha_row(int k) const { return alpha_.row(k).transpose(); }
  [[nodiscard]] Vector p_row(int k) const { return p_.row(k).transpose(); }
  [[nodiscard]] Vector q_row(int k) const { return q_.row(k).transpose(); }

  /// Rows picked in the given order.
  [[nodiscard]] ScenarioSet rows(const std::vector<int>& indices) const;

 private:
  Matrix alpha_, p_, q_;
};

/// CSV with 3(n-1) columns per row: alpha_2..alpha_n, pD_2..pD_n, qD_2..qD_n.
/// A first row that does not parse as numbers is treated as a header.
[[nodiscard]] ScenarioSet load_scenarios(const std::filesystem::path& path, int buses);
[[nodiscard]] ScenarioSet parse_scenarios(const std::string& text, int buses);
/// Shortest round-trip formatting, so load(save(s)) == s bit for bit.
[[nodiscard]] std::string scenarios_to_csv(const ScenarioSet& set, bool header = false);
void save_scenarios(const ScenarioSet& set, const std::filesystem::path& path, bool header = false);

/// m rows drawn uniformly without replacement, kept in their original order.
[[nodiscard]] ScenarioSet subsample(const ScenarioSet& set, int m, std::uint64_t seed);

/// The m row indices subsample() would keep.
[[nodiscard]] std::vector<int> subsample_indices(int count, int m, std::uint64_t seed);

/// SHA-256 of the canonical CSV encoding, hex.
[[nodiscard]] std::string scenario_digest(const ScenarioSet& set);

}  // namespace hostcap
