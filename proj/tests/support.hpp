#pragma once

#include "hostcap/error.hpp"
#include "hostcap/network.hpp"
#include "hostcap/scenarios.hpp"
#include "hostcap/util.hpp"

#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

// EXPECT that `stmt` throws hostcap::Error of the given kind.
#define EXPECT_ERROR_KIND(stmt, expected_kind)                                           \
  do {                                                                                   \
    bool thrown_ = false;                                                                \
    try {                                                                                \
      (void)(stmt);                                                                      \
    } catch (const ::hostcap::Error& e_) {                                               \
      thrown_ = true;                                                                    \
      EXPECT_EQ(e_.kind(), (expected_kind)) << e_.what();                                \
    }                                                                                    \
    EXPECT_TRUE(thrown_) << "expected " << ::hostcap::to_string(expected_kind);          \
  } while (0)

namespace hostcap::testing {

/// Path 1 - 2 - ... - n with identical lines and wide limits.
inline RadialNetwork path_network(int n, double r = 0.01, double x = 0.01, double s_max = 10.0, double v_min = 0.9,
                                  double v_max = 1.1, double psi_max = 4.0) {
  NetworkData d;
  d.buses = n;
  for (int j = 1; j < n; ++j) d.lines.push_back(Line{j - 1, j, r, x, s_max});
  d.w_min = Vector::Constant(n, v_min * v_min);
  d.w_max = Vector::Constant(n, v_max * v_max);
  d.psi_max = Vector::Constant(n - 1, psi_max);
  d.eta_g = Vector::Constant(n - 1, 0.251);
  return RadialNetwork(std::move(d));
}

inline ScenarioSet constant_scenarios(int K, int width, double alpha, double p, double q) {
  return ScenarioSet(Matrix::Constant(K, width, alpha), Matrix::Constant(K, width, p), Matrix::Constant(K, width, q));
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform_unit(rng); }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    Rng rng(std::hash<std::string>{}(tag) ^ static_cast<std::uint64_t>(::getpid()));
    path_ = std::filesystem::temp_directory_path() / ("hostcap-" + tag + "-" + std::to_string(rng() % 1000000007));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace hostcap::testing
