#include "hostcap/scenarios.hpp"
#include "hostcap/synth.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <set>

using namespace hostcap;
using hostcap::testing::TempDir;
using hostcap::testing::uniform;

namespace {

ScenarioSet random_set(Rng& rng, int K, int width) {
  Matrix a(K, width), p(K, width), q(K, width);
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < width; ++j) {
      // Awkward doubles on purpose: no short decimal form.
      a(k, j) = uniform_unit(rng) * std::pow(10.0, uniform(rng, -8, 2));
      p(k, j) = uniform(rng, -3, 3) / 3.0;
      q(k, j) = std::ldexp(uniform(rng, -1, 1), static_cast<int>(uniform_below(rng, 40)) - 20);
    }
  }
  return ScenarioSet(a, p, q);
}

bool bit_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a.data()[i]) != std::bit_cast<std::uint64_t>(b.data()[i])) return false;
  }
  return true;
}

}  // namespace

TEST(LoadScenarios, SingleRow) {
  const ScenarioSet s = parse_scenarios("0.8,1.0,0.5\n", 2);
  EXPECT_EQ(s.count(), 1);
  EXPECT_EQ(s.width(), 1);
  EXPECT_EQ(s.alpha()(0, 0), 0.8);
  EXPECT_EQ(s.p_demand()(0, 0), 1.0);
  EXPECT_EQ(s.q_demand()(0, 0), 0.5);
}

TEST(LoadScenarios, ColumnGrouping) {
  // n = 3: alpha_2, alpha_3, p_2, p_3, q_2, q_3.
  const ScenarioSet s = parse_scenarios("alpha_2,alpha_3,p_d_2,p_d_3,q_d_2,q_d_3\n1,2,3,4,5,6\n", 3);
  EXPECT_EQ(s.count(), 1);
  EXPECT_EQ(s.alpha_row(0), (Vector(2) << 1, 2).finished());
  EXPECT_EQ(s.p_row(0), (Vector(2) << 3, 4).finished());
  EXPECT_EQ(s.q_row(0), (Vector(2) << 5, 6).finished());
}

TEST(LoadScenarios, ScientificNotationAndWhitespace) {
  const ScenarioSet s = parse_scenarios("1e-1, 2.5E0 ,-3e-2\r\n\n", 2);
  EXPECT_EQ(s.alpha()(0, 0), 0.1);
  EXPECT_EQ(s.p_demand()(0, 0), 2.5);
  EXPECT_EQ(s.q_demand()(0, 0), -0.03);
}

TEST(LoadScenarios, Errors) {
  EXPECT_ERROR_KIND(parse_scenarios("-0.1,1,0.5\n", 2), ErrorKind::ParseError);
  EXPECT_ERROR_KIND(parse_scenarios("0.1,1\n", 2), ErrorKind::DimensionMismatch);
  EXPECT_ERROR_KIND(parse_scenarios("0.1,1,0.5,7\n", 2), ErrorKind::DimensionMismatch);
  EXPECT_ERROR_KIND(parse_scenarios("0.1,1,0.5\n0.2,x,0.5\n", 2), ErrorKind::ParseError);
  EXPECT_ERROR_KIND(parse_scenarios("0.1,1,nan\n", 2), ErrorKind::ParseError);
  EXPECT_ERROR_KIND(parse_scenarios("0.1,1,inf\n", 2), ErrorKind::ParseError);
  EXPECT_ERROR_KIND(parse_scenarios("", 2), ErrorKind::EmptyFile);
  EXPECT_ERROR_KIND(parse_scenarios("a,b,c\n", 2), ErrorKind::EmptyFile);
  EXPECT_ERROR_KIND(load_scenarios("/nonexistent/file.csv", 2), ErrorKind::IoError);
}

TEST(LoadScenarios, RoundTripIsBitExact) {
  Rng rng(99);
  TempDir dir("scen");
  for (int trial = 0; trial < 20; ++trial) {
    const int width = 1 + static_cast<int>(uniform_below(rng, 5));
    const ScenarioSet s = random_set(rng, 1 + static_cast<int>(uniform_below(rng, 30)), width);
    const bool header = trial % 2 == 0;
    save_scenarios(s, dir / "s.csv", header);
    const ScenarioSet back = load_scenarios(dir / "s.csv", width + 1);
    EXPECT_TRUE(bit_equal(back.alpha(), s.alpha()));
    EXPECT_TRUE(bit_equal(back.p_demand(), s.p_demand()));
    EXPECT_TRUE(bit_equal(back.q_demand(), s.q_demand()));
    EXPECT_EQ(scenario_digest(back), scenario_digest(s));
  }
}

TEST(LoadScenarios, FullYearAtFeederScale) {
  // 52 560 ten-minute intervals on a 56-bus feeder.
  ScenarioSpec spec;
  spec.count = 52560;
  const ScenarioSet s = synth_scenarios(56, spec, 3);
  const ScenarioSet back = parse_scenarios(scenarios_to_csv(s, true), 56);
  EXPECT_EQ(back.count(), 52560);
  EXPECT_EQ(back.width(), 55);
}

TEST(Subsample, FullSizeIsIdentity) {
  Rng rng(1);
  const ScenarioSet s = random_set(rng, 17, 2);
  for (std::uint64_t seed : {0ull, 1ull, 12345ull}) {
    const ScenarioSet t = subsample(s, 17, seed);
    EXPECT_TRUE(bit_equal(t.alpha(), s.alpha()));
    EXPECT_EQ(scenario_digest(t), scenario_digest(s));
  }
}

TEST(Subsample, DeterministicForSeed) {
  Rng rng(2);
  const ScenarioSet s = random_set(rng, 3, 1);
  const ScenarioSet a = subsample(s, 1, 77);
  const ScenarioSet b = subsample(s, 1, 77);
  EXPECT_EQ(scenario_digest(a), scenario_digest(b));
  EXPECT_EQ(a.count(), 1);
}

TEST(Subsample, BadCount) {
  Rng rng(3);
  const ScenarioSet s = random_set(rng, 5, 1);
  EXPECT_ERROR_KIND(subsample(s, 0, 1), ErrorKind::BadCount);
  EXPECT_ERROR_KIND(subsample(s, 6, 1), ErrorKind::BadCount);
  EXPECT_ERROR_KIND(subsample(s, -2, 1), ErrorKind::BadCount);
}

TEST(Subsample, RowsComeFromTheInputWithoutRepeats) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const int K = 1 + static_cast<int>(uniform_below(rng, 60));
    const int m = 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(K)));
    const auto idx = subsample_indices(K, m, rng());
    ASSERT_EQ(static_cast<int>(idx.size()), m);
    EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
    EXPECT_EQ(std::set<int>(idx.begin(), idx.end()).size(), idx.size());
    EXPECT_GE(idx.front(), 0);
    EXPECT_LT(idx.back(), K);
  }
}

TEST(Subsample, MarginalsAreRoughlyUniform) {
  // Each index should be kept with probability m/K = 0.3.
  const int K = 10, m = 3, draws = 20000;
  std::vector<int> hits(K, 0);
  for (int d = 0; d < draws; ++d) {
    for (int i : subsample_indices(K, m, static_cast<std::uint64_t>(d))) ++hits[static_cast<std::size_t>(i)];
  }
  for (int h : hits) EXPECT_NEAR(static_cast<double>(h) / draws, 0.3, 0.02);
}

TEST(Digest, SensitiveToEveryValue) {
  Rng rng(5);
  const ScenarioSet s = random_set(rng, 4, 2);
  Matrix q = s.q_demand();
  q(3, 1) = std::nextafter(q(3, 1), 1e9);
  const ScenarioSet t(s.alpha(), s.p_demand(), q);
  EXPECT_NE(scenario_digest(s), scenario_digest(t));
  EXPECT_EQ(scenario_digest(s).size(), 64u);
}

TEST(Util, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Util, FormatParseRoundTrip) {
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::bit_cast<double>(rng());
    if (!std::isfinite(v)) continue;
    double back = 0.0;
    ASSERT_TRUE(parse_double(format_double(v), back));
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back), std::bit_cast<std::uint64_t>(v));
  }
  double out = 0.0;
  EXPECT_FALSE(parse_double("1.0x", out));
  EXPECT_FALSE(parse_double("", out));
}

TEST(Util, UniformBelowIsInRangeAndCoversIt) {
  Rng rng(7);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = uniform_below(rng, 7);
    ASSERT_LT(v, 7u);
    ++seen[v];
  }
  for (int c : seen) EXPECT_GT(c, 800);
}
