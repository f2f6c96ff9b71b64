#pragma once

#include "hostcap/network.hpp"
#include "hostcap/scenarios.hpp"
#include "hostcap/util.hpp"

#include <cstdint>

namespace hostcap {

/// Parameters of the small feeder used for desk experiments: a path
/// 1 - 2 - ... - n with identical lines.
struct DeskNetworkSpec {
  int buses = 3;
  double r = 0.03;
  double x = 0.03;
  double s_max = 1.5;
  double v_min = 0.95;  ///< voltage magnitude limits, p.u.
  double v_max = 1.05;
  double psi_max = 4.0;
  double eta = 0.251;  ///< reactive/real ratio of the inverters (power factor 0.97)
};

[[nodiscard]] RadialNetwork desk_network(const DeskNetworkSpec& spec = {});

/// Ten-minute intervals: a clear-sky bell between 6:00 and 18:00 scaled by a
/// per-day cloudiness draw and per-interval flicker, and loads following a
/// two-peak daily shape with multiplicative noise. Reactive load is
/// load_q_ratio times real load.
struct ScenarioSpec {
  int count = 500;
  double load_base = 0.4;
  double load_noise = 0.2;
  double load_q_ratio = 0.3;
  double cloud_min = 0.3;
  double flicker = 0.15;
};

[[nodiscard]] ScenarioSet synth_scenarios(int buses, const ScenarioSpec& spec, std::uint64_t seed);

/// Random tree on `buses` nodes (each bus attaches to a uniformly chosen
/// earlier bus) with line parameters drawn uniformly from the given ranges.
struct RandomTreeSpec {
  double r_min = 0.005, r_max = 0.05;
  double x_min = 0.005, x_max = 0.05;
  double s_max = 5.0;
  double v_min = 0.9, v_max = 1.1;
  double psi_max = 2.0;
  double eta = 0.251;
};

[[nodiscard]] RadialNetwork random_tree(int buses, Rng& rng, const RandomTreeSpec& spec = {});

}  // namespace hostcap
