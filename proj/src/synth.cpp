#include "hostcap/synth.hpp"

#include "hostcap/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hostcap {

RadialNetwork desk_network(const DeskNetworkSpec& spec) {
  require(spec.buses >= 2, ErrorKind::InvalidArgument, "a feeder needs at least two buses");
  NetworkData d;
  d.buses = spec.buses;
  for (int j = 1; j < spec.buses; ++j) d.lines.push_back(Line{j - 1, j, spec.r, spec.x, spec.s_max});
  d.w_min = Vector::Constant(spec.buses, spec.v_min * spec.v_min);
  d.w_max = Vector::Constant(spec.buses, spec.v_max * spec.v_max);
  d.psi_max = Vector::Constant(spec.buses - 1, spec.psi_max);
  d.eta_g = Vector::Constant(spec.buses - 1, spec.eta);
  return RadialNetwork(std::move(d));
}

namespace {

constexpr int kIntervalsPerDay = 144;

double solar_shape(int interval) {
  const double hour = interval / 6.0;
  if (hour <= 6.0 || hour >= 18.0) return 0.0;
  return std::sin(std::numbers::pi * (hour - 6.0) / 12.0);
}

double load_shape(int interval) {
  const double hour = interval / 6.0;
  auto bump = [](double h, double centre, double width) {
    const double z = (h - centre) / width;
    return std::exp(-0.5 * z * z);
  };
  return 0.55 + 0.25 * bump(hour, 8.0, 2.0) + 0.45 * bump(hour, 19.0, 2.5);
}

}  // namespace

ScenarioSet synth_scenarios(int buses, const ScenarioSpec& spec, std::uint64_t seed) {
  require(buses >= 2, ErrorKind::InvalidArgument, "a feeder needs at least two buses");
  require(spec.count >= 1, ErrorKind::BadCount, "at least one scenario is needed");
  const int m = buses - 1;
  Rng rng(seed);
  Matrix alpha(spec.count, m), p(spec.count, m), q(spec.count, m);
  double cloud = 1.0;
  for (int k = 0; k < spec.count; ++k) {
    const int interval = k % kIntervalsPerDay;
    if (interval == 0) cloud = spec.cloud_min + (1.0 - spec.cloud_min) * uniform_unit(rng);
    const double sun = solar_shape(interval) * cloud;
    for (int j = 0; j < m; ++j) {
      const double flick = 1.0 - spec.flicker * uniform_unit(rng);
      alpha(k, j) = std::clamp(sun * flick, 0.0, 1.0);
      const double noise = 1.0 + spec.load_noise * (2.0 * uniform_unit(rng) - 1.0);
      p(k, j) = spec.load_base * load_shape(interval) * noise;
      q(k, j) = spec.load_q_ratio * p(k, j);
    }
  }
  return ScenarioSet(std::move(alpha), std::move(p), std::move(q));
}

RadialNetwork random_tree(int buses, Rng& rng, const RandomTreeSpec& spec) {
  require(buses >= 2, ErrorKind::InvalidArgument, "a tree needs at least two buses");
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * uniform_unit(rng); };
  NetworkData d;
  d.buses = buses;
  for (int j = 1; j < buses; ++j) {
    const int parent = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(j)));
    d.lines.push_back(Line{parent, j, between(spec.r_min, spec.r_max), between(spec.x_min, spec.x_max), spec.s_max});
  }
  d.w_min = Vector::Constant(buses, spec.v_min * spec.v_min);
  d.w_max = Vector::Constant(buses, spec.v_max * spec.v_max);
  d.psi_max = Vector::Constant(buses - 1, spec.psi_max);
  d.eta_g = Vector::Constant(buses - 1, spec.eta);
  return RadialNetwork(std::move(d));
}

}  // namespace hostcap
