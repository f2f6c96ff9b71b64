#include "hostcap/cvar.hpp"

#include "hostcap/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace hostcap {

namespace {

void check(std::span<const double> values, double delta) {
  require(!values.empty(), ErrorKind::InvalidArgument, "CVaR needs a nonempty sample");
  require(std::isfinite(delta) && delta >= 0.0 && delta < 1.0, ErrorKind::BadDelta, "delta must lie in [0, 1)");
}

// Tail mass (1 - delta) K in sample units, snapped to an integer when it is one
// up to rounding (delta = 1 - 1/K and friends).
long double tail_mass(std::size_t count, double delta) {
  const long double mass = (1.0L - static_cast<long double>(delta)) * static_cast<long double>(count);
  const long double nearest = std::round(mass);
  if (std::abs(mass - nearest) <= 1e-9L * static_cast<long double>(count)) return nearest;
  return mass;
}

}  // namespace

double cvar(std::span<const double> values, double delta) {
  check(values, delta);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const long double mass = tail_mass(sorted.size(), delta);

  long double sum = 0.0L;
  long double taken = 0.0L;
  for (double v : sorted) {
    const long double w = std::min(1.0L, mass - taken);
    if (w <= 0.0L) break;
    sum += w * v;
    taken += w;
  }
  const double tail = static_cast<double>(sum / mass);

  long double total = 0.0L;
  for (double v : sorted) total += v;
  const double mean = static_cast<double>(total / static_cast<long double>(sorted.size()));
  // The exact value lies in [mean, max]; keep rounding from leaving it.
  return std::clamp(tail, std::min(mean, sorted.front()), sorted.front());
}

double cvar_argmin_t(std::span<const double> values, double delta) {
  check(values, delta);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const long double mass = tail_mass(sorted.size(), delta);
  // Right slope at t is 1 - #{v > t} / mass; the first sample where it turns
  // nonnegative is the smallest minimizer.
  const std::size_t n = sorted.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 < n && sorted[i + 1] == sorted[i]) continue;
    const auto above = static_cast<long double>(n - i - 1);
    if (above <= mass) {
      // Walk back to the first copy of this value.
      std::size_t j = i;
      while (j > 0 && sorted[j - 1] == sorted[i]) --j;
      return sorted[j];
    }
  }
  return sorted.back();
}

double cvar_objective(std::span<const double> values, double delta, double t) {
  check(values, delta);
  long double excess = 0.0L;
  for (double v : values) excess += std::max(0.0L, static_cast<long double>(v) - t);
  return static_cast<double>(t + excess / ((1.0L - delta) * static_cast<long double>(values.size())));
}

double violation_fraction(std::span<const double> values, double threshold) {
  if (values.empty()) return 0.0;
  const auto above = std::count_if(values.begin(), values.end(), [&](double v) { return v > threshold; });
  return static_cast<double>(above) / static_cast<double>(values.size());
}

}  // namespace hostcap
