#pragma once

#include <span>

namespace hostcap {

/// Empirical CVaR at level delta in [0, 1) of equally weighted samples:
/// min_t  t + mean((v - t)_+) / (1 - delta),
/// evaluated as the average of the upper (1 - delta) tail with fractional
/// weight on the boundary sample. Throws BadDelta / InvalidArgument.
[[nodiscard]] double cvar(std::span<const double> values, double delta);

/// Smallest minimizer t of the CVaR objective among the sample values
/// (the empirical value-at-risk).
[[nodiscard]] double cvar_argmin_t(std::span<const double> values, double delta);

/// The objective of the variational form evaluated at a given t.
[[nodiscard]] double cvar_objective(std::span<const double> values, double delta, double t);

/// Fraction of samples strictly above threshold.
[[nodiscard]] double violation_fraction(std::span<const double> values, double threshold);

}  // namespace hostcap
