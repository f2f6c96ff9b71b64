#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace hostcap {

/// Lower-case hex SHA-256.
[[nodiscard]] std::string sha256_hex(std::string_view bytes);

/// Shortest decimal text that parses back to the same double.
[[nodiscard]] std::string format_double(double value);

/// Strict full-string double parse; returns false on any trailing garbage.
[[nodiscard]] bool parse_double(std::string_view text, double& out);

/// The one random engine used throughout (64-bit Mersenne Twister). Integer
/// draws go through uniform_below() instead of std distributions so that
/// seeds reproduce across standard libraries.
using Rng = std::mt19937_64;

/// Uniform integer in [0, bound) by rejection sampling.
[[nodiscard]] std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

/// Uniform double in [0, 1) from the top 53 bits.
[[nodiscard]] double uniform_unit(Rng& rng);

}  // namespace hostcap
