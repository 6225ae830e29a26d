#ifndef PADSHIELD_DIST_HPP
#define PADSHIELD_DIST_HPP

#include <optional>
#include <string>

#include "padshield/rng.hpp"

namespace padshield {

enum class DistFamily {
  UniformContinuous,
  UniformDiscrete,
  Normal,
  Rayleigh,
  PointMass,
};

/// A parameterized probability distribution with optional post-sample clamp.
///
/// Parameter meaning by family:
///   UniformContinuous  a, b   inclusive bounds, a <= b
///   UniformDiscrete    a, b   integer bounds, inclusive, a <= b
///   Normal             a = mean, b = stddev (>= 0)
///   Rayleigh           a = scale (> 0), inverse-CDF sampling
///   PointMass          a = the value
struct DistributionSpec {
  DistFamily family = DistFamily::PointMass;
  double a = 0.0;
  double b = 0.0;
  std::optional<double> clamp_min;
  std::optional<double> clamp_max;

  bool operator==(const DistributionSpec&) const = default;

  static DistributionSpec point(double value);
  static DistributionSpec uniform(double lo, double hi);
  static DistributionSpec uniform_discrete(double lo, double hi);
  static DistributionSpec normal(double mean, double stddev);
  static DistributionSpec rayleigh(double scale);

  /// Returns a copy with the clamp interval set.
  DistributionSpec clamped(std::optional<double> lo, std::optional<double> hi) const;

  /// Throws ParamError when the parameters are out of domain.
  void validate(const char* field = "dist") const;

  /// Draw one value; clamps to [clamp_min, clamp_max] when set.
  double sample(Rng& rng) const;

  /// Compact textual form used inside the machine serialization format,
  /// e.g. "normal:9333.33:9482.2:0:18666.7" (last two tokens = clamp).
  std::string format() const;

  /// Inverse of format(). Throws ParseError (line 0) on malformed input.
  static DistributionSpec parse(const std::string& text);
};

}  // namespace padshield

#endif
