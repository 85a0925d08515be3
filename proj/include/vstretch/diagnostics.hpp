#pragma once

// Randomized probes used by the `diagnostics` command and the test suites.

#include <cstdint>
#include <random>
#include <vector>

#include "vstretch/geometry.hpp"
#include "vstretch/grid.hpp"

namespace vstretch {

/// Uniform(-1, 1) samples from the given generator.
RealField random_field(const Grid& grid, std::mt19937_64& rng);

/// Same, with the mean removed (zero Fourier mode ~ 0).
RealField random_mean_zero_field(const Grid& grid, std::mt19937_64& rng);

/// Uniform(-1, 1) samples on the mask, zero elsewhere.
RealField random_masked_field(const Mask& mask, std::mt19937_64& rng);

/// C-infinity bump exp(1 - 1/(1 - (r/rho)^2)) for r < rho, zero elsewhere.
RealField smooth_bump(const Grid& grid, double cx, double cy, double rho);

struct ConeBump {
  double cx = 0.0;
  double cy = 0.0;
  double rho = 0.0;
  double amplitude = 0.0;
  double ratio = 0.0;
};

struct ConeStudy {
  double k = 0.0;
  std::vector<ConeBump> bumps;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
};

/// Cone mass ratios of `count` random smooth bumps supported in the mask:
/// centers drawn among mask cells, radii in [2h, diameter/2], positive
/// amplitudes; each bump is multiplied by the mask indicator.
ConeStudy cone_mass_study(const Mask& mask, double k, int count, std::uint64_t seed);

}  // namespace vstretch
