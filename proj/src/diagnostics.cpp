#include "vstretch/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "vstretch/error.hpp"
#include "vstretch/simd/kernels.hpp"

namespace vstretch {

RealField random_field(const Grid& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  RealField f(grid);
  for (double& v : f.values()) v = uni(rng);
  return f;
}

RealField random_mean_zero_field(const Grid& grid, std::mt19937_64& rng) {
  RealField f = random_field(grid, rng);
  const double mean = simd::sum(f.values()) / static_cast<double>(f.size());
  for (double& v : f.values()) v -= mean;
  return f;
}

RealField random_masked_field(const Mask& mask, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  RealField f(mask.grid());
  for (std::size_t idx : mask.cells()) f.values()[idx] = uni(rng);
  return f;
}

RealField smooth_bump(const Grid& grid, double cx, double cy, double rho) {
  return RealField::sample(grid, [&](double x1, double x2) {
    const double s = ((x1 - cx) * (x1 - cx) + (x2 - cy) * (x2 - cy)) / (rho * rho);
    return s < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s)) : 0.0;
  });
}

ConeStudy cone_mass_study(const Mask& mask, double k, int count, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("cone study needs at least one bump");
  const Grid& g = mask.grid();
  const double h = g.spacing();
  const double rho_max = std::max(2.0 * h, 0.5 * mask.diameter());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, mask.cell_count() - 1);
  std::uniform_real_distribution<double> radius(2.0 * h, rho_max);
  std::uniform_real_distribution<double> amp(0.5, 2.0);

  const RealField indicator = mask.as_field();
  ConeStudy study;
  study.k = k;
  double sum = 0.0;
  for (int b = 0; b < count; ++b) {
    const std::size_t idx = mask.cells()[pick(rng)];
    ConeBump bump;
    bump.cx = g.coordinate(static_cast<int>(idx % g.n()));
    bump.cy = g.coordinate(static_cast<int>(idx / g.n()));
    bump.rho = radius(rng);
    bump.amplitude = amp(rng);
    RealField f = smooth_bump(g, bump.cx, bump.cy, bump.rho);
    simd::multiply(f.values(), indicator.values(), f.values());
    simd::scale(bump.amplitude, f.values());
    bump.ratio = cone_mass_ratio(f, k);
    sum += bump.ratio;
    study.bumps.push_back(bump);
  }
  const auto [lo, hi] = std::minmax_element(study.bumps.begin(), study.bumps.end(),
                                            [](const ConeBump& a, const ConeBump& b) { return a.ratio < b.ratio; });
  study.min_ratio = lo->ratio;
  study.max_ratio = hi->ratio;
  study.mean_ratio = sum / count;
  return study;
}

}  // namespace vstretch
