#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

namespace vstretch {

using LinearMap = std::function<void(std::span<const double> x, std::span<double> y)>;

struct LanczosResult {
  double value = 0.0;           // smallest Ritz value
  double residual_bound = 0.0;  // |beta_j s_j| of the corresponding Ritz pair
  double error_bound = 0.0;     // min(residual, residual^2 / gap)
  int iterations = 0;
  bool converged = false;
};

/// Smallest eigenvalue of a symmetric operator on R^dim by Lanczos with full
/// reorthogonalization. Stops once error_bound <= tol * |value|, on an
/// invariant subspace, or after max_iter steps. The start vector is drawn from
/// a fixed-seed generator so results are reproducible.
LanczosResult lanczos_smallest(std::size_t dim, const LinearMap& apply, double tol, int max_iter,
                               std::uint64_t seed = 0x5eed5eedULL);

}  // namespace vstretch
