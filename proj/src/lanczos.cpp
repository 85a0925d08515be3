#include "vstretch/lanczos.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "vstretch/error.hpp"
#include "vstretch/simd/kernels.hpp"

namespace vstretch {

namespace {

struct RitzPair {
  double value;
  double second;  // next Ritz value, +inf when j == 1
  double last_component;
};

RitzPair smallest_ritz(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const auto j = static_cast<Eigen::Index>(alpha.size());
  if (j == 1) return {alpha[0], std::numeric_limits<double>::infinity(), 1.0};
  Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), j);
  Eigen::VectorXd sub = Eigen::Map<const Eigen::VectorXd>(beta.data(), j - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw Error("lanczos", "tridiagonal eigensolve failed");
  return {es.eigenvalues()(0), es.eigenvalues()(1), es.eigenvectors()(j - 1, 0)};
}

}  // namespace

LanczosResult lanczos_smallest(std::size_t dim, const LinearMap& apply, double tol, int max_iter,
                               std::uint64_t seed) {
  if (dim == 0) throw InvalidArgument("lanczos on an empty space");
  if (max_iter < 1) throw InvalidArgument("lanczos needs max_iter >= 1");
  const int cap = static_cast<int>(std::min<std::size_t>(max_iter, dim));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<std::vector<double>> basis;
  basis.reserve(cap);
  std::vector<double> v(dim);
  for (auto& x : v) x = uni(rng);
  simd::scale(1.0 / std::sqrt(simd::dot(v, v)), v);

  std::vector<double> alpha, beta;
  std::vector<double> w(dim);
  LanczosResult result;
  double beta_prev = 0.0;

  for (int j = 0; j < cap; ++j) {
    basis.push_back(v);
    apply(basis.back(), w);
    const double a = simd::dot(w, basis.back());
    alpha.push_back(a);
    simd::axpy(-a, basis.back(), w);
    if (j > 0) simd::axpy(-beta_prev, basis[j - 1], w);
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) simd::axpy(-simd::dot(w, q), q, w);
    const double b = std::sqrt(simd::dot(w, w));
    result.iterations = j + 1;

    const bool invariant = b <= 1e-13 * std::max(1.0, std::abs(a));
    const bool last = invariant || j + 1 == cap;
    if (last || (j + 1) % 10 == 0) {
      const RitzPair ritz = smallest_ritz(alpha, beta);
      const double residual = std::abs(b * ritz.last_component);
      const double gap = ritz.second - ritz.value;
      result.value = ritz.value;
      result.residual_bound = residual;
      result.error_bound = gap > 0.0 ? std::min(residual, residual * residual / gap) : residual;
      if (invariant) {
        result.error_bound = 0.0;
        result.converged = true;
        return result;
      }
      if (result.error_bound <= tol * std::abs(result.value)) {
        result.converged = true;
        return result;
      }
    }
    if (last) break;
    beta.push_back(b);
    beta_prev = b;
    for (std::size_t i = 0; i < dim; ++i) v[i] = w[i] / b;
  }
  // Krylov space exhausted at full dimension: Ritz values are exact.
  if (static_cast<std::size_t>(result.iterations) == dim) {
    result.error_bound = 0.0;
    result.converged = true;
  }
  return result;
}

}  // namespace vstretch
