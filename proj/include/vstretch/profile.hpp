#pragma once

// The restricted operator L phi = (Z11 phi~)|_A, where phi~ extends phi by
// zero off A, and the profile problem L Q = 1 on A, Q = 0 off A.
//
// Inside the solvers vectors live in "masked coordinates": one entry per mask
// cell, ordered like Mask::cells(). The grid weight h^2 is common to every
// entry and is dropped there; ratios and eigenvalues are unaffected.

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vstretch/error.hpp"
#include "vstretch/geometry.hpp"
#include "vstretch/grid.hpp"

namespace vstretch {

class RestrictedOperator {
 public:
  explicit RestrictedOperator(Mask mask);

  const Grid& grid() const noexcept { return mask_.grid(); }
  const Mask& mask() const noexcept { return mask_; }
  std::size_t dimension() const noexcept { return mask_.cell_count(); }

  /// y = L x in masked coordinates. Safe to call concurrently.
  void apply(std::span<const double> x, std::span<double> y) const;

  std::vector<double> restrict_to_mask(const RealField& f) const;
  RealField extend_by_zero(std::span<const double> x) const;

 private:
  Mask mask_;
};

/// L phi for a field supported on the mask. Throws InvalidArgument if phi has
/// any nonzero value off the mask.
RealField apply_L(const RestrictedOperator& op, const RealField& phi);

/// Dense matrix of L in masked coordinates, built from the translation-
/// invariant kernel of Z11. Throws InvalidArgument above 4096 cells.
Eigen::MatrixXd dense_L_matrix(const RestrictedOperator& op);

inline constexpr std::size_t kDenseCellLimit = 4096;

struct ProfileSolution {
  RealField q;               // zero off the mask, exactly
  Mask mask;
  double residual_l2 = 0.0;  // ||L Q - 1||_A / ||1||_A, recomputed from Q
  int iterations = 0;
  double delta_estimate = 0.0;
  std::vector<double> residual_history;  // relative recursive residual per iteration
};

/// Raised when CG fails. Carries the iterate with the smallest true residual
/// seen so far and the residual history.
class SolveError : public Error {
 public:
  SolveError(const std::string& what, RealField best, double best_residual, std::vector<double> history,
             int iteration)
      : Error("solve", what),
        best_iterate(std::move(best)),
        best_residual(best_residual),
        residual_history(std::move(history)),
        iteration(iteration) {}

  RealField best_iterate;
  double best_residual;
  std::vector<double> residual_history;
  int iteration;
};

/// Conjugate gradient on L Q = 1. The true residual b - L x replaces the
/// recursive one every 25 iterations and before declaring convergence.
/// Throws InvalidArgument when the mask violates diameter <= box_length/4
/// (which includes the full torus, where 1 lies along the removed zero mode),
/// and SolveError on breakdown or non-convergence.
ProfileSolution solve_profile(const RestrictedOperator& op, double tol, int max_iter,
                              double coercivity_tol = 1e-6);

/// Smallest eigenvalue of L (the coercivity constant) by Lanczos with full
/// reorthogonalization, iteration cap 2 * cell_count. Throws Error
/// "operator numerically singular" if the estimate is <= 10 eps.
double estimate_coercivity(const RestrictedOperator& op, double tol);

struct ProfileReport {
  // Z11 Q - 1 over the mask.
  double on_mask_max_deviation = 0.0;
  double on_mask_l2_deviation = 0.0;
  double on_mask_relative_l2 = 0.0;  // divided by ||1||_A
  // Largest |Q| off the mask; exactly zero for a valid profile.
  double off_mask_max = 0.0;
  bool off_mask_exact_zero = false;
  // (Z11 Q) Q - Q over the whole grid.
  double defect_l2 = 0.0;
  double defect_max = 0.0;
  double q_l2 = 0.0;
  double q_sup = 0.0;
  double q_min = 0.0;
  double q_max = 0.0;
};

ProfileReport verify_profile(const RealField& q, const Mask& mask);
inline ProfileReport verify_profile(const ProfileSolution& sol) { return verify_profile(sol.q, sol.mask); }

}  // namespace vstretch
