#pragma once

// Pseudospectral integration of omega_t = (Z11 omega) omega with an adaptive
// Dormand-Prince 5(4) pair, blow-up detection and blow-up time extrapolation.

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vstretch/error.hpp"
#include "vstretch/grid.hpp"

namespace vstretch {

struct EvolveConfig {
  double dt_initial = 1e-3;
  double dt_min = 1e-12;
  double dt_max = 0.0;  // 0: no cap beyond t_max
  double safety = 0.9;
  double rtol = 1e-8;   // local error relative to the sup norm
  double atol = 1e-12;
  double t_max = 1.0;
  double blowup_factor = 1e6;  // threshold = factor * ||omega0||_inf
  bool dealias = true;
  int record_every = 1;
  int nonlinearity_sign = 1;  // -1 integrates omega_t = -(Z11 omega) omega

  /// Throws InvalidArgument on inconsistent settings.
  void validate() const;
};

enum class Termination { Horizon, BlowupThreshold, StepUnderflow };

std::string to_string(Termination t);

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<double> sup_norm;
  std::vector<double> integral;
  std::vector<double> l2_norm;
  std::vector<double> qform;
  // Cells with |omega| > 1e-12 sup|omega|.
  std::vector<std::size_t> support_cells;

  std::optional<double> blowup_time_estimate;
  double fit_quality = 0.0;
  Termination terminated = Termination::Horizon;
  double threshold = 0.0;
  int steps_accepted = 0;
  int steps_rejected = 0;
  double last_dt = 0.0;

  std::size_t size() const noexcept { return times.size(); }
};

class StepUnderflow : public Error {
 public:
  StepUnderflow(const std::string& what, double dt) : Error("step_underflow", what), dt(dt) {}
  double dt;
};

class EvolutionError : public Error {
 public:
  explicit EvolutionError(const std::string& what) : Error("evolution", what) {}
};

/// (Z11 omega) omega, times `sign`. With dealias both factors and the product
/// are truncated by the 2/3 rule.
RealField rhs(const RealField& omega, bool dealias, int sign = 1);

struct TrialStep {
  RealField solution;     // fifth-order solution
  double error_max = 0.0; // max |y5 - y4|
};

/// One Dormand-Prince step of fixed size, no error control.
TrialStep rk_trial(const RealField& omega, double dt, bool dealias, int sign = 1);

struct StepResult {
  RealField omega;
  double dt_taken = 0.0;
  double dt_next = 0.0;
  double error_estimate = 0.0;  // normalized, <= 1 for accepted steps
  int rejected = 0;
};

/// One accepted adaptive step starting from trial size dt. Rejected trials
/// shrink dt; throws StepUnderflow when the required dt drops below dt_min.
/// `previous_error` feeds the PI controller (pass 1 for a fresh start).
StepResult step(const RealField& omega, double dt, const EvolveConfig& config, double previous_error = 1.0);

using Observer = std::function<void(double t, const RealField& omega)>;

/// Integrates until t_max, the blow-up threshold, or step underflow. The
/// observer sees every recorded state. Throws EvolutionError if an accepted
/// state is not finite.
EvolutionTrace evolve(const RealField& omega0, const EvolveConfig& config, const Observer& observer = {});

struct BlowupFit {
  double T = 0.0;
  double fit_quality = 0.0;  // coefficient of determination
};

/// Least-squares line through (t, 1/sup_norm) over the last `fit_window`
/// fraction of the traced time span; T is its root. Needs >= 10 samples with
/// strictly increasing sup_norm, else Error "no blow-up trend".
BlowupFit estimate_blowup_time(const EvolutionTrace& trace, double fit_window);

/// ||omega - Q/(T-t)||_2 / ||Q/(T-t)||_2. Throws InvalidArgument for t >= T.
double self_similar_deviation(const RealField& omega_t, const RealField& q, double T, double t);

/// amplitude * exp(-|x - c|^2 / (2 sigma^2)) inside the closed disk of
/// `radius` around c, zero outside.
RealField gaussian_bump(const Grid& grid, double amplitude, double sigma, double radius, double cx = 0.0,
                        double cy = 0.0);

/// Columns t, sup_norm, integral, l2_norm, qform.
void write_trace_csv(std::ostream& os, const EvolutionTrace& trace);

}  // namespace vstretch
