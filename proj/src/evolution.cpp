#include "vstretch/evolution.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "vstretch/simd/kernels.hpp"

namespace vstretch {

void EvolveConfig::validate() const {
  if (!(dt_min > 0.0) || !(dt_min <= dt_initial)) throw InvalidArgument("need 0 < dt_min <= dt_initial");
  if (!(t_max > 0.0)) throw InvalidArgument("t_max must be positive");
  if (!(safety > 0.0 && safety < 1.0)) throw InvalidArgument("safety must lie in (0, 1)");
  if (!(blowup_factor > 1.0)) throw InvalidArgument("blowup threshold factor must exceed 1");
  if (!(rtol > 0.0) || !(atol >= 0.0)) throw InvalidArgument("need rtol > 0 and atol >= 0");
  if (dt_max < 0.0) throw InvalidArgument("dt_max must be nonnegative");
  if (record_every < 1) throw InvalidArgument("record_every must be >= 1");
  if (nonlinearity_sign != 1 && nonlinearity_sign != -1) throw InvalidArgument("nonlinearity_sign must be +1 or -1");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Horizon:
      return "horizon";
    case Termination::BlowupThreshold:
      return "blowup_threshold";
    case Termination::StepUnderflow:
      return "step_underflow";
  }
  return "unknown";
}

RealField rhs(const RealField& omega, bool dealias, int sign) {
  const Grid& g = omega.grid();
  RealField out(g);
  if (dealias) {
    SpectralField f = fft_forward(omega);
    simd::scale_complex(f.coefficients(), g.dealias_weights());
    const RealField w = fft_inverse(f);
    simd::scale_complex(f.coefficients(), g.z11_weights());
    const RealField zw = fft_inverse(f);
    simd::multiply(zw.values(), w.values(), out.values());
    out = vstretch::dealias(out);
  } else {
    const RealField zw = apply_z11(omega);
    simd::multiply(zw.values(), omega.values(), out.values());
  }
  if (sign != 1) simd::scale(static_cast<double>(sign), out.values());
  return out;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr std::array<std::array<double, 6>, 7> kA{{
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
}};
// Fifth-order weights minus fourth-order weights.
constexpr std::array<double, 7> kE{71.0 / 57600,      0.0,         -71.0 / 16695, 71.0 / 1920,
                                   -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

double normalized_error(const TrialStep& trial, const RealField& y0, const EvolveConfig& config) {
  const double scale =
      config.atol + config.rtol * std::max(sup_norm(y0), sup_norm(trial.solution));
  if (!std::isfinite(trial.error_max)) return std::numeric_limits<double>::infinity();
  if (scale == 0.0) return trial.error_max == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return trial.error_max / scale;
}

}  // namespace

TrialStep rk_trial(const RealField& omega, double dt, bool dealias, int sign) {
  std::array<std::optional<RealField>, 7> k;
  k[0] = rhs(omega, dealias, sign);
  for (int s = 1; s < 7; ++s) {
    RealField y = omega;
    for (int j = 0; j < s; ++j)
      if (kA[s][j] != 0.0) simd::axpy(dt * kA[s][j], k[j]->values(), y.values());
    if (s == 6) {
      // Stage 7 is evaluated at the fifth-order solution itself.
      k[6] = rhs(y, dealias, sign);
      RealField err(omega.grid());
      for (int j = 0; j < 7; ++j)
        if (kE[j] != 0.0) simd::axpy(dt * kE[j], k[j]->values(), err.values());
      return TrialStep{std::move(y), sup_norm(err)};
    }
    k[s] = rhs(y, dealias, sign);
  }
  return TrialStep{omega, 0.0};  // unreachable
}

StepResult step(const RealField& omega, double dt, const EvolveConfig& config, double previous_error) {
  constexpr double kOrder = 5.0;
  constexpr double kAlpha = 0.7 / kOrder;
  constexpr double kBeta = 0.4 / kOrder;
  constexpr double kMinFactor = 0.2;
  constexpr double kMaxFactor = 5.0;

  int rejected = 0;
  for (;;) {
    if (dt < config.dt_min) {
      std::ostringstream os;
      os << "step underflow: required dt " << dt << " < dt_min " << config.dt_min;
      throw StepUnderflow(os.str(), dt);
    }
    TrialStep trial = rk_trial(omega, dt, config.dealias, config.nonlinearity_sign);
    const double err = normalized_error(trial, omega, config);
    if (err <= 1.0) {
      double factor = kMaxFactor;
      if (err > 0.0)
        factor = config.safety * std::pow(err, -kAlpha) * std::pow(std::max(previous_error, 1e-4), kBeta);
      factor = std::clamp(factor, kMinFactor, kMaxFactor);
      double dt_next = dt * factor;
      if (config.dt_max > 0.0) dt_next = std::min(dt_next, config.dt_max);
      return StepResult{std::move(trial.solution), dt, dt_next, err, rejected};
    }
    ++rejected;
    const double factor =
        std::isfinite(err) ? std::max(kMinFactor, config.safety * std::pow(err, -1.0 / kOrder)) : kMinFactor;
    dt *= factor;
  }
}

namespace {

void record(EvolutionTrace& trace, double t, const RealField& omega) {
  const double sup = sup_norm(omega);
  trace.times.push_back(t);
  trace.sup_norm.push_back(sup);
  trace.integral.push_back(integral(omega));
  trace.l2_norm.push_back(l2_norm(omega));
  trace.qform.push_back(quadratic_form(omega));
  const double floor = 1e-12 * sup;
  trace.support_cells.push_back(static_cast<std::size_t>(
      std::count_if(omega.values().begin(), omega.values().end(), [&](double v) { return std::abs(v) > floor; })));
}

}  // namespace

EvolutionTrace evolve(const RealField& omega0, const EvolveConfig& config, const Observer& observer) {
  config.validate();
  if (!omega0.all_finite()) throw EvolutionError("initial field is not finite");

  EvolutionTrace trace;
  const double sup0 = sup_norm(omega0);
  // A zero field stays zero; it has no meaningful threshold.
  trace.threshold = sup0 > 0.0 ? config.blowup_factor * sup0 : std::numeric_limits<double>::infinity();

  RealField omega = omega0;
  double t = 0.0;
  double dt = config.dt_initial;
  double previous_error = 1.0;
  record(trace, t, omega);
  if (observer) observer(t, omega);

  int since_record = 0;
  for (;;) {
    const double remaining = config.t_max - t;
    if (remaining <= 1e-14 * config.t_max) {
      trace.terminated = Termination::Horizon;
      break;
    }
    const bool final_step = dt >= remaining;
    std::optional<StepResult> s;
    try {
      s = step(omega, final_step ? remaining : dt, config, previous_error);
    } catch (const StepUnderflow& e) {
      trace.terminated = Termination::StepUnderflow;
      trace.last_dt = e.dt;
      break;
    }
    trace.steps_rejected += s->rejected;
    ++trace.steps_accepted;
    omega = std::move(s->omega);
    if (!omega.all_finite()) {
      std::ostringstream os;
      os << "non-finite values after accepted step at t = " << t + s->dt_taken;
      throw EvolutionError(os.str());
    }
    t = (final_step && s->dt_taken == remaining) ? config.t_max : t + s->dt_taken;
    previous_error = std::max(s->error_estimate, 1e-4);
    dt = s->dt_next;
    trace.last_dt = s->dt_taken;

    const bool crossed = sup_norm(omega) > trace.threshold;
    const bool done = crossed || t >= config.t_max;
    if (++since_record >= config.record_every || done) {
      record(trace, t, omega);
      if (observer) observer(t, omega);
      since_record = 0;
    }
    if (crossed) {
      trace.terminated = Termination::BlowupThreshold;
      break;
    }
    if (t >= config.t_max) {
      trace.terminated = Termination::Horizon;
      break;
    }
  }

  if (trace.terminated != Termination::Horizon) {
    try {
      const BlowupFit fit = estimate_blowup_time(trace, 0.2);
      trace.blowup_time_estimate = fit.T;
      trace.fit_quality = fit.fit_quality;
    } catch (const Error&) {
      // Too few samples or no monotone trend: leave the estimate empty.
    }
  }
  return trace;
}

BlowupFit estimate_blowup_time(const EvolutionTrace& trace, double fit_window) {
  if (!(fit_window > 0.0 && fit_window <= 1.0)) throw InvalidArgument("fit_window must lie in (0, 1]");
  if (trace.size() < 2) throw Error("no_trend", "no blow-up trend: trace too short");
  const double t0 = trace.times.front(), t1 = trace.times.back();
  const double start = t1 - fit_window * (t1 - t0);
  std::vector<double> ts, ys;
  double prev_sup = -1.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace.times[i] < start) continue;
    if (!(trace.sup_norm[i] > prev_sup) || !(trace.sup_norm[i] > 0.0))
      throw Error("no_trend", "no blow-up trend: sup norm not increasing in the fit window");
    prev_sup = trace.sup_norm[i];
    ts.push_back(trace.times[i]);
    ys.push_back(1.0 / trace.sup_norm[i]);
  }
  if (ts.size() < 10)
    throw Error("no_trend", "no blow-up trend: fewer than 10 samples in the fit window");

  const double m = static_cast<double>(ts.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    my += ys[i];
  }
  mt /= m;
  my /= m;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    sty += (ts[i] - mt) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sty / stt;
  if (!(slope < 0.0)) throw Error("no_trend", "no blow-up trend: 1/sup_norm is not decreasing");
  const double intercept = my - slope * mt;
  BlowupFit fit;
  fit.T = -intercept / slope;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = ys[i] - (intercept + slope * ts[i]);
    ss_res += r * r;
  }
  fit.fit_quality = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

double self_similar_deviation(const RealField& omega_t, const RealField& q, double T, double t) {
  if (!(t < T)) throw InvalidArgument("self_similar_deviation needs t < T");
  if (!(omega_t.grid() == q.grid())) throw InvalidArgument("fields live on different grids");
  const double s = 1.0 / (T - t);
  RealField diff = omega_t;
  simd::axpy(-s, q.values(), diff.values());
  const double ref = s * l2_norm(q);
  if (!(ref > 0.0)) throw InvalidArgument("self_similar_deviation needs a nonzero profile");
  return l2_norm(diff) / ref;
}

RealField gaussian_bump(const Grid& grid, double amplitude, double sigma, double radius, double cx, double cy) {
  return RealField::sample(grid, [&](double x1, double x2) {
    const double r2 = (x1 - cx) * (x1 - cx) + (x2 - cy) * (x2 - cy);
    return r2 <= radius * radius ? amplitude * std::exp(-r2 / (2.0 * sigma * sigma)) : 0.0;
  });
}

namespace {

void put(std::ostream& os, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  os.write(buf, ptr - buf);
}

}  // namespace

void write_trace_csv(std::ostream& os, const EvolutionTrace& trace) {
  os << "t,sup_norm,integral,l2_norm,qform\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    put(os, trace.times[i]);
    os << ',';
    put(os, trace.sup_norm[i]);
    os << ',';
    put(os, trace.integral[i]);
    os << ',';
    put(os, trace.l2_norm[i]);
    os << ',';
    put(os, trace.qform[i]);
    os << '\n';
  }
}

}  // namespace vstretch
