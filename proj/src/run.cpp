#include "vstretch/run.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "vstretch/diagnostics.hpp"
#include "vstretch/error.hpp"
#include "vstretch/evolution.hpp"
#include "vstretch/field_io.hpp"
#include "vstretch/profile.hpp"
#include "vstretch/simd/kernels.hpp"

namespace vstretch {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

void write_json(const fs::path& path, const Json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

Json grid_json(const Grid& g) { return Json{{"n", g.n()}, {"box_length", g.box_length()}}; }

Json report_json(const ProfileReport& r) {
  return Json{{"on_mask_max_deviation", r.on_mask_max_deviation},
              {"on_mask_l2_deviation", r.on_mask_l2_deviation},
              {"on_mask_relative_l2", r.on_mask_relative_l2},
              {"off_mask_max", r.off_mask_max},
              {"off_mask_exact_zero", r.off_mask_exact_zero},
              {"defect_l2", r.defect_l2},
              {"defect_max", r.defect_max},
              {"q_l2", r.q_l2},
              {"q_sup", r.q_sup},
              {"q_min", r.q_min},
              {"q_max", r.q_max}};
}

std::string csv_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Grid config_grid(const RunConfig& cfg) { return make_grid(cfg.grid.n, cfg.grid.box_length); }

const ShapeSpec& require_shape(const RunConfig& cfg) {
  if (!cfg.shape) throw ConfigError("missing required key 'shape.spec'");
  return *cfg.shape;
}

struct SolvedProfile {
  ProfileSolution solution;
  ProfileReport report;
};

SolvedProfile solve_from_config(const RunConfig& cfg, std::ostream& log) {
  const Grid grid = config_grid(cfg);
  Mask mask = rasterize(require_shape(cfg), grid);
  log << "mask: " << mask.cell_count() << " cells, diameter " << mask.diameter() << "\n";
  RestrictedOperator op(std::move(mask));
  ProfileSolution sol = solve_profile(op, cfg.solver.tol, cfg.solver.max_iter, cfg.solver.coercivity_tol);
  log << "CG converged in " << sol.iterations << " iterations, relative residual " << sol.residual_l2
      << ", delta estimate " << sol.delta_estimate << "\n";
  ProfileReport rep = verify_profile(sol);
  return {std::move(sol), rep};
}

Json profile_metadata(const RunConfig& cfg, const SolvedProfile& p) {
  const ProfileSolution& s = p.solution;
  return Json{{"residual_l2", s.residual_l2},
              {"iterations", s.iterations},
              {"delta_estimate", s.delta_estimate},
              {"tolerance", cfg.solver.tol},
              {"grid", grid_json(s.q.grid())},
              {"shape", to_string(require_shape(cfg))},
              {"cell_count", s.mask.cell_count()},
              {"mask_area", mask_area(s.mask)},
              {"mask_diameter", s.mask.diameter()},
              {"report", report_json(p.report)}};
}

RealField load_grid_field(const RunConfig& cfg, FieldKind expected) {
  DecodedField d = read_field_file(cfg.initial.file);
  if (d.kind != expected)
    throw IoError(cfg.initial.file + ": expected a " + to_string(expected) + " file, found " + to_string(d.kind));
  if (!(d.values.grid() == config_grid(cfg)))
    throw InvalidArgument(cfg.initial.file + ": grid does not match [grid] settings");
  return std::move(d.values);
}

RealField initial_field(const RunConfig& cfg) {
  const InitialCondition& ic = cfg.initial;
  switch (ic.kind) {
    case InitialKind::Bump: {
      const Grid g = config_grid(cfg);
      if (2.0 * ic.radius > g.box_length() / 4.0)
        throw InvalidArgument("initial bump support diameter exceeds box_length/4");
      return gaussian_bump(g, ic.amplitude, ic.sigma, ic.radius, ic.center_x, ic.center_y);
    }
    case InitialKind::Profile: {
      RealField q = load_grid_field(cfg, FieldKind::Profile);
      simd::scale(1.0 / ic.blowup_time, q.values());
      return q;
    }
    case InitialKind::Field:
      return load_grid_field(cfg, FieldKind::Omega);
  }
  throw InvalidArgument("unknown initial condition kind");
}

Json trace_summary(const EvolutionTrace& trace) {
  double min_qform_ratio = std::numeric_limits<double>::infinity();
  double max_integral_drop = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double l2sq = trace.l2_norm[i] * trace.l2_norm[i];
    if (l2sq > 0.0) min_qform_ratio = std::min(min_qform_ratio, trace.qform[i] / l2sq);
    if (i > 0) max_integral_drop = std::max(max_integral_drop, trace.integral[i - 1] - trace.integral[i]);
  }
  return Json{{"termination", to_string(trace.terminated)},
              {"t_final", trace.times.back()},
              {"sup_norm_final", trace.sup_norm.back()},
              {"integral_initial", trace.integral.front()},
              {"integral_final", trace.integral.back()},
              {"threshold", std::isfinite(trace.threshold) ? Json(trace.threshold) : Json(nullptr)},
              {"steps_accepted", trace.steps_accepted},
              {"steps_rejected", trace.steps_rejected},
              {"last_dt", trace.last_dt},
              {"records", trace.size()},
              {"min_qform_over_l2sq", std::isfinite(min_qform_ratio) ? Json(min_qform_ratio) : Json(nullptr)},
              {"max_integral_drop", max_integral_drop},
              {"support_cells_initial", trace.support_cells.front()},
              {"support_cells_final", trace.support_cells.back()}};
}

void refit(EvolutionTrace& trace, double fit_window, bool always) {
  if (!always && trace.terminated == Termination::Horizon) return;
  try {
    const BlowupFit fit = estimate_blowup_time(trace, fit_window);
    trace.blowup_time_estimate = fit.T;
    trace.fit_quality = fit.fit_quality;
  } catch (const Error&) {
    trace.blowup_time_estimate.reset();
    trace.fit_quality = 0.0;
  }
}

// ---------------------------------------------------------------------------

void run_solve_profile(const RunConfig& cfg, std::ostream& log) {
  const SolvedProfile p = solve_from_config(cfg, log);
  write_field(cfg.output_dir / "profile.vpf", p.solution.q, FieldKind::Profile);
  write_mask(cfg.output_dir / "mask.vpf", p.solution.mask);
  write_json(cfg.output_dir / "profile.json", profile_metadata(cfg, p));
}

void run_evolve(const RunConfig& cfg, std::ostream& log) {
  const RealField omega0 = initial_field(cfg);
  std::vector<double> pending = cfg.snapshot_times;
  std::sort(pending.begin(), pending.end());
  std::size_t next = 0;
  Json snapshots = Json::array();
  const Observer observer = [&](double t, const RealField& omega) {
    while (next < pending.size() && t >= pending[next]) {
      char name[32];
      std::snprintf(name, sizeof name, "snapshot_%03zu.vpf", next);
      write_field(cfg.output_dir / name, omega, FieldKind::Omega);
      snapshots.push_back(Json{{"file", name}, {"requested_t", pending[next]}, {"t", t}});
      ++next;
    }
  };
  EvolutionTrace trace = evolve(omega0, cfg.evolve, observer);
  refit(trace, cfg.fit_window, false);
  log << "evolution ended by " << to_string(trace.terminated) << " at t = " << trace.times.back() << "\n";

  std::ostringstream csv;
  write_trace_csv(csv, trace);
  write_file_atomic(cfg.output_dir / "trace.csv", csv.str());
  Json summary = trace_summary(trace);
  summary["blowup_time_estimate"] = optional_number(trace.blowup_time_estimate);
  summary["fit_quality"] = trace.fit_quality;
  summary["fit_window"] = cfg.fit_window;
  summary["snapshots"] = snapshots;
  write_json(cfg.output_dir / "evolve.json", summary);
}

void run_verify_self_similar(const RunConfig& cfg, std::ostream& log) {
  const double T = cfg.initial.blowup_time;
  if (!(cfg.evolve.t_max < T)) throw InvalidArgument("verify-self-similar needs evolve.t_max < initial.blowup_time");

  std::optional<SolvedProfile> solved;
  RealField q = cfg.initial.file.empty() ? (solved = solve_from_config(cfg, log), solved->solution.q)
                                         : load_grid_field(cfg, FieldKind::Profile);
  RealField omega0 = q;
  simd::scale(1.0 / T, omega0.values());

  std::ostringstream dev_csv;
  dev_csv << "t,deviation,sup_norm,expected_sup_norm\n";
  const double q_sup = sup_norm(q);
  double max_dev = 0.0;
  const Observer observer = [&](double t, const RealField& omega) {
    const double dev = self_similar_deviation(omega, q, T, t);
    max_dev = std::max(max_dev, dev);
    dev_csv << csv_number(t) << ',' << csv_number(dev) << ',' << csv_number(sup_norm(omega)) << ','
            << csv_number(q_sup / (T - t)) << '\n';
  };
  EvolutionTrace trace = evolve(omega0, cfg.evolve, observer);
  refit(trace, cfg.fit_window, true);
  log << "max self-similar deviation " << max_dev << ", fitted T "
      << (trace.blowup_time_estimate ? *trace.blowup_time_estimate : std::nan("")) << "\n";

  std::ostringstream trace_csv;
  write_trace_csv(trace_csv, trace);
  write_file_atomic(cfg.output_dir / "deviation.csv", dev_csv.str());
  write_file_atomic(cfg.output_dir / "trace.csv", trace_csv.str());

  Json summary{{"blowup_time", T},
               {"max_deviation", max_dev},
               {"blowup_time_estimate", optional_number(trace.blowup_time_estimate)},
               {"fit_quality", trace.fit_quality},
               {"fit_window", cfg.fit_window},
               {"dealias", cfg.evolve.dealias},
               {"trace", trace_summary(trace)}};
  if (trace.blowup_time_estimate) summary["relative_T_error"] = std::abs(*trace.blowup_time_estimate - T) / T;
  if (solved) summary["profile"] = profile_metadata(cfg, *solved);
  write_json(cfg.output_dir / "verify.json", summary);
}

void run_diagnostics(const RunConfig& cfg, std::ostream& log) {
  const Grid grid = config_grid(cfg);
  std::mt19937_64 rng(cfg.seed);
  Json out;
  out["grid"] = grid_json(grid);
  out["seed"] = cfg.seed;

  // Multiplier identities on lattice plane waves (wavenumber 3).
  {
    const double w = grid.frequency(3);
    const auto wave = [&](double a, double b) {
      return RealField::sample(grid, [&](double x1, double x2) { return std::sin(a * x1 + b * x2); });
    };
    const auto max_diff = [](const RealField& a, const RealField& b, double scale_b) {
      double m = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - scale_b * b.values()[i]));
      return m;
    };
    const RealField x1_wave = wave(w, 0.0), x2_wave = wave(0.0, w), diag = wave(w, w);
    const RealField f = random_mean_zero_field(grid, rng);
    RealField sum = apply_z11(f);
    simd::axpy(1.0, apply_z22(f).values(), sum.values());
    double min_w = 1.0, max_w = 0.0;
    for (double m : grid.z11_weights()) {
      min_w = std::min(min_w, m);
      max_w = std::max(max_w, m);
    }
    out["multiplier"] = Json{{"z11_x1_wave_error", max_diff(apply_z11(x1_wave), x1_wave, 1.0)},
                             {"z11_x2_wave_error", sup_norm(apply_z11(x2_wave))},
                             {"z11_diagonal_wave_error", max_diff(apply_z11(diag), diag, 0.5)},
                             {"complementarity_error", max_diff(sum, f, 1.0)},
                             {"weight_min", min_w},
                             {"weight_max", max_w},
                             {"zero_mode_weight", grid.z11_weights()[0]}};
  }
  // Self-adjointness, Parseval-side quadratic form, transform round trip.
  {
    const RealField f = random_field(grid, rng), g = random_field(grid, rng);
    const double lhs = inner_product(apply_z11(f), g), rhs_ = inner_product(f, apply_z11(g));
    const double direct = inner_product(apply_z11(f), f), spectral = quadratic_form(f);
    const RealField back = fft_inverse(fft_forward(f));
    double roundtrip = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) roundtrip = std::max(roundtrip, std::abs(back.values()[i] - f.values()[i]));
    out["operator"] = Json{{"self_adjoint_relative_error", std::abs(lhs - rhs_) / std::abs(lhs)},
                           {"qform_crosscheck_relative_error", std::abs(direct - spectral) / std::abs(spectral)},
                           {"roundtrip_max_error", roundtrip}};
  }
  // Restricted operator on the configured set.
  const Mask mask = rasterize(require_shape(cfg), grid);
  const RestrictedOperator op(mask);
  {
    Json L{{"shape", to_string(require_shape(cfg))}, {"cell_count", mask.cell_count()}, {"diameter", mask.diameter()}};
    const RealField phi = random_masked_field(mask, rng), psi = random_masked_field(mask, rng);
    const double a = inner_product(apply_L(op, phi), psi), b = inner_product(phi, apply_L(op, psi));
    L["symmetry_relative_error"] = std::abs(a - b) / std::abs(a);
    L["positivity_phi"] = inner_product(apply_L(op, phi), phi) / inner_product(phi, phi);
    const double delta = estimate_coercivity(op, cfg.solver.coercivity_tol);
    L["delta_estimate"] = delta;
    if (mask.cell_count() <= kDenseCellLimit) {
      const Eigen::MatrixXd D = dense_L_matrix(op);
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D, Eigen::EigenvaluesOnly);
      const double asym = (D - D.transpose()).cwiseAbs().maxCoeff();
      L["dense_asymmetry"] = asym;
      L["dense_eigen_min"] = es.eigenvalues()(0);
      L["dense_eigen_max"] = es.eigenvalues()(es.eigenvalues().size() - 1);
      L["delta_relative_error"] = std::abs(delta - es.eigenvalues()(0)) / es.eigenvalues()(0);
    }
    out["restricted_operator"] = L;
  }
  // Cone mass probe.
  {
    const ConeStudy study = cone_mass_study(mask, cfg.diagnostics.cone_k, cfg.diagnostics.bump_count, cfg.seed);
    std::ostringstream csv;
    csv << "index,cx,cy,rho,amplitude,ratio\n";
    for (std::size_t i = 0; i < study.bumps.size(); ++i) {
      const ConeBump& b = study.bumps[i];
      csv << i << ',' << csv_number(b.cx) << ',' << csv_number(b.cy) << ',' << csv_number(b.rho) << ','
          << csv_number(b.amplitude) << ',' << csv_number(b.ratio) << '\n';
    }
    write_file_atomic(cfg.output_dir / "cone_mass.csv", csv.str());
    out["cone_mass"] = Json{{"k", study.k},
                            {"count", study.bumps.size()},
                            {"min_ratio", study.min_ratio},
                            {"mean_ratio", study.mean_ratio},
                            {"max_ratio", study.max_ratio}};
    log << "cone mass ratio over " << study.bumps.size() << " bumps: min " << study.min_ratio << ", max "
        << study.max_ratio << "\n";
  }
  out["simd_backend"] = simd::active().name;
  write_json(cfg.output_dir / "diagnostics.json", out);
}

}  // namespace

void write_error_record(const fs::path& dir, const std::string& kind, const std::string& message) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const Json j{{"status", "error"}, {"kind", kind}, {"message", message}};
  write_file_atomic(dir / "error.json", j.dump(2) + "\n");
}

int run(const RunConfig& config, std::ostream& log) {
  try {
    fs::create_directories(config.output_dir);
    log << to_string(config.command) << " -> " << config.output_dir.string() << " (simd: " << simd::active().name
        << ")\n";
    switch (config.command) {
      case Command::SolveProfile:
        run_solve_profile(config, log);
        break;
      case Command::Evolve:
        run_evolve(config, log);
        break;
      case Command::VerifySelfSimilar:
        run_verify_self_similar(config, log);
        break;
      case Command::Diagnostics:
        run_diagnostics(config, log);
        break;
    }
    return 0;
  } catch (const Error& e) {
    log << "error [" << e.kind() << "]: " << e.what() << "\n";
    write_error_record(config.output_dir, e.kind(), e.what());
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    write_error_record(config.output_dir, "internal", e.what());
  }
  return 1;
}

}  // namespace vstretch
