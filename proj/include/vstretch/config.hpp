#pragma once

// Run configuration: plain text, one `key = value` per line, grouped in
// `[section]` blocks. `#` and `;` start comments. See README.md for the
// complete key list.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vstretch/evolution.hpp"
#include "vstretch/geometry.hpp"

namespace vstretch {

enum class Command { SolveProfile, Evolve, VerifySelfSimilar, Diagnostics };

std::string to_string(Command c);

struct GridSettings {
  int n = 0;
  double box_length = 0.0;
};

struct SolverSettings {
  double tol = 1e-8;
  int max_iter = 20000;
  double coercivity_tol = 1e-6;
};

enum class InitialKind { Bump, Profile, Field };

struct InitialCondition {
  InitialKind kind = InitialKind::Bump;
  // Gaussian bump amplitude * exp(-|x-c|^2 / (2 sigma^2)), zero outside the
  // disk of `radius` around c.
  double amplitude = 1.0;
  double sigma = 0.25;
  double radius = 1.0;
  double center_x = 0.0;
  double center_y = 0.0;
  // Profile (scaled by 1/blowup_time) or raw field file.
  std::string file;
  double blowup_time = 1.0;
};

struct DiagnosticsSettings {
  double cone_k = 2.0;
  int bump_count = 100;
};

struct RunConfig {
  Command command = Command::SolveProfile;
  GridSettings grid;
  std::optional<ShapeSpec> shape;
  SolverSettings solver;
  EvolveConfig evolve;
  double fit_window = 0.2;
  std::vector<double> snapshot_times;
  InitialCondition initial;
  DiagnosticsSettings diagnostics;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir;
};

/// Throws ConfigError with "<origin>:<line>: ..." for syntax and value errors
/// and "missing required key '<section.key>'" for absent keys.
RunConfig parse_config(std::string_view text, const std::string& origin = "config");
RunConfig load_config(const std::filesystem::path& path);

}  // namespace vstretch
