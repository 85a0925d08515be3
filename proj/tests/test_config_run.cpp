#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vstretch/config.hpp"
#include "vstretch/error.hpp"
#include "vstretch/run.hpp"

using namespace vstretch;
namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json read_json(const fs::path& p) { return Json::parse(slurp(p)); }

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::current_path() / "config_run_out" / name;
  fs::remove_all(d);
  return d;
}

std::string config_error(std::string_view text) {
  try {
    parse_config(text, "test.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

int run_quiet(const RunConfig& cfg) {
  std::ostringstream log;
  return run(cfg, log);
}

}  // namespace

TEST_CASE("parse a full config") {
  const RunConfig cfg = parse_config(R"(
# profile then evolve
command = evolve
output_dir = out/a
seed = 42

[grid]
n = 64          ; comment
box_length = 16

[evolve]
t_max = 2.5
dealias = false
rtol = 1e-9
snapshot_times = 0.5, 1.0

[initial]
kind = profile
file = out/profile.vpf
blowup_time = 2
)");
  CHECK(cfg.command == Command::Evolve);
  CHECK(cfg.output_dir == fs::path("out/a"));
  CHECK(cfg.seed == 42);
  CHECK(cfg.grid.n == 64);
  CHECK(cfg.grid.box_length == 16.0);
  CHECK(cfg.evolve.t_max == 2.5);
  CHECK_FALSE(cfg.evolve.dealias);
  CHECK(cfg.evolve.rtol == 1e-9);
  CHECK(cfg.snapshot_times == std::vector<double>{0.5, 1.0});
  CHECK(cfg.initial.kind == InitialKind::Profile);
  CHECK(cfg.initial.file == "out/profile.vpf");
  CHECK(cfg.initial.blowup_time == 2.0);
  CHECK_FALSE(cfg.shape.has_value());
}

TEST_CASE("config errors") {
  const std::string base = "command = solve-profile\noutput_dir = o\n[shape]\nspec = disk(0,0,1)\n";
  CHECK(config_error(base + "[grid]\nbox_length = 16\n").find("missing required key 'grid.n'") != std::string::npos);
  CHECK(config_error(base + "[grid]\nn = 64\nbox_length = 16\ncolour = red\n").find("test.cfg:8: unknown key 'grid.colour'") !=
        std::string::npos);
  CHECK(config_error(base + "[grid]\nn = sixty\nbox_length = 16\n").find("test.cfg:6:") != std::string::npos);
  CHECK(config_error(base + "[grid]\nn = 64\nn = 32\nbox_length = 16\n").find("duplicate key") != std::string::npos);
  CHECK(config_error("command = fly\noutput_dir = o\n[grid]\nn = 64\nbox_length = 16\n").find("unknown command") !=
        std::string::npos);
  CHECK(config_error("command = solve-profile\noutput_dir = o\n[grid]\nn = 64\nbox_length = 16\n")
            .find("missing required key 'shape.spec'") != std::string::npos);
  CHECK(config_error("command = evolve\noutput_dir = o\n[grid]\nn = 64\nbox_length = 16\n[initial]\nkind = profile\n")
            .find("initial.file") != std::string::npos);
  CHECK(config_error(base + "[grid]\nn = 64\nbox_length = 16\n[solver]\ntol = 0.5\n").find("solver.tol") !=
        std::string::npos);
  CHECK_FALSE(config_error(base + "[grid\n").empty());
}

TEST_CASE("solve-profile then evolve from the written profile") {
  const fs::path dir = fresh_dir("chain");
  const RunConfig solve = parse_config("command = solve-profile\noutput_dir = " + (dir / "profile").string() +
                                       "\n[grid]\nn = 128\nbox_length = 16\n[shape]\nspec = disk(0, 0, 1)\n"
                                       "[solver]\ntol = 1e-8\n");
  REQUIRE(run_quiet(solve) == 0);
  const Json meta = read_json(dir / "profile" / "profile.json");
  CHECK(meta["residual_l2"].get<double>() <= 1e-8);
  CHECK(meta["delta_estimate"].get<double>() > 0.0);
  CHECK(meta["report"]["off_mask_exact_zero"].get<bool>());
  CHECK(fs::exists(dir / "profile" / "profile.vpf"));
  CHECK(fs::exists(dir / "profile" / "mask.vpf"));

  const RunConfig evolve = parse_config("command = evolve\noutput_dir = " + (dir / "evolve").string() +
                                        "\n[grid]\nn = 128\nbox_length = 16\n[evolve]\nt_max = 5\ndealias = false\n"
                                        "rtol = 1e-10\natol = 1e-14\nsnapshot_times = 0.5\n[initial]\nkind = profile\nfile = " +
                                        (dir / "profile" / "profile.vpf").string() + "\nblowup_time = 2\n");
  REQUIRE(run_quiet(evolve) == 0);
  const Json summary = read_json(dir / "evolve" / "evolve.json");
  CHECK(summary["termination"] == "blowup_threshold");
  REQUIRE(summary["blowup_time_estimate"].is_number());
  CHECK(std::abs(summary["blowup_time_estimate"].get<double>() - 2.0) <= 0.02 * 2.0);
  CHECK(fs::exists(dir / "evolve" / "snapshot_000.vpf"));
  const std::string csv = slurp(dir / "evolve" / "trace.csv");
  CHECK(csv.rfind("t,sup_norm,integral,l2_norm,qform\n", 0) == 0);
}

TEST_CASE("errors produce a record and no field files") {
  const fs::path dir = fresh_dir("error");
  // Diameter 4.5 > 16/4 passes parsing but fails rasterization.
  const RunConfig cfg = parse_config("command = solve-profile\noutput_dir = " + dir.string() +
                                     "\n[grid]\nn = 64\nbox_length = 16\n[shape]\nspec = disk(0, 0, 2.25)\n");
  CHECK(run_quiet(cfg) != 0);
  const Json err = read_json(dir / "error.json");
  CHECK(err["status"] == "error");
  CHECK(err["kind"] == "geometry");
  CHECK(err["message"].get<std::string>().find("diameter") != std::string::npos);
  for (const auto& entry : fs::directory_iterator(dir)) CHECK(entry.path().extension() != ".vpf");

  const fs::path missing = fresh_dir("missing_input");
  const RunConfig ev = parse_config("command = evolve\noutput_dir = " + missing.string() +
                                    "\n[grid]\nn = 64\nbox_length = 16\n[initial]\nkind = field\nfile = " +
                                    (missing / "nope.vpf").string() + "\n");
  CHECK(run_quiet(ev) != 0);
  CHECK(read_json(missing / "error.json")["kind"] == "io");
}

TEST_CASE("reruns are byte-identical") {
  const auto run_once = [](const std::string& name) {
    const fs::path dir = fresh_dir(name);
    const RunConfig cfg = parse_config("command = diagnostics\noutput_dir = " + dir.string() +
                                       "\nseed = 3\n[grid]\nn = 64\nbox_length = 16\n[shape]\nspec = disk(0, 0, 1)\n"
                                       "[diagnostics]\nbump_count = 20\n");
    REQUIRE(run_quiet(cfg) == 0);
    return dir;
  };
  const fs::path a = run_once("rerun_a"), b = run_once("rerun_b");
  for (const char* f : {"diagnostics.json", "cone_mass.csv"}) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
    CHECK_FALSE(slurp(a / f).empty());
  }
}
