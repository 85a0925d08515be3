// vstretch: command-line front end. Everything except the SIMD backend comes
// from the config file so that committed configs reproduce a run exactly.

#include <CLI11.hpp>

#include <iostream>

#include "vstretch/config.hpp"
#include "vstretch/error.hpp"
#include "vstretch/run.hpp"
#include "vstretch/simd/kernels.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Self-similar profile solver and blow-up simulator for omega_t = (Z11 omega) omega"};
  std::string config_path;
  std::string simd = "auto";
  bool quiet = false;
  app.add_option("config", config_path, "Run configuration file")->required();
  app.add_option("--simd", simd, "Kernel variant: auto, scalar or avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));
  app.add_flag("-q,--quiet", quiet, "Suppress progress output");
  CLI11_PARSE(app, argc, argv);

  try {
    if (simd != "auto") vstretch::simd::select(vstretch::simd::parse_backend(simd));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  vstretch::RunConfig config;
  try {
    config = vstretch::load_config(config_path);
  } catch (const vstretch::Error& e) {
    std::cerr << "error [" << e.kind() << "]: " << e.what() << "\n";
    return 2;
  }

  std::ostream null_stream(nullptr);
  return vstretch::run(config, quiet ? null_stream : std::cerr);
}
