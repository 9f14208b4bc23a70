#include <CLI11.hpp>
#include <cstdlib>
#include <optional>
#include <string>

#include "contactlab/scene.hpp"

namespace {

std::optional<double> env_number(const char* name) {
  const char* raw = std::getenv(name);
  if (!raw || !*raw) return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(raw, &end);
  if (end == raw || *end != '\0') return std::nullopt;
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contactlab -- a workbench for contact forms, Reeb dynamics, Jacobi "
               "brackets, integrability checks and toric moment cones"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run the tasks of a scene file");
  std::string scene_path;
  std::string out_dir = "out";
  std::optional<long long> seed;
  std::optional<int> samples;
  std::optional<double> tol;
  run_cmd->add_option("scene", scene_path, "scene file to execute")->required();
  run_cmd->add_option("--out", out_dir, "output directory for reports and CSV files");
  run_cmd->add_option("--seed", seed, "override the scene's sampling seed");
  run_cmd->add_option("--samples", samples, "override the scene's sample count");
  run_cmd->add_option("--tol", tol, "override the default residual pass threshold");

  CLI11_PARSE(app, argc, argv);

  contactlab::scene::RunOverrides overrides;
  if (seed) overrides.seed = static_cast<std::uint64_t>(*seed);
  if (samples) {
    overrides.samples = *samples;
  } else if (auto env = env_number("CONTACTLAB_SAMPLES")) {
    overrides.samples = static_cast<int>(*env);
  }
  if (tol) {
    overrides.tol = *tol;
  } else if (auto env = env_number("CONTACTLAB_TOL")) {
    overrides.tol = *env;
  }
  return contactlab::scene::run(scene_path, out_dir, overrides);
}
