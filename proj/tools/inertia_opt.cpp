// Command-line front end: loads a scenario file, dispatches one study
// command, and prints the results document that was written to disk.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "inertia/errors.hpp"
#include "inertia/runner.hpp"
#include "inertia/scenario.hpp"

namespace {

int fail(const std::string& type, const std::string& message,
         const std::string& path = "") {
  nlohmann::ordered_json err;
  err["error"] = type;
  err["message"] = message;
  if (!path.empty()) err["path"] = path;
  std::cerr << err.dump() << std::endl;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "inertia-opt: coherency-optimal placement of virtual inertia in "
      "reduced power networks"};
  app.require_subcommand(1);

  std::string scenario_path;
  inertia::RunOptions options;
  std::uint64_t seed = 42;

  const std::vector<std::string> commands = {
      "evaluate", "optimize",      "sweep", "simulate",
      "spectrum", "sparsity-path", "robust"};
  const std::vector<std::string> help = {
      "H2 performance and closed-form bounds at the existing allocation",
      "solve the scenario's allocation variant",
      "two-bus disturbance sweep (w1 from 0 to 1)",
      "solve, replay the impulse response, compare control effort",
      "eigenvalue spectra of reference and optimal profiles",
      "support size and performance loss along a gamma grid",
      "worst-case disturbance allocation with duals"};

  for (size_t i = 0; i < commands.size(); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i], help[i]);
    sub->add_option("scenario", scenario_path, "scenario JSON file")
        ->required();
    sub->add_option("--out", options.out_dir, "output directory")
        ->capture_default_str();
    sub->add_option("--seed", seed, "multistart RNG seed")
        ->capture_default_str();
    sub->add_option("--sweep-w", options.sweep_points,
                    "attach a disturbance sweep with this many points");
    sub->add_option("--gamma-grid", options.gamma_grid,
                    "sparsity path grid, log:<lo>:<hi>:<count> or lin:...");
    sub->add_option("--variant", options.variant_override,
                    "override the scenario's problem variant");
  }

  CLI11_PARSE(app, argc, argv);
  options.seed = seed;
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    const inertia::Scenario scenario = inertia::load_scenario(scenario_path);
    std::cout << inertia::run(scenario, command, options);
    return 0;
  } catch (const inertia::ScenarioError& e) {
    return fail("scenario", e.what(), e.path());
  } catch (const inertia::InfeasibleError& e) {
    return fail("infeasible", e.what());
  } catch (const inertia::NumericalError& e) {
    return fail("numerical", e.what());
  } catch (const inertia::ModelError& e) {
    return fail("model", e.what());
  } catch (const inertia::Error& e) {
    return fail("error", e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
}
