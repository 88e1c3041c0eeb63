#pragma once

#include <cstdint>
#include <string>

#include "inertia/scenario.hpp"

namespace inertia {

struct RunOptions {
  std::string out_dir = ".";
  std::uint64_t seed = 42;
  int sweep_points = 0;          ///< optimize: attach a disturbance sweep
  std::string gamma_grid;        ///< sparsity-path grid, "log:lo:hi:K"
  std::string variant_override;  ///< replaces the scenario's variant
};

/// Executes one study command against a loaded scenario. Writes results.json
/// (and the command's CSV exports) into out_dir and returns the results
/// document verbatim. Commands: evaluate, optimize, sweep, simulate,
/// spectrum, sparsity-path, robust.
///
/// The environment variable INERTIA_OPT_MAX_ITERS, when set, overrides the
/// solver iteration cap. Identical scenario + seed produce byte-identical
/// output; every floating value is printed with 12 significant digits.
std::string run(const Scenario& scenario, const std::string& command,
                const RunOptions& options = {});

}  // namespace inertia
