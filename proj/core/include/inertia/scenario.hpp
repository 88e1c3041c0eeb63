#pragma once

#include <string>
#include <vector>

#include "inertia/allocate.hpp"
#include "inertia/grid.hpp"
#include "inertia/state_space.hpp"

namespace inertia {

/// How the disturbance covariance diagonal W is selected.
enum class DisturbanceMode {
  Explicit,   ///< per-bus disturbance fields
  Vector,     ///< explicit vector over the retained buses, file order
  Uniform,    ///< total mass split evenly over the retained buses
  Localized,  ///< all mass on one bus
};

struct ScenarioBus {
  int id = 0;
  double damping = 1.0;
  double inertia_min = 1.0;
  double inertia_max = -1.0;  ///< < 0 means "resolved to the budget"
  double disturbance = 0.0;
  double freq_penalty = 1.0;
  bool passive = false;
};

/// A fully parsed study description: grid, performance metric, allocation
/// problem, and simulation settings. The canonical serialized form is a
/// versioned JSON document (see the README for the schema).
struct Scenario {
  std::string schema = "inertia-opt-scenario/1";
  std::string name;
  std::vector<ScenarioBus> buses;
  std::vector<WeightedEdge> edges;  ///< original bus ids, susceptances

  AnglePenalty angle_mode = AnglePenalty::NetworkLaplacian;
  std::vector<WeightedEdge> angle_edges;  ///< "edges" angle mode only
  FreqPenalty freq_mode = FreqPenalty::Explicit;
  double kinetic_scale = 0.0;

  DisturbanceMode dist_mode = DisturbanceMode::Explicit;
  std::vector<double> dist_values;  ///< Vector mode
  double uniform_total = 1.0;       ///< Uniform mode
  int localized_bus = -1;           ///< Localized mode, original id
  double localized_strength = 1.0;

  Variant variant = Variant::General;
  double budget = 0.0;
  double gamma = 0.0;
  double disturbance_budget = 1.0;
  std::vector<Heuristic> heuristics;

  int impulse_bus = -1;          ///< original id; -1 = first retained bus
  double impulse_strength = 1.0;
  double sim_dt = 0.0;           ///< <= 0 means automatic
  double sim_horizon = 0.0;      ///< <= 0 means tail-criterion automatic

  /// Builds the reduced grid (validates and Kron-reduces).
  GridModel grid() const;
  /// Resolves the performance selectors against the reduced grid.
  PerformanceSpec performance(const GridModel& grid) const;
  /// Assembles the allocation problem (grid + performance + budget block).
  AllocationProblem problem(const GridModel& grid) const;
};

/// Parses and validates a scenario file. Parse failures carry line/column;
/// semantic failures carry the offending field path.
Scenario load_scenario(const std::string& path);

/// Same, from an in-memory document; `origin` labels error messages.
Scenario parse_scenario_text(const std::string& text,
                             const std::string& origin = "<input>");

/// Canonical serialized form with every default resolved. Loading the
/// output reproduces the same scenario (normalization is a fixed point).
std::string normalized_scenario_text(const Scenario& scenario);

void save_scenario(const Scenario& scenario, const std::string& path);

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);
std::string to_string(Heuristic h);
Heuristic heuristic_from_string(const std::string& s);

}  // namespace inertia
