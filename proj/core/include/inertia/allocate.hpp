#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "inertia/grid.hpp"
#include "inertia/h2.hpp"
#include "inertia/state_space.hpp"

namespace inertia {

enum class Variant {
  General,        ///< projected gradient on the full H2 objective
  PrimaryEffort,  ///< closed-form water-fill (damping-shaped penalty, no angle term)
  UniformRatio,   ///< proportional disturbance/damping profile, water-fill
  Sparse,         ///< H2 objective plus an L1 charge on inertia additions
  Robust,         ///< worst-case disturbance over a simplex of given budget
  RobustPrimary   ///< robust variant of the water-fill case (valley fill)
};

enum class Heuristic { NoAdd, Uniform, MaxCap };

struct AllocationProblem {
  GridModel grid;
  PerformanceSpec spec;
  double budget = 0.0;         ///< cap on the total allocated inertia
  Variant variant = Variant::General;
  double gamma = 0.0;          ///< sparsity charge per unit of added inertia
  double disturbance_budget = 0.0;  ///< robust variants: total adversarial energy
  std::vector<Heuristic> heuristics;  ///< baselines to report alongside

  Eigen::VectorXd floor;  ///< per-bus lower limits (defaults to the grid's)
  Eigen::VectorXd cap;    ///< per-bus upper limits (defaults to the grid's)

  AllocationProblem(GridModel g, PerformanceSpec s, double total_budget);
};

struct SolverOptions {
  int max_iters = 5000;
  int multistarts = 5;
  std::uint64_t seed = 42;
  double tol = 1e-7;  ///< first-order stopping scale
  std::optional<Eigen::VectorXd> initial;  ///< extra warm start, tried first
};

struct AllocationResult {
  Eigen::VectorXd m_star;
  double objective = 0.0;    ///< variant objective (charges included)
  double h2_norm_sq = 0.0;   ///< plain squared H2 value at m_star
  bool budget_active = false;
  std::vector<bool> at_floor, at_cap;
  bool degenerate = false;   ///< objective did not depend on the allocation
  bool converged = false;
  int iterations = 0;
  double projected_grad_norm = 0.0;   ///< ||m - Proj(m - grad)|| at m_star
  double first_order_residual = 0.0;  ///< the same, scaled by 1 + ||grad||

  // Robust variants only.
  double lambda = 0.0;            ///< worst per-unit node cost at the optimum
  Eigen::VectorXd node_cost;      ///< g_k = X2_kk / m_k^2
  Eigen::VectorXd mu;             ///< slack duals, lambda - g_k
  Eigen::VectorXd worst_w;        ///< maximizing disturbance profile

  // Sparse variant only.
  std::vector<int> support;       ///< buses holding inertia above their floor
};

/// Euclidean projection onto { floor <= m <= cap, sum m <= budget }.
Eigen::VectorXd project_feasible(const Eigen::VectorXd& m,
                                 const Eigen::VectorXd& floor,
                                 const Eigen::VectorXd& cap, double budget);

AllocationResult solve_general(const AllocationProblem& problem,
                               const SolverOptions& options = {});
AllocationResult solve_primary_effort(const AllocationProblem& problem);
AllocationResult solve_uniform_ratio(const AllocationProblem& problem);
AllocationResult solve_sparse(const AllocationProblem& problem, double gamma,
                              const SolverOptions& options = {});
AllocationResult solve_sparse(const AllocationProblem& problem,
                              const SolverOptions& options = {});
AllocationResult solve_robust(const AllocationProblem& problem,
                              double disturbance_budget,
                              const SolverOptions& options = {});
AllocationResult solve_robust(const AllocationProblem& problem,
                              const SolverOptions& options = {});
AllocationResult solve_robust_primary(const AllocationProblem& problem,
                                      double disturbance_budget);
AllocationResult solve_robust_primary(const AllocationProblem& problem);

/// Dispatch on problem.variant.
AllocationResult solve(const AllocationProblem& problem,
                       const SolverOptions& options = {});

/// Reference allocations the case studies compare against.
struct HeuristicSet {
  Eigen::VectorXd no_add;   ///< floors only
  Eigen::VectorXd uniform;  ///< common level, clipped to the box, budget-tight
  Eigen::VectorXd max_cap;  ///< caps, drawn down uniformly if over budget
};
HeuristicSet heuristic_allocations(const AllocationProblem& problem);

}  // namespace inertia
