#pragma once

#include <Eigen/Dense>

#include "inertia/grid.hpp"
#include "inertia/lyapunov.hpp"
#include "inertia/state_space.hpp"

namespace inertia {

/// Everything a single H2 evaluation yields.
struct H2Report {
  double norm_sq = 0.0;             ///< squared H2 norm of the closed map
  double lower_bound = 0.0;         ///< (w_min / 2 d_max) * (tr(N L+) + sum s_i/m_i)
  double upper_bound = 0.0;         ///< (w_max / 2 d_min) * (tr(N L+) + sum s_i/m_i)
  double trace_offset = 0.0;        ///< tr(N L+), allocation independent
  double gramian_residual = 0.0;    ///< Lyapunov residual of the backing solve
  double w_min = 0.0, w_max = 0.0;  ///< disturbance extremes entering the bounds
  double d_min = 0.0, d_max = 0.0;  ///< damping extremes entering the bounds
  Eigen::VectorXd per_bus;          ///< w_i * X2_ii / m_i^2, sums to norm_sq
};

/// tr(N L+) for a PSD penalty N with N 1 = 0 and a connected Laplacian L.
/// The pseudoinverse drops eigenvalues below 1e-10 times the largest one.
double trace_penalty_offset(const Eigen::MatrixXd& n_mat,
                            const Eigen::MatrixXd& laplacian);

/// Evaluates the squared H2 norm and its inertia gradient for a fixed grid
/// and performance choice. One real Schur factorization per allocation is
/// shared by the base solve and all n directional solves.
class H2Evaluator {
 public:
  H2Evaluator(GridModel grid, PerformanceSpec spec);

  int size() const { return grid_.size(); }
  const GridModel& grid() const { return grid_; }
  const PerformanceSpec& spec() const { return spec_; }
  double trace_offset() const { return trace_offset_; }

  Gramian gramian(const Eigen::VectorXd& m) const;
  double norm_squared(const Eigen::VectorXd& m) const;
  H2Report report(const Eigen::VectorXd& m) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& m) const;

  /// Per-node costs g_k = X2_kk / m_k^2 (so norm_sq = w . g), their Jacobian
  /// d g_k / d m_i, and the gradient of w . g — all from one factorization.
  struct Sensitivity {
    double value = 0.0;
    Eigen::VectorXd node_cost;
    Eigen::VectorXd grad;
    Eigen::MatrixXd cost_jacobian;  ///< (k, i) entry holds d g_k / d m_i
  };
  Sensitivity sensitivity(const Eigen::VectorXd& m) const;

 private:
  GridModel grid_;
  PerformanceSpec spec_;
  Eigen::MatrixXd n_mat_;
  double trace_offset_ = 0.0;
};

/// Full report straight from an assembled system; the damping, disturbance,
/// and network data are recovered from the state-space blocks.
H2Report h2_norm_squared(const StateSpace& ss);

struct PerformanceBounds {
  double lower = 0.0;
  double upper = 0.0;
};
PerformanceBounds performance_bounds(const GridModel& grid,
                                     const PerformanceSpec& spec,
                                     const Eigen::VectorXd& m);

Eigen::VectorXd gradient(const GridModel& grid, const PerformanceSpec& spec,
                         const Eigen::VectorXd& m);

/// Central differences with per-coordinate step h * m_i; h must sit in (0, 1)
/// so that every probe keeps the inertia positive.
Eigen::VectorXd finite_difference_gradient(const GridModel& grid,
                                           const PerformanceSpec& spec,
                                           const Eigen::VectorXd& m,
                                           double h = 1e-5);

}  // namespace inertia
