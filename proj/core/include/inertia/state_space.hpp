#pragma once

#include <Eigen/Dense>
#include <vector>

#include "inertia/grid.hpp"

namespace inertia {

/// How the angle-difference penalty Laplacian N is chosen.
enum class AnglePenalty {
  None,              ///< N = 0 (primary-control-effort metric)
  NetworkLaplacian,  ///< N = L, short-range penalty on neighbours
  Average,           ///< N = I - 11^T/n, penalty against the grid average
  ExplicitEdges,     ///< N from a user-supplied weighted edge list
};

/// How the frequency penalty diagonal S is chosen.
enum class FreqPenalty {
  Explicit,       ///< S = diag(s_i) from the bus data
  Damping,        ///< S = D (primary-control-effort metric)
  KineticEnergy,  ///< S = c * M, follows the allocation
};

/// Output penalties (N, S) and disturbance profile (W) for the H2 metric.
/// S may depend on the allocation (KineticEnergy mode), so it is resolved
/// through freq_penalty_diag(grid, m).
struct PerformanceSpec {
  AnglePenalty angle_mode = AnglePenalty::NetworkLaplacian;
  std::vector<WeightedEdge> angle_edges;  // ExplicitEdges only, original ids
  FreqPenalty freq_mode = FreqPenalty::Explicit;
  double kinetic_scale = 0.0;  // c in S = c*M
  Eigen::VectorXd disturbance; // w >= 0; empty = take from bus data

  /// N over the retained buses. Validates connectivity of the a_ij graph
  /// for every mode except None.
  Eigen::MatrixXd angle_penalty_matrix(const GridModel& grid) const;
  /// Diagonal of S for allocation m.
  Eigen::VectorXd freq_penalty_diag(const GridModel& grid,
                                    const Eigen::VectorXd& m) const;
  /// Diagonal of W.
  Eigen::VectorXd disturbance_diag(const GridModel& grid) const;
  /// True when S tracks the allocation (S = c*M).
  bool allocation_dependent_s() const {
    return freq_mode == FreqPenalty::KineticEnergy;
  }
};

/// The LTI system (A, B, C):
///   A = [0 I; -M^-1 L  -M^-1 D],  B = [0; M^-1 W^1/2],
///   C = blkdiag(N^1/2, S^1/2)  with symmetric PSD square roots.
/// States are stacked [theta; omega]; inputs are the normalized disturbances.
struct StateSpace {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::MatrixXd c;
  int n = 0;             ///< bus count (state dimension is 2n)
  Eigen::VectorXd m;     ///< allocation used to build the system

  /// Right null vector of A: the uniform-angle reference mode.
  Eigen::VectorXd null_mode() const;
  /// Left null vector of A: xi = [D*1; M*1].
  Eigen::VectorXd left_null_mode(const GridModel& grid) const;
  /// C^T C, block-diagonal (N, S).
  Eigen::MatrixXd output_gram() const { return c.transpose() * c; }
};

/// Symmetric PSD square root via spectral decomposition (negative eigenvalues
/// from roundoff are clamped to zero).
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& psd);

/// Assembles the state space for allocation m. Rejects any m_i <= 0 (the
/// model is ill-posed there) and dimension mismatches.
StateSpace assemble_state_space(const GridModel& grid, const PerformanceSpec& spec,
                                const Eigen::VectorXd& m);

}  // namespace inertia
