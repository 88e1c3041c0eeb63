#include "inertia/state_space.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "inertia/errors.hpp"

namespace inertia {

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& psd) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(psd);
  Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::MatrixXd PerformanceSpec::angle_penalty_matrix(const GridModel& grid) const {
  const int n = grid.size();
  switch (angle_mode) {
    case AnglePenalty::None:
      return Eigen::MatrixXd::Zero(n, n);
    case AnglePenalty::NetworkLaplacian:
      return grid.laplacian();
    case AnglePenalty::Average: {
      Eigen::MatrixXd mat = Eigen::MatrixXd::Identity(n, n);
      mat.array() -= 1.0 / n;
      return mat;
    }
    case AnglePenalty::ExplicitEdges: {
      std::vector<std::tuple<int, int, double>> indexed;
      indexed.reserve(angle_edges.size());
      for (const auto& edge : angle_edges) {
        indexed.emplace_back(grid.index_of(edge.from), grid.index_of(edge.to),
                             edge.weight);
      }
      return build_laplacian(indexed, n, /*require_connected=*/n > 1);
    }
  }
  throw ModelError("unknown angle penalty mode");
}

Eigen::VectorXd PerformanceSpec::freq_penalty_diag(const GridModel& grid,
                                                   const Eigen::VectorXd& m) const {
  switch (freq_mode) {
    case FreqPenalty::Explicit:
      return grid.freq_penalty_vector();
    case FreqPenalty::Damping:
      return grid.damping_vector();
    case FreqPenalty::KineticEnergy:
      if (kinetic_scale < 0.0) throw ModelError("kinetic penalty scale must be >= 0");
      return kinetic_scale * m;
  }
  throw ModelError("unknown frequency penalty mode");
}

Eigen::VectorXd PerformanceSpec::disturbance_diag(const GridModel& grid) const {
  Eigen::VectorXd w =
      disturbance.size() > 0 ? disturbance : grid.disturbance_vector();
  if (w.size() != grid.size()) {
    throw ModelError("disturbance vector has wrong length");
  }
  if (w.minCoeff() < 0.0) throw ModelError("disturbance weights must be >= 0");
  return w;
}

Eigen::VectorXd StateSpace::null_mode() const {
  Eigen::VectorXd v0 = Eigen::VectorXd::Zero(2 * n);
  v0.head(n).setOnes();
  return v0;
}

Eigen::VectorXd StateSpace::left_null_mode(const GridModel& grid) const {
  Eigen::VectorXd xi(2 * n);
  xi.head(n) = grid.damping_vector();
  xi.tail(n) = m;
  return xi;
}

StateSpace assemble_state_space(const GridModel& grid, const PerformanceSpec& spec,
                                const Eigen::VectorXd& m) {
  const int n = grid.size();
  if (m.size() != n) throw ModelError("allocation vector has wrong length");
  for (int i = 0; i < n; ++i) {
    if (!(m(i) > 0.0)) {
      throw ModelError("inertia m[" + std::to_string(grid.original_id(i)) +
                       "] must be > 0 (ill-posed model)");
    }
  }

  const Eigen::VectorXd inv_m = m.cwiseInverse();
  const Eigen::VectorXd d = grid.damping_vector();
  const Eigen::VectorXd w = spec.disturbance_diag(grid);
  const Eigen::VectorXd s = spec.freq_penalty_diag(grid, m);

  StateSpace ss;
  ss.n = n;
  ss.m = m;

  ss.a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  ss.a.topRightCorner(n, n).setIdentity();
  ss.a.bottomLeftCorner(n, n) = -(inv_m.asDiagonal() * grid.laplacian());
  ss.a.bottomRightCorner(n, n) = (-inv_m.cwiseProduct(d)).asDiagonal();

  ss.b = Eigen::MatrixXd::Zero(2 * n, n);
  ss.b.bottomRows(n) = inv_m.cwiseProduct(w.cwiseSqrt()).asDiagonal();

  ss.c = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  ss.c.topLeftCorner(n, n) = symmetric_sqrt(spec.angle_penalty_matrix(grid));
  ss.c.bottomRightCorner(n, n) = s.cwiseSqrt().asDiagonal();
  return ss;
}

}  // namespace inertia
