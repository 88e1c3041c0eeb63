#include "inertia/h2.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "inertia/errors.hpp"

namespace inertia {
namespace {

LyapunovSolver make_solver(const GridModel& grid, const StateSpace& ss) {
  return LyapunovSolver(ss.a, ss.null_mode(), ss.left_null_mode(grid));
}

}  // namespace

double trace_penalty_offset(const Eigen::MatrixXd& n_mat,
                            const Eigen::MatrixXd& laplacian) {
  const Eigen::Index n = laplacian.rows();
  if (n_mat.rows() != n || n_mat.cols() != n)
    throw ModelError("penalty and Laplacian dimensions disagree");
  const double n_scale = 1.0 + n_mat.norm();
  if ((n_mat - n_mat.transpose()).norm() > 1e-9 * n_scale)
    throw ModelError("angle penalty must be symmetric");
  if ((n_mat * Eigen::VectorXd::Ones(n)).norm() > 1e-7 * n_scale)
    throw ModelError("angle penalty must vanish on uniform shifts");
  if (!is_connected_laplacian(laplacian))
    throw ModelError("Laplacian must describe a connected graph");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(laplacian);
  if (eig.info() != Eigen::Success)
    throw NumericalError("Laplacian eigendecomposition failed",
                         std::numeric_limits<double>::quiet_NaN());
  const Eigen::VectorXd& vals = eig.eigenvalues();
  const double cutoff = 1e-10 * vals.cwiseAbs().maxCoeff();

  double total = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (vals(k) <= cutoff) continue;
    const Eigen::VectorXd v = eig.eigenvectors().col(k);
    total += v.dot(n_mat * v) / vals(k);
  }
  return total;
}

H2Evaluator::H2Evaluator(GridModel grid, PerformanceSpec spec)
    : grid_(std::move(grid)), spec_(std::move(spec)) {
  n_mat_ = spec_.angle_penalty_matrix(grid_);
  trace_offset_ = n_mat_.isZero(0.0)
                      ? 0.0
                      : trace_penalty_offset(n_mat_, grid_.laplacian());
}

Gramian H2Evaluator::gramian(const Eigen::VectorXd& m) const {
  const StateSpace ss = assemble_state_space(grid_, spec_, m);
  return make_solver(grid_, ss).solve(ss.output_gram());
}

double H2Evaluator::norm_squared(const Eigen::VectorXd& m) const {
  const Gramian g = gramian(m);
  const Eigen::VectorXd w = spec_.disturbance_diag(grid_);
  return (w.array() * g.freq_block().diagonal().array() /
          m.array().square())
      .sum();
}

H2Report H2Evaluator::report(const Eigen::VectorXd& m) const {
  const Gramian g = gramian(m);
  const Eigen::VectorXd w = spec_.disturbance_diag(grid_);

  H2Report rep;
  rep.per_bus =
      (w.array() * g.freq_block().diagonal().array() / m.array().square())
          .matrix();
  rep.norm_sq = rep.per_bus.sum();
  rep.trace_offset = trace_offset_;
  rep.gramian_residual = g.residual;

  const Eigen::VectorXd d = grid_.damping_vector();
  const Eigen::VectorXd s = spec_.freq_penalty_diag(grid_, m);
  const double shape = trace_offset_ + (s.array() / m.array()).sum();
  rep.w_min = w.minCoeff();
  rep.w_max = w.maxCoeff();
  rep.d_min = d.minCoeff();
  rep.d_max = d.maxCoeff();
  rep.lower_bound = rep.w_min / (2.0 * rep.d_max) * shape;
  rep.upper_bound = rep.w_max / (2.0 * rep.d_min) * shape;
  return rep;
}

H2Evaluator::Sensitivity H2Evaluator::sensitivity(
    const Eigen::VectorXd& m) const {
  const StateSpace ss = assemble_state_space(grid_, spec_, m);
  const LyapunovSolver solver = make_solver(grid_, ss);
  const Gramian base = solver.solve(ss.output_gram());

  const Eigen::Index n = grid_.size();
  const Eigen::VectorXd w = spec_.disturbance_diag(grid_);
  const Eigen::VectorXd d = grid_.damping_vector();
  const Eigen::MatrixXd& lap = grid_.laplacian();
  const bool s_tracks_m = spec_.allocation_dependent_s();
  const double c = spec_.kinetic_scale;

  Sensitivity out;
  out.node_cost =
      (base.freq_block().diagonal().array() / m.array().square()).matrix();
  out.value = w.dot(out.node_cost);
  out.cost_jacobian = Eigen::MatrixXd::Zero(n, n);

  for (Eigen::Index i = 0; i < n; ++i) {
    // d A / d m_i is a single nonzero row: the frequency row of bus i.
    Eigen::RowVectorXd a_row(2 * n);
    a_row.head(n) = lap.row(i) / (m(i) * m(i));
    a_row.tail(n).setZero();
    a_row(n + i) = d(i) / (m(i) * m(i));

    Eigen::MatrixXd q1 = base.p.col(n + i) * a_row;
    q1 = (q1 + q1.transpose()).eval();
    if (s_tracks_m) q1(n + i, n + i) += c;

    Gramian dir;
    try {
      dir = solver.solve(q1);
    } catch (const NumericalError& err) {
      throw NumericalError("gradient solve at coordinate " +
                               std::to_string(i) + ": " + err.what(),
                           err.residual());
    }
    out.cost_jacobian.col(i) =
        (dir.freq_block().diagonal().array() / m.array().square()).matrix();
    out.cost_jacobian(i, i) -= 2.0 * out.node_cost(i) / m(i);
  }
  out.grad = out.cost_jacobian.transpose() * w;
  return out;
}

Eigen::VectorXd H2Evaluator::gradient(const Eigen::VectorXd& m) const {
  return sensitivity(m).grad;
}

H2Report h2_norm_squared(const StateSpace& ss) {
  const Eigen::Index n = ss.n;
  const Eigen::VectorXd& m = ss.m;
  Eigen::VectorXd d(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i) = -ss.a(n + i, n + i) * m(i);
    const double root = ss.b(n + i, i) * m(i);
    w(i) = root * root;
  }
  const Eigen::MatrixXd q = ss.output_gram();
  const Eigen::MatrixXd n_mat = q.topLeftCorner(n, n);
  const Eigen::VectorXd s = q.bottomRightCorner(n, n).diagonal();
  Eigen::MatrixXd lap = -(m.asDiagonal() * ss.a.bottomLeftCorner(n, n));
  lap = 0.5 * (lap + lap.transpose()).eval();

  Eigen::VectorXd xi(2 * n);
  xi << d, m;
  const Gramian g = solve_constrained_lyapunov(ss.a, q, ss.null_mode(), xi);

  H2Report rep;
  rep.per_bus =
      (w.array() * g.freq_block().diagonal().array() / m.array().square())
          .matrix();
  rep.norm_sq = rep.per_bus.sum();
  rep.gramian_residual = g.residual;
  rep.trace_offset =
      n_mat.isZero(1e-14) ? 0.0 : trace_penalty_offset(n_mat, lap);
  const double shape = rep.trace_offset + (s.array() / m.array()).sum();
  rep.w_min = w.minCoeff();
  rep.w_max = w.maxCoeff();
  rep.d_min = d.minCoeff();
  rep.d_max = d.maxCoeff();
  rep.lower_bound = rep.w_min / (2.0 * rep.d_max) * shape;
  rep.upper_bound = rep.w_max / (2.0 * rep.d_min) * shape;
  return rep;
}

PerformanceBounds performance_bounds(const GridModel& grid,
                                     const PerformanceSpec& spec,
                                     const Eigen::VectorXd& m) {
  const H2Report rep = H2Evaluator(grid, spec).report(m);
  return {rep.lower_bound, rep.upper_bound};
}

Eigen::VectorXd gradient(const GridModel& grid, const PerformanceSpec& spec,
                         const Eigen::VectorXd& m) {
  return H2Evaluator(grid, spec).gradient(m);
}

Eigen::VectorXd finite_difference_gradient(const GridModel& grid,
                                           const PerformanceSpec& spec,
                                           const Eigen::VectorXd& m,
                                           double h) {
  if (!(h > 0.0) || !(h < 1.0))
    throw ModelError("finite-difference step must sit in (0, 1)");
  if (m.size() != grid.size())
    throw ModelError("allocation length must match the grid");
  if ((m.array() <= 0.0).any())
    throw ModelError("allocation must be strictly positive");

  const H2Evaluator eval(grid, spec);
  Eigen::VectorXd g(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double step = h * m(i);
    Eigen::VectorXd plus = m, minus = m;
    plus(i) += step;
    minus(i) -= step;
    g(i) = (eval.norm_squared(plus) - eval.norm_squared(minus)) / (2.0 * step);
  }
  return g;
}

}  // namespace inertia
