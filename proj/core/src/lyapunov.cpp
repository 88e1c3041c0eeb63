#include "inertia/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "inertia/errors.hpp"

namespace inertia {
namespace {

constexpr double kResidualTol = 1e-9;
constexpr double kNullTol = 1e-9;

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

// Solves T^T Y + Y T = -Q for quasi-upper-triangular T by block forward
// substitution. `starts` lists the first index of each 1x1/2x2 diagonal block.
Eigen::MatrixXd solve_quasi_triangular(const Eigen::MatrixXd& t,
                                       const std::vector<int>& starts,
                                       const Eigen::MatrixXd& q) {
  const Eigen::Index m = t.rows();
  const int nb = static_cast<int>(starts.size());
  auto block_size = [&](int k) {
    const Eigen::Index next = (k + 1 < nb) ? starts[k + 1] : m;
    return static_cast<Eigen::Index>(next - starts[k]);
  };

  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(m, m);
  for (int j = 0; j < nb; ++j) {
    const Eigen::Index j0 = starts[j], nj = block_size(j);
    for (int i = 0; i < nb; ++i) {
      const Eigen::Index i0 = starts[i], ni = block_size(i);
      Eigen::MatrixXd rhs = -q.block(i0, j0, ni, nj);
      if (i0 > 0)
        rhs.noalias() -=
            t.block(0, i0, i0, ni).transpose() * y.block(0, j0, i0, nj);
      if (j0 > 0)
        rhs.noalias() -= y.block(i0, 0, ni, j0) * t.block(0, j0, j0, nj);

      const Eigen::MatrixXd tii = t.block(i0, i0, ni, ni);
      const Eigen::MatrixXd tjj = t.block(j0, j0, nj, nj);
      const Eigen::MatrixXd small =
          kron(Eigen::MatrixXd::Identity(nj, nj), tii.transpose()) +
          kron(tjj.transpose(), Eigen::MatrixXd::Identity(ni, ni));
      const Eigen::VectorXd vec_rhs =
          Eigen::Map<const Eigen::VectorXd>(rhs.data(), ni * nj);
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(small);
      const Eigen::VectorXd sol = lu.solve(vec_rhs);
      y.block(i0, j0, ni, nj) =
          Eigen::Map<const Eigen::MatrixXd>(sol.data(), ni, nj);
    }
  }
  return y;
}

double lyapunov_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q,
                         const Eigen::MatrixXd& p) {
  return (p * a + a.transpose() * p + q).norm();
}

}  // namespace

LyapunovSolver::LyapunovSolver(const Eigen::MatrixXd& a,
                               const Eigen::VectorXd& v0,
                               const Eigen::VectorXd& xi)
    : a_(a), v0_(v0), xi_(xi) {
  if (a.rows() != a.cols()) throw ModelError("state matrix must be square");
  if (v0.size() != a.rows() || xi.size() != a.rows())
    throw ModelError("null vectors must match the state dimension");

  const double scale = 1.0 + a.norm();
  if ((a * v0).norm() > 1e-8 * scale * v0.norm())
    throw ModelError("v0 is not a right null vector of the state matrix");
  if ((a.transpose() * xi).norm() > 1e-8 * scale * xi.norm())
    throw ModelError("xi is not a left null vector of the state matrix");

  const double coupling = xi.dot(v0);
  if (std::abs(coupling) < 1e-12 * xi.norm() * v0.norm())
    throw NumericalError("null modes are numerically orthogonal", coupling);

  // Deflate the structural zero: shift it to -theta where theta matches the
  // aggregate damping rate of the remaining dynamics, clamped to a sane range.
  const Eigen::Index n2 = a.rows();
  const Eigen::Index n = n2 / 2;
  double rate = 1.0;
  if (2 * n == n2) {
    const double total_d = xi.head(n).sum();
    const double total_m = xi.tail(n).sum();
    if (total_m > 0.0 && total_d > 0.0) rate = total_d / total_m;
  }
  theta_ = std::clamp(rate, 1e-3, 1e3);

  const Eigen::MatrixXd shifted =
      a - (theta_ / coupling) * (v0 * xi.transpose());
  Eigen::RealSchur<Eigen::MatrixXd> schur(shifted);
  if (schur.info() != Eigen::Success)
    throw NumericalError("Schur factorization of the state matrix failed",
                         std::numeric_limits<double>::quiet_NaN());
  schur_u_ = schur.matrixU();
  schur_t_ = schur.matrixT();

  block_starts_.clear();
  for (Eigen::Index k = 0; k < n2;) {
    block_starts_.push_back(static_cast<int>(k));
    const bool pair = (k + 1 < n2) && (schur_t_(k + 1, k) != 0.0);
    k += pair ? 2 : 1;
  }

  // The deflated matrix must be Hurwitz for the integral solution to exist.
  for (std::size_t b = 0; b < block_starts_.size(); ++b) {
    const Eigen::Index k = block_starts_[b];
    const Eigen::Index next =
        (b + 1 < block_starts_.size()) ? block_starts_[b + 1] : n2;
    double real_part;
    if (next - k == 1) {
      real_part = schur_t_(k, k);
    } else {
      real_part = 0.5 * (schur_t_(k, k) + schur_t_(k + 1, k + 1));
    }
    if (!(real_part < 0.0))
      throw NumericalError(
          "state matrix has modes outside the open left half-plane",
          real_part);
  }
}

Gramian LyapunovSolver::solve(const Eigen::MatrixXd& q) const {
  const Eigen::Index n2 = a_.rows();
  if (q.rows() != n2 || q.cols() != n2)
    throw ModelError("right-hand side must match the state dimension");
  const double q_scale = 1.0 + q.norm();
  if ((q - q.transpose()).norm() > 1e-9 * q_scale)
    throw ModelError("right-hand side must be symmetric");
  if ((q * v0_).norm() > 1e-7 * q_scale * v0_.norm())
    throw ModelError("right-hand side must annihilate the null mode");

  // P(shifted) = P(original) on the constrained family: with q v0 = 0 the
  // unique solution of the deflated equation already satisfies P v0 = 0.
  const Eigen::MatrixXd q_rot = schur_u_.transpose() * q * schur_u_;
  const Eigen::MatrixXd y = solve_quasi_triangular(schur_t_, block_starts_, q_rot);
  Eigen::MatrixXd p = schur_u_ * y * schur_u_.transpose();
  p = 0.5 * (p + p.transpose()).eval();

  // Numerical cleanup along the solution family P + tau * xi xi^T.
  const double coupling = xi_.dot(v0_);
  const double tau = -xi_.dot(p * v0_) / (xi_.squaredNorm() * coupling);
  p.noalias() += tau * (xi_ * xi_.transpose());
  p = 0.5 * (p + p.transpose()).eval();

  Gramian g;
  g.p = std::move(p);
  g.n = static_cast<int>(n2 / 2);
  g.tau = tau;
  g.residual = lyapunov_residual(a_, q, g.p);
  g.null_violation = (g.p * v0_).norm();

  if (g.null_violation > kNullTol) {
    // Stronger cleanup: project onto the complement of the null mode.
    const Eigen::MatrixXd proj =
        Eigen::MatrixXd::Identity(n2, n2) -
        (v0_ * xi_.transpose()) / coupling;
    g.p = (proj.transpose() * g.p * proj).eval();
    g.p = 0.5 * (g.p + g.p.transpose()).eval();
    g.residual = lyapunov_residual(a_, q, g.p);
    g.null_violation = (g.p * v0_).norm();
  }

  if (!(g.residual <= kResidualTol * q_scale))
    throw NumericalError("Lyapunov residual above tolerance", g.residual);
  if (!(g.null_violation <= kNullTol))
    throw NumericalError("Gramian does not annihilate the null mode",
                         g.null_violation);
  return g;
}

Gramian solve_constrained_lyapunov(const Eigen::MatrixXd& a,
                                   const Eigen::MatrixXd& q,
                                   const Eigen::VectorXd& v0,
                                   const Eigen::VectorXd& xi) {
  return LyapunovSolver(a, v0, xi).solve(q);
}

Gramian solve_constrained_lyapunov(const Eigen::MatrixXd& a,
                                   const Eigen::MatrixXd& q,
                                   const Eigen::VectorXd& v0) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a.transpose());
  lu.setThreshold(1e-10);
  const Eigen::MatrixXd kernel = lu.kernel();
  if (kernel.cols() != 1)
    throw ModelError("state matrix must carry exactly one zero mode");
  return LyapunovSolver(a, v0, kernel.col(0)).solve(q);
}

}  // namespace inertia
