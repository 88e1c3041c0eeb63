#pragma once

#include <vector>

#include <Eigen/Dense>

namespace inertia {

/// Solution of the constrained Lyapunov equation
///   P A + A^T P + Q = 0,   P v0 = 0,
/// where A has a single structural zero eigenvalue. Blocks follow the
/// [theta; omega] state ordering.
struct Gramian {
  Eigen::MatrixXd p;       ///< 2n x 2n symmetric solution
  int n = 0;               ///< block size
  double residual = 0.0;   ///< ||P A + A^T P + Q||_F after correction
  double null_violation = 0.0;  ///< ||P v0||
  double tau = 0.0;        ///< coefficient of the xi*xi^T correction applied

  Eigen::MatrixXd angle_block() const { return p.topLeftCorner(n, n); }        // X1
  Eigen::MatrixXd cross_block() const { return p.topRightCorner(n, n); }       // X0
  Eigen::MatrixXd freq_block() const { return p.bottomRightCorner(n, n); }     // X2
};

/// Dense Schur-based solver for the rank-deficient pair. The structural zero
/// of A (right null vector v0, left null vector xi) is deflated by a rank-one
/// spectral shift, so one real Schur factorization serves any number of
/// right-hand sides — the shape Algorithm-style gradient evaluation needs.
class LyapunovSolver {
 public:
  /// a must have exactly one zero eigenvalue with right/left null vectors
  /// v0 / xi and a stable remainder. xi^T v0 must be nonzero.
  LyapunovSolver(const Eigen::MatrixXd& a, const Eigen::VectorXd& v0,
                 const Eigen::VectorXd& xi);

  /// Solves for symmetric q with q v0 = 0. Throws NumericalError when the
  /// residual stays above 1e-9 * (1 + ||q||_F) or ||P v0|| above 1e-9.
  Gramian solve(const Eigen::MatrixXd& q) const;

  const Eigen::MatrixXd& matrix() const { return a_; }
  double shift() const { return theta_; }

 private:
  Eigen::MatrixXd a_;
  Eigen::VectorXd v0_, xi_;
  double theta_ = 0.0;
  Eigen::MatrixXd schur_u_, schur_t_;  // deflated A = U T U^T
  std::vector<int> block_starts_;      // quasi-triangular diagonal structure
};

/// One-shot variant; computes xi as the kernel of A^T when not supplied.
Gramian solve_constrained_lyapunov(const Eigen::MatrixXd& a,
                                   const Eigen::MatrixXd& q,
                                   const Eigen::VectorXd& v0);
Gramian solve_constrained_lyapunov(const Eigen::MatrixXd& a,
                                   const Eigen::MatrixXd& q,
                                   const Eigen::VectorXd& v0,
                                   const Eigen::VectorXd& xi);

}  // namespace inertia
