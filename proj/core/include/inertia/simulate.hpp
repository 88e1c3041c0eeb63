#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "inertia/state_space.hpp"

namespace inertia {

/// Sampled impulse response of the swing dynamics. One column per sample.
struct Trajectory {
  Eigen::VectorXd time;
  Eigen::MatrixXd theta;      ///< n x T angle deviations (rad)
  Eigen::MatrixXd omega;      ///< n x T frequency deviations (rad/s)
  Eigen::MatrixXd omega_dot;  ///< n x T accelerations, exact A-row evaluation
  int input_node = -1;        ///< retained-bus index the impulse entered at
  double strength = 0.0;
};

/// Exact-discretization replay of x' = A x from x(0) = B e_node * strength.
/// dt must resolve the fastest mode: dt <= 0.1 / max |eig(A)|.
Trajectory impulse_response(const StateSpace& ss, int node, double strength,
                            double horizon, double dt);

/// Sum over input nodes of the output energy integral on [0, horizon] by
/// Simpson quadrature on the exactly discretized response. Converges to the
/// squared H2 norm. *horizon_ok (when given) reports whether the estimated
/// tail is below 1e-8 of the accumulated energy.
double h2_via_impulse(const StateSpace& ss, double horizon, double dt,
                      bool* horizon_ok = nullptr);

/// Doubles the horizon until the tail criterion holds (or 24 doublings).
double h2_via_impulse_auto(const StateSpace& ss, double dt,
                           double* horizon_used = nullptr,
                           bool* horizon_ok = nullptr);

struct SpectrumMode {
  std::complex<double> value;
  double damping_ratio = 0.0;   ///< -Re / |lambda|; 0 for the tagged zero
  bool structural_zero = false;
};

/// All 2n eigenvalues of A, sorted by (Re, Im); the reference mode at the
/// origin is tagged.
std::vector<SpectrumMode> eigen_spectrum(const StateSpace& ss);

/// Per-bus control effort m_i * omega_dot_i(t), taken from the trajectory's
/// exact accelerations rather than numerical differencing.
Eigen::MatrixXd control_effort(const Trajectory& traj,
                               const Eigen::VectorXd& m);

}  // namespace inertia
