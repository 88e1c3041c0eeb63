#include "inertia/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "inertia/errors.hpp"

namespace inertia {
namespace {

Eigen::VectorXcd spectrum_values(const Eigen::MatrixXd& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigenvalue computation failed",
                         std::numeric_limits<double>::quiet_NaN());
  return es.eigenvalues();
}

// Largest eigenvalue magnitude and the slowest decay rate among the modes
// away from the structural zero.
void spectral_rates(const Eigen::MatrixXd& a, double* radius,
                    double* slowest_decay) {
  const Eigen::VectorXcd vals = spectrum_values(a);
  double rho = 0.0;
  for (Eigen::Index k = 0; k < vals.size(); ++k)
    rho = std::max(rho, std::abs(vals(k)));
  const double zero_tol = 1e-8 * (1.0 + rho);
  double sigma = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < vals.size(); ++k) {
    if (std::abs(vals(k)) <= zero_tol) continue;
    sigma = std::min(sigma, -vals(k).real());
  }
  if (radius) *radius = rho;
  if (slowest_decay) *slowest_decay = sigma;
}

void check_step(double dt, double radius) {
  if (!(dt > 0.0)) throw ModelError("time step must be positive");
  if (radius > 0.0 && dt > 0.1 / radius) {
    std::ostringstream msg;
    msg << "time step " << dt << " is too coarse for the fastest mode; use dt <= "
        << 0.1 / radius;
    throw ModelError(msg.str());
  }
}

}  // namespace

Trajectory impulse_response(const StateSpace& ss, int node, double strength,
                            double horizon, double dt) {
  const Eigen::Index n = ss.n;
  if (node < 0 || node >= n)
    throw ModelError("impulse node index out of range");
  if (!(horizon > 0.0)) throw ModelError("horizon must be positive");

  double radius = 0.0;
  spectral_rates(ss.a, &radius, nullptr);
  check_step(dt, radius);

  const auto steps = static_cast<Eigen::Index>(std::ceil(horizon / dt));
  const Eigen::Index samples = steps + 1;

  const Eigen::MatrixXd stepper = (ss.a * dt).exp();

  Trajectory traj;
  traj.time.resize(samples);
  traj.theta.resize(n, samples);
  traj.omega.resize(n, samples);
  traj.omega_dot.resize(n, samples);
  traj.input_node = node;
  traj.strength = strength;

  Eigen::VectorXd x = ss.b.col(node) * strength;
  for (Eigen::Index k = 0; k < samples; ++k) {
    traj.time(k) = static_cast<double>(k) * dt;
    traj.theta.col(k) = x.head(n);
    traj.omega.col(k) = x.tail(n);
    traj.omega_dot.col(k) = (ss.a * x).tail(n);
    if (k + 1 < samples) x = stepper * x;
  }
  return traj;
}

double h2_via_impulse(const StateSpace& ss, double horizon, double dt,
                      bool* horizon_ok) {
  if (!(horizon > 0.0)) throw ModelError("horizon must be positive");
  double radius = 0.0, sigma = 0.0;
  spectral_rates(ss.a, &radius, &sigma);
  check_step(dt, radius);

  Eigen::Index steps = static_cast<Eigen::Index>(std::ceil(horizon / dt));
  if (steps % 2 == 1) ++steps;  // Simpson needs an even interval count

  const Eigen::MatrixXd stepper = (ss.a * dt).exp();

  // X(t) = e^{At} B stacks every input channel; the integrand is the squared
  // Frobenius norm of C X(t).
  Eigen::MatrixXd x = ss.b;
  double sum = 0.0;
  double last = 0.0;
  for (Eigen::Index k = 0; k <= steps; ++k) {
    const double f = (ss.c * x).squaredNorm();
    double coeff = (k == 0 || k == steps) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    sum += coeff * f;
    last = f;
    if (k < steps) x = stepper * x;
  }
  const double energy = sum * dt / 3.0;

  // The integrand decays like exp(-2 sigma t) past the horizon.
  const double remaining =
      std::isfinite(sigma) && sigma > 0.0 ? last / (2.0 * sigma) : 0.0;
  if (horizon_ok)
    *horizon_ok = energy <= 0.0 || remaining < 1e-8 * energy;
  return energy;
}

double h2_via_impulse_auto(const StateSpace& ss, double dt,
                           double* horizon_used, bool* horizon_ok) {
  double sigma = 0.0;
  spectral_rates(ss.a, nullptr, &sigma);
  double horizon =
      std::isfinite(sigma) && sigma > 0.0 ? 10.0 / sigma : 10.0;
  horizon = std::max(horizon, 10.0 * dt);

  double value = 0.0;
  bool ok = false;
  for (int attempt = 0; attempt < 24 && !ok; ++attempt) {
    if (attempt > 0) horizon *= 2.0;
    value = h2_via_impulse(ss, horizon, dt, &ok);
  }
  if (horizon_used) *horizon_used = horizon;
  if (horizon_ok) *horizon_ok = ok;
  return value;
}

std::vector<SpectrumMode> eigen_spectrum(const StateSpace& ss) {
  const Eigen::VectorXcd vals = spectrum_values(ss.a);

  double rho = 0.0;
  for (Eigen::Index k = 0; k < vals.size(); ++k)
    rho = std::max(rho, std::abs(vals(k)));
  Eigen::Index zero_ix = 0;
  double zero_mag = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < vals.size(); ++k) {
    const double mag = std::abs(vals(k));
    if (mag < zero_mag) {
      zero_mag = mag;
      zero_ix = k;
    }
  }
  const bool tag_zero = zero_mag <= 1e-8 * (1.0 + rho);

  std::vector<SpectrumMode> modes;
  modes.reserve(static_cast<std::size_t>(vals.size()));
  for (Eigen::Index k = 0; k < vals.size(); ++k) {
    SpectrumMode mode;
    mode.value = vals(k);
    mode.structural_zero = tag_zero && k == zero_ix;
    const double mag = std::abs(vals(k));
    mode.damping_ratio =
        mode.structural_zero || mag == 0.0 ? 0.0 : -vals(k).real() / mag;
    modes.push_back(mode);
  }
  std::sort(modes.begin(), modes.end(),
            [](const SpectrumMode& a, const SpectrumMode& b) {
              if (a.value.real() != b.value.real())
                return a.value.real() < b.value.real();
              return a.value.imag() < b.value.imag();
            });
  return modes;
}

Eigen::MatrixXd control_effort(const Trajectory& traj,
                               const Eigen::VectorXd& m) {
  if (traj.omega_dot.size() == 0)
    throw ModelError("trajectory carries no acceleration samples");
  if (m.size() != traj.omega_dot.rows())
    throw ModelError("inertia vector length must match the trajectory");
  return m.asDiagonal() * traj.omega_dot;
}

}  // namespace inertia
