#include <doctest.h>

#include <Eigen/Dense>

#include "inertia/errors.hpp"
#include "inertia/grid.hpp"
#include "inertia/lyapunov.hpp"
#include "inertia/state_space.hpp"
#include "support/test_grids.hpp"

using inertia::assemble_state_space;
using inertia::Gramian;
using inertia::LyapunovSolver;
using inertia::solve_constrained_lyapunov;
using inertia::StateSpace;

namespace {

Gramian solve_for(const testgrids::Instance& inst) {
  const StateSpace ss = assemble_state_space(inst.grid, inst.spec, inst.m);
  return solve_constrained_lyapunov(ss.a, ss.output_gram(), ss.null_mode(),
                                    ss.left_null_mode(inst.grid));
}

}  // namespace

TEST_CASE("scalar primary-effort gramian is 1/2") {
  // Single machine, S = D = 1, N = 0, m = 1: the closed form gives X2 = 1/2
  // and an H2 contribution of w/2 per unit disturbance weight.
  inertia::Bus b;
  b.id = 1;
  b.damping = 1.0;
  b.inertia_floor = 1.0;
  b.inertia_cap = 1.0;
  b.disturbance_weight = 1.0;
  b.freq_penalty = 1.0;
  const auto grid = inertia::GridModel::build({b}, {});
  inertia::PerformanceSpec spec;
  spec.angle_mode = inertia::AnglePenalty::None;
  spec.freq_mode = inertia::FreqPenalty::Damping;
  const Eigen::VectorXd m = Eigen::VectorXd::Ones(1);
  const StateSpace ss = assemble_state_space(grid, spec, m);
  const Gramian gram = solve_constrained_lyapunov(
      ss.a, ss.output_gram(), ss.null_mode(), ss.left_null_mode(grid));
  CHECK(gram.freq_block()(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("primary-effort gramian is blkdiag(L, M)/2 exactly") {
  // With S = D and N = 0 the observability gramian has the closed form
  // P = (1/2) blkdiag(L, M) regardless of the allocation.
  testgrids::GenOptions opt;
  opt.angle = inertia::AnglePenalty::None;
  opt.freq = inertia::FreqPenalty::Damping;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto inst = testgrids::random_instance(seed, opt);
    const int n = inst.grid.size();
    const Gramian gram = solve_for(inst);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    expected.topLeftCorner(n, n) = 0.5 * inst.grid.laplacian();
    expected.bottomRightCorner(n, n) =
        0.5 * Eigen::MatrixXd(inst.m.asDiagonal());
    CHECK((gram.p - expected).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("residual and null constraint hold on random grids") {
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    const auto inst = testgrids::random_instance(seed);
    const StateSpace ss = assemble_state_space(inst.grid, inst.spec, inst.m);
    const Eigen::MatrixXd q = ss.output_gram();
    const Gramian gram = solve_constrained_lyapunov(
        ss.a, q, ss.null_mode(), ss.left_null_mode(inst.grid));

    const Eigen::MatrixXd res =
        gram.p * ss.a + ss.a.transpose() * gram.p + q;
    CHECK(res.norm() <= 1e-9 * (1.0 + q.norm()));
    CHECK((gram.p * ss.null_mode()).norm() <= 1e-9);
    CHECK((gram.p - gram.p.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(gram.residual <= 1e-9 * (1.0 + q.norm()));
    CHECK(gram.null_violation <= 1e-9);
  }
}

TEST_CASE("cross block is centered: 1^T X0 = 0") {
  // The deflation pins the free rank-one direction so that the theta-omega
  // block has zero column sums; this is what makes the trace identities hold.
  for (std::uint64_t seed = 200; seed < 220; ++seed) {
    const auto inst = testgrids::random_instance(seed);
    const Gramian gram = solve_for(inst);
    const Eigen::VectorXd colsums =
        gram.cross_block().colwise().sum().transpose();
    CHECK(colsums.cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("solver instance is reusable across right-hand sides") {
  const auto inst = testgrids::random_instance(7);
  const StateSpace ss = assemble_state_space(inst.grid, inst.spec, inst.m);
  const LyapunovSolver solver(ss.a, ss.null_mode(),
                              ss.left_null_mode(inst.grid));
  const int two_n = 2 * inst.grid.size();
  testgrids::Rng rng(99);
  for (int trial = 0; trial < 4; ++trial) {
    // Random symmetric q with q v0 = 0, built from the output structure.
    Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(two_n, two_n);
    for (int i = 0; i < two_n; ++i)
      for (int j = 0; j < two_n; ++j) raw(i, j) = rng.uniform(-1.0, 1.0);
    Eigen::MatrixXd sym = raw + raw.transpose();
    // Project out the null direction on both sides.
    const Eigen::VectorXd v0 = ss.null_mode();
    const Eigen::MatrixXd proj =
        Eigen::MatrixXd::Identity(two_n, two_n) -
        v0 * v0.transpose() / v0.squaredNorm();
    sym = (proj * sym * proj).eval();
    sym = 0.5 * (sym + sym.transpose()).eval();
    const Gramian gram = solver.solve(sym);
    const Eigen::MatrixXd res = gram.p * ss.a + ss.a.transpose() * gram.p + sym;
    CHECK(res.norm() <= 1e-8 * (1.0 + sym.norm()));
    CHECK((gram.p * v0).norm() <= 1e-8);
  }
}

TEST_CASE("defective pair is rejected with the residual attached") {
  // An A with a second zero eigenvalue whose null vector is not v0 breaks the
  // deflation assumption; the solver must refuse rather than return garbage.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a(0, 1) = 1.0;  // double integrator plus an extra floating state pair
  a(2, 3) = 1.0;
  Eigen::VectorXd v0 = Eigen::VectorXd::Zero(4);
  v0(0) = 1.0;
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(4, 4);
  q(0, 0) = 0.0;
  bool threw = false;
  try {
    solve_constrained_lyapunov(a, q, v0);
  } catch (const inertia::NumericalError& err) {
    threw = true;
    CHECK(err.residual() >= 0.0);
  } catch (const inertia::ModelError&) {
    threw = true;
  }
  CHECK(threw);
}
