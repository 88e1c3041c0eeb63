#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "inertia/allocate.hpp"
#include "inertia/errors.hpp"
#include "inertia/grid.hpp"
#include "inertia/h2.hpp"
#include "support/test_grids.hpp"

using inertia::AllocationProblem;
using inertia::AllocationResult;
using inertia::AnglePenalty;
using inertia::Bus;
using inertia::FreqPenalty;
using inertia::GridModel;
using inertia::H2Evaluator;
using inertia::PerformanceSpec;
using inertia::project_feasible;
using inertia::SolverOptions;
using inertia::Variant;

namespace {

Bus bus(int id, double d, double lo, double hi, double w, double s = 1.0) {
  Bus b;
  b.id = id;
  b.damping = d;
  b.inertia_floor = lo;
  b.inertia_cap = hi;
  b.disturbance_weight = w;
  b.freq_penalty = s;
  return b;
}

inertia::WeightedEdge edge(int a, int b, double weight) {
  inertia::WeightedEdge e;
  e.from = a;
  e.to = b;
  e.weight = weight;
  return e;
}

PerformanceSpec effort_spec() {
  PerformanceSpec spec;
  spec.angle_mode = AnglePenalty::None;
  spec.freq_mode = FreqPenalty::Damping;
  return spec;
}

}  // namespace

TEST_CASE("projection: interior points are fixed, violations snap back") {
  const Eigen::Vector2d floor(0.5, 0.5), cap(20.0, 20.0);

  const Eigen::Vector2d interior(1.0, 1.2);
  CHECK((project_feasible(interior, floor, cap, 3.0) - interior).norm() <
        1e-12);

  // Only the budget is violated: the overshoot is shared equally.
  const Eigen::Vector2d heavy(10.0, 10.0);
  const Eigen::Vector2d projected = project_feasible(heavy, floor, cap, 3.0);
  CHECK(projected(0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(projected(1) == doctest::Approx(1.5).epsilon(1e-12));

  // Only the caps are violated.
  const Eigen::Vector2d tall(30.0, 30.0);
  const Eigen::Vector2d caps_hit =
      project_feasible(tall, Eigen::Vector2d(0.1, 0.1),
                       Eigen::Vector2d(2.0, 5.0), 100.0);
  CHECK(caps_hit(0) == doctest::Approx(2.0));
  CHECK(caps_hit(1) == doctest::Approx(5.0));
}

TEST_CASE("projection is idempotent and closest among feasible points") {
  testgrids::Rng rng(5);
  const int n = 4;
  Eigen::VectorXd floor(n), cap(n);
  for (int i = 0; i < n; ++i) {
    floor(i) = rng.uniform(0.2, 1.0);
    cap(i) = floor(i) + rng.uniform(0.5, 3.0);
  }
  const double budget = floor.sum() + 2.0;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = rng.uniform(-2.0, 8.0);
    const Eigen::VectorXd p = project_feasible(x, floor, cap, budget);
    CHECK((p - floor).minCoeff() >= -1e-10);
    CHECK((cap - p).minCoeff() >= -1e-10);
    CHECK(p.sum() <= budget + 1e-9);
    CHECK((project_feasible(p, floor, cap, budget) - p).norm() < 1e-9);

    // No feasible point sampled at random is closer to x than p.
    for (int probe = 0; probe < 20; ++probe) {
      Eigen::VectorXd y(n);
      for (int i = 0; i < n; ++i) y(i) = rng.uniform(floor(i), cap(i));
      if (y.sum() > budget) y = project_feasible(y, floor, cap, budget);
      CHECK((p - x).norm() <= (y - x).norm() + 1e-9);
    }
  }
}

TEST_CASE("effort water-fill follows the square-root rule") {
  // w = (1, 4), vanishing floors, budget 3: the optimum splits the budget in
  // proportion to sqrt(w), giving (1, 2).
  const GridModel g = GridModel::build(
      {bus(1, 1.0, 1e-9, 50.0, 1.0), bus(2, 1.0, 1e-9, 50.0, 4.0)},
      {edge(1, 2, 1.0)});
  AllocationProblem problem(g, effort_spec(), 3.0);
  problem.variant = Variant::PrimaryEffort;
  const AllocationResult res = inertia::solve_primary_effort(problem);
  CHECK(res.m_star(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.m_star(1) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(res.budget_active);
  CHECK(res.converged);
  CHECK(res.objective == doctest::Approx(0.5 * (1.0 / 1.0 + 4.0 / 2.0)));
}

TEST_CASE("single disturbed bus takes everything it can hold") {
  // Budget-limited branch.
  {
    const GridModel g = GridModel::build({bus(1, 1, 0.5, 40, 0.0),
                                          bus(2, 1, 0.5, 40, 3.0),
                                          bus(3, 1, 0.5, 40, 0.0)},
                                         {edge(1, 2, 1), edge(2, 3, 1)});
    AllocationProblem problem(g, effort_spec(), 6.0);
    const AllocationResult res = inertia::solve_primary_effort(problem);
    CHECK(res.m_star(0) == doctest::Approx(0.5));
    CHECK(res.m_star(1) == doctest::Approx(6.0 - 1.0));  // budget minus floors
    CHECK(res.m_star(2) == doctest::Approx(0.5));
  }
  // Cap-limited branch.
  {
    const GridModel g = GridModel::build({bus(1, 1, 0.5, 40, 0.0),
                                          bus(2, 1, 0.5, 2.0, 3.0),
                                          bus(3, 1, 0.5, 40, 0.0)},
                                         {edge(1, 2, 1), edge(2, 3, 1)});
    AllocationProblem problem(g, effort_spec(), 6.0);
    const AllocationResult res = inertia::solve_primary_effort(problem);
    CHECK(res.m_star(1) == doctest::Approx(2.0));
    CHECK_FALSE(res.budget_active);
  }
}

TEST_CASE("uniform weights and a loose box split the budget evenly") {
  const GridModel g = GridModel::build(
      {bus(1, 2, 0.2, 90, 1.0), bus(2, 1, 0.2, 90, 1.0),
       bus(3, 3, 0.2, 90, 1.0)},
      {edge(1, 2, 1), edge(2, 3, 2)});
  AllocationProblem problem(g, effort_spec(), 6.0);
  const AllocationResult res = inertia::solve_primary_effort(problem);
  for (int i = 0; i < 3; ++i)
    CHECK(res.m_star(i) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("zero disturbance degenerates to the floors") {
  const GridModel g = GridModel::build(
      {bus(1, 1, 0.4, 9, 0.0), bus(2, 1, 0.6, 9, 0.0)}, {edge(1, 2, 1)});
  AllocationProblem problem(g, effort_spec(), 5.0);
  const AllocationResult res = inertia::solve_primary_effort(problem);
  CHECK(res.degenerate);
  CHECK(res.m_star(0) == doctest::Approx(0.4));
  CHECK(res.m_star(1) == doctest::Approx(0.6));
}

TEST_CASE("budget beyond the caps parks every bus at its cap") {
  const GridModel g = GridModel::build(
      {bus(1, 1, 0.5, 2.0, 1.0), bus(2, 1, 0.5, 3.0, 2.0)}, {edge(1, 2, 1)});
  AllocationProblem problem(g, effort_spec(), 50.0);
  const AllocationResult res = inertia::solve_primary_effort(problem);
  CHECK(res.m_star(0) == doctest::Approx(2.0));
  CHECK(res.m_star(1) == doctest::Approx(3.0));
  CHECK_FALSE(res.budget_active);
  CHECK(res.at_cap[0]);
  CHECK(res.at_cap[1]);
}

TEST_CASE("uniform-ratio variant water-fills on sqrt(s)") {
  // w/d constant; s = (1, 1) with symmetric box splits evenly.
  const GridModel g = GridModel::build(
      {bus(1, 2.0, 0.3, 30, 1.0, 1.0), bus(2, 4.0, 0.3, 30, 2.0, 1.0)},
      {edge(1, 2, 1.5)});
  PerformanceSpec spec;  // network-Laplacian angle penalty, explicit s
  AllocationProblem problem(g, spec, 4.0);
  const AllocationResult res = inertia::solve_uniform_ratio(problem);
  CHECK(res.m_star(0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(res.m_star(1) == doctest::Approx(2.0).epsilon(1e-9));

  // The reported objective carries the exact constant offset.
  const H2Evaluator eval(g, spec);
  const double lambda = 0.5;  // w/d on both buses
  const double expected =
      0.5 * lambda * ((1.0 / 2.0 + 1.0 / 2.0) + eval.trace_offset());
  CHECK(res.objective == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("uniform-ratio rejects profiles that break the assumption") {
  const GridModel g = GridModel::build(
      {bus(1, 1.0, 0.3, 30, 1.0), bus(2, 2.0, 0.3, 30, 1.0)},
      {edge(1, 2, 1.0)});
  AllocationProblem problem(g, PerformanceSpec{}, 4.0);
  bool threw = false;
  try {
    inertia::solve_uniform_ratio(problem);
  } catch (const inertia::ModelError& err) {
    threw = true;
    const std::string what = err.what();
    CHECK(what.find("not uniform") != std::string::npos);
    CHECK(what.find("bus 1") != std::string::npos);
    CHECK(what.find("bus 2") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("general solver reproduces the effort water-fill") {
  testgrids::GenOptions opt;
  opt.n_max = 5;
  opt.angle = AnglePenalty::None;
  opt.freq = FreqPenalty::Damping;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto inst = testgrids::random_instance(seed, opt);
    AllocationProblem problem(inst.grid, inst.spec,
                              inst.grid.inertia_floor_vector().sum() + 2.5);
    const AllocationResult closed = inertia::solve_primary_effort(problem);
    const AllocationResult general = inertia::solve_general(problem);
    CHECK(general.converged);
    const double scale = std::max(1.0, std::abs(closed.objective));
    CHECK(std::abs(general.objective - closed.objective) <= 1e-6 * scale);
    CHECK((general.m_star - closed.m_star).cwiseAbs().maxCoeff() < 1e-3);
  }
}

TEST_CASE("general solver reproduces the uniform-ratio closed form") {
  testgrids::GenOptions opt;
  opt.n_max = 5;
  opt.scale_w_by_d = true;
  opt.lambda = 0.9;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto inst = testgrids::random_instance(seed, opt);
    AllocationProblem problem(inst.grid, inst.spec,
                              inst.grid.inertia_floor_vector().sum() + 2.0);
    const AllocationResult closed = inertia::solve_uniform_ratio(problem);
    const AllocationResult general = inertia::solve_general(problem);
    const double scale = std::max(1.0, std::abs(closed.objective));
    CHECK(std::abs(general.objective - closed.objective) <= 1e-6 * scale);
  }
}

TEST_CASE("coarse grid search never beats the water-fill") {
  const GridModel g = GridModel::build({bus(1, 1, 0.2, 3.0, 1.0),
                                        bus(2, 1, 0.2, 3.0, 0.6),
                                        bus(3, 1, 0.2, 3.0, 2.2)},
                                       {edge(1, 2, 1), edge(2, 3, 1)});
  AllocationProblem problem(g, effort_spec(), 3.6);
  const AllocationResult res = inertia::solve_primary_effort(problem);
  const Eigen::Vector3d w(1.0, 0.6, 2.2);

  double best = 1e99;
  for (double m1 = 0.2; m1 <= 3.0 + 1e-12; m1 += 0.01) {
    for (double m2 = 0.2; m2 <= 3.0 + 1e-12; m2 += 0.01) {
      const double m3 = 3.6 - m1 - m2;  // optimum exhausts the budget
      if (m3 < 0.2 - 1e-12 || m3 > 3.0 + 1e-12) continue;
      const double f = 0.5 * (w(0) / m1 + w(1) / m2 + w(2) / m3);
      best = std::min(best, f);
    }
  }
  CHECK(res.objective <= best + 1e-8);
}

TEST_CASE("symmetric two-area problems give symmetric optima") {
  const GridModel g = GridModel::build(
      {bus(1, 2.0, 0.2, 2.0, 1.0), bus(2, 2.0, 0.2, 2.0, 1.0)},
      {edge(1, 2, 1.0)});
  AllocationProblem problem(g, PerformanceSpec{}, 3.0);
  const AllocationResult res = inertia::solve_general(problem);
  CHECK(res.converged);
  CHECK(res.m_star(0) == doctest::Approx(res.m_star(1)).epsilon(1e-6));
}

TEST_CASE("allocation-independent instances are flagged degenerate") {
  // S = c M with a proportional disturbance: the objective is a constant.
  testgrids::GenOptions opt;
  opt.scale_w_by_d = true;
  opt.lambda = 1.1;
  opt.freq = FreqPenalty::KineticEnergy;
  opt.kinetic_c = 0.5;
  const auto inst = testgrids::random_instance(2, opt);
  AllocationProblem problem(inst.grid, inst.spec,
                            inst.grid.inertia_floor_vector().sum() + 3.0);
  const AllocationResult res = inertia::solve_uniform_ratio(problem);
  CHECK(res.degenerate);
  const H2Evaluator eval(inst.grid, inst.spec);
  const double expected =
      0.5 * 1.1 * (0.5 * inst.grid.size() + eval.trace_offset());
  CHECK(res.objective == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("sparse variant interpolates between general and no-add") {
  const GridModel g = GridModel::build({bus(1, 1.5, 0.4, 4.0, 1.0),
                                        bus(2, 2.0, 0.4, 4.0, 0.2),
                                        bus(3, 1.0, 0.4, 4.0, 1.4)},
                                       {edge(1, 2, 1), edge(2, 3, 2)});
  AllocationProblem problem(g, PerformanceSpec{}, 6.0);

  const AllocationResult free_run = inertia::solve_sparse(problem, 0.0);
  const AllocationResult general = inertia::solve_general(problem);
  const double scale = std::max(1.0, std::abs(general.objective));
  CHECK(std::abs(free_run.objective - general.objective) <= 1e-6 * scale);

  const AllocationResult frozen = inertia::solve_sparse(problem, 1e9);
  CHECK((frozen.m_star - g.inertia_floor_vector()).cwiseAbs().maxCoeff() <
        1e-9);
  CHECK(frozen.support.empty());
  for (int i = 0; i < 3; ++i) CHECK(frozen.at_floor[i]);
}

TEST_CASE("gamma must be nonnegative") {
  const GridModel g = GridModel::build(
      {bus(1, 1, 0.4, 4, 1.0), bus(2, 1, 0.4, 4, 1.0)}, {edge(1, 2, 1)});
  AllocationProblem problem(g, PerformanceSpec{}, 3.0);
  CHECK_THROWS_AS(inertia::solve_sparse(problem, -1.0), inertia::ModelError);
}

TEST_CASE("robust valley fill raises the lowest buses first") {
  const GridModel g = GridModel::build({bus(1, 1, 1.0, 100, 1.0),
                                        bus(2, 1, 2.0, 100, 1.0),
                                        bus(3, 1, 3.0, 100, 1.0)},
                                       {edge(1, 2, 1), edge(2, 3, 1)});
  AllocationProblem problem(g, effort_spec(), 9.0);
  problem.disturbance_budget = 1.0;
  const AllocationResult valley = inertia::solve_robust_primary(problem);
  for (int i = 0; i < 3; ++i)
    CHECK(valley.m_star(i) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(valley.lambda == doctest::Approx(1.0 / 6.0).epsilon(1e-9));

  // The iterative robust solver lands on the same point.
  const AllocationResult general = inertia::solve_robust(problem, 1.0);
  CHECK((general.m_star - valley.m_star).cwiseAbs().maxCoeff() < 1e-4);
  CHECK(general.objective ==
        doctest::Approx(valley.objective).epsilon(1e-4));
}

TEST_CASE("robust valley fill respects binding caps") {
  const GridModel g = GridModel::build(
      {bus(1, 1, 1.0, 1.5, 1.0), bus(2, 1, 1.0, 10.0, 1.0)},
      {edge(1, 2, 1)});
  AllocationProblem problem(g, effort_spec(), 6.0);
  problem.disturbance_budget = 2.0;
  const AllocationResult res = inertia::solve_robust_primary(problem);
  CHECK(res.m_star(0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(res.m_star(1) == doctest::Approx(4.5).epsilon(1e-12));
  CHECK(res.at_cap[0]);
}

TEST_CASE("robust valley fill with uniform floors stays uniform") {
  std::vector<Bus> buses;
  std::vector<inertia::WeightedEdge> edges;
  for (int i = 1; i <= 4; ++i) {
    buses.push_back(bus(i, 1.0, 2.0, 50.0, 1.0));
    if (i > 1) edges.push_back(edge(i - 1, i, 1.0));
  }
  AllocationProblem problem(GridModel::build(buses, edges), effort_spec(),
                            12.0);
  problem.disturbance_budget = 1.0;
  const AllocationResult res = inertia::solve_robust_primary(problem);
  for (int i = 0; i < 4; ++i)
    CHECK(res.m_star(i) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("robust optimum equalizes the exposed node costs") {
  const GridModel g = GridModel::build({bus(1, 1, 0.5, 20, 1.0),
                                        bus(2, 1, 0.5, 20, 1.0),
                                        bus(3, 1, 0.5, 20, 1.0)},
                                       {edge(1, 2, 1), edge(2, 3, 1)});
  AllocationProblem problem(g, effort_spec(), 7.0);
  const AllocationResult res = inertia::solve_robust(problem, 1.5);
  // Budget-tight effort case: every bus is raised off its floor, so all
  // node costs must sit at the common worst level.
  double lo = 1e99, hi = 0.0;
  for (int i = 0; i < 3; ++i) {
    CHECK(res.m_star(i) > 0.5 + 1e-6);
    lo = std::min(lo, res.node_cost(i));
    hi = std::max(hi, res.node_cost(i));
  }
  CHECK(hi - lo <= 1e-5 * hi);
  CHECK(res.lambda == doctest::Approx(hi).epsilon(1e-6));
  CHECK(res.objective == doctest::Approx(1.5 * res.lambda).epsilon(1e-9));
}

TEST_CASE("pinned dominant bus reduces the robust problem to a fixed vertex") {
  // Bus 2 is frozen at m = 0.5 while bus 1 stays above 1, so bus 2's node
  // cost 1/(2 m) dominates everywhere and the saddle sits at w = w_bdg e_2.
  const GridModel g = GridModel::build(
      {bus(1, 1, 1.0, 5.0, 1.0), bus(2, 1, 0.5, 0.5, 1.0)},
      {edge(1, 2, 1)});
  AllocationProblem robust_problem(g, effort_spec(), 4.0);
  const double w_bdg = 2.0;
  const AllocationResult robust = inertia::solve_robust(robust_problem, w_bdg);
  CHECK(robust.objective == doctest::Approx(w_bdg / (2.0 * 0.5)).epsilon(1e-6));
  CHECK(robust.worst_w(1) == doctest::Approx(w_bdg).epsilon(1e-6));

  PerformanceSpec vertex = effort_spec();
  vertex.disturbance = Eigen::Vector2d(0.0, w_bdg);
  AllocationProblem fixed(g, vertex, 4.0);
  const AllocationResult general = inertia::solve_general(fixed);
  CHECK(robust.objective ==
        doctest::Approx(general.objective).epsilon(1e-6));
}

TEST_CASE("robust value dominates any fixed disturbance") {
  const GridModel g = GridModel::build(
      {bus(1, 1.2, 0.5, 4.0, 1.0), bus(2, 0.8, 0.5, 4.0, 1.0)},
      {edge(1, 2, 1.3)});
  AllocationProblem problem(g, PerformanceSpec{}, 4.0);
  const double w_bdg = 1.0;
  const AllocationResult robust = inertia::solve_robust(problem, w_bdg);

  for (double share : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    PerformanceSpec fixed = problem.spec;
    fixed.disturbance = Eigen::Vector2d(share * w_bdg, (1.0 - share) * w_bdg);
    AllocationProblem fixed_problem(g, fixed, 4.0);
    const AllocationResult general = inertia::solve_general(fixed_problem);
    CHECK(robust.objective >= general.objective - 1e-6);
  }
}

TEST_CASE("robust saddle survives a coarse scan in both arguments") {
  const GridModel g = GridModel::build(
      {bus(1, 1.5, 0.5, 2.5, 1.0), bus(2, 0.9, 0.5, 2.5, 1.0)},
      {edge(1, 2, 1.0)});
  AllocationProblem problem(g, PerformanceSpec{}, 3.0);
  const double w_bdg = 1.0;
  const AllocationResult res = inertia::solve_robust(problem, w_bdg);
  const H2Evaluator eval(g, problem.spec);

  // Allocation side: no feasible m on the scan does better than m*.
  double scan_best = 1e99;
  for (double m1 = 0.5; m1 <= 2.5 + 1e-9; m1 += 0.02) {
    const double m2 = std::min(2.5, 3.0 - m1);
    if (m2 < 0.5 - 1e-12) continue;
    const Eigen::Vector2d m(m1, m2);
    const Eigen::VectorXd x2 =
        eval.gramian(m).freq_block().diagonal();
    const double worst =
        w_bdg * (x2.array() / m.array().square()).maxCoeff();
    scan_best = std::min(scan_best, worst);
  }
  CHECK(scan_best >= res.objective - 1e-5 * (1.0 + res.objective));

  // Disturbance side: the reported worst profile attains the value, and no
  // simplex vertex exceeds it.
  CHECK(res.worst_w.sum() == doctest::Approx(w_bdg).epsilon(1e-9));
  CHECK(res.worst_w.minCoeff() >= -1e-12);
  CHECK(res.worst_w.dot(res.node_cost) ==
        doctest::Approx(res.objective).epsilon(1e-6));
  for (int k = 0; k < 2; ++k)
    CHECK(w_bdg * res.node_cost(k) <= res.objective + 1e-7);
}

TEST_CASE("heuristic baselines have their textbook shapes") {
  std::vector<Bus> buses;
  std::vector<inertia::WeightedEdge> edges;
  for (int i = 1; i <= 5; ++i) {
    buses.push_back(bus(i, 1.0 + 0.1 * i, 2.0, 10.0, 1.0));
    if (i > 1) edges.push_back(edge(i - 1, i, 1.0));
  }
  AllocationProblem problem(GridModel::build(buses, edges), PerformanceSpec{},
                            15.0);  // floors sum to 10, headroom 5
  const auto set = inertia::heuristic_allocations(problem);

  for (int i = 0; i < 5; ++i) {
    CHECK(set.no_add(i) == doctest::Approx(2.0));
    CHECK(set.uniform(i) == doctest::Approx(3.0));  // one unit added each
    CHECK(set.max_cap(i) == doctest::Approx(3.0));  // caps drawn down evenly
  }
  CHECK(set.uniform.sum() <= 15.0 + 1e-9);
  CHECK(set.max_cap.sum() <= 15.0 + 1e-9);
}

TEST_CASE("optimal allocation is never worse than the baselines") {
  const auto inst = testgrids::random_instance(62);
  AllocationProblem problem(inst.grid, inst.spec,
                            inst.grid.inertia_floor_vector().sum() + 2.0);
  const AllocationResult res = inertia::solve_general(problem);
  const H2Evaluator eval(inst.grid, inst.spec);
  const auto set = inertia::heuristic_allocations(problem);
  const double slack = 1e-9 * (1.0 + std::abs(res.objective));
  CHECK(res.objective <= eval.norm_squared(set.no_add) + slack);
  CHECK(res.objective <= eval.norm_squared(set.uniform) + slack);
  CHECK(res.objective <= eval.norm_squared(set.max_cap) + slack);
}

TEST_CASE("floors exceeding the budget are infeasible") {
  const GridModel g = GridModel::build(
      {bus(1, 1, 2.0, 4.0, 1.0), bus(2, 1, 2.0, 4.0, 1.0)}, {edge(1, 2, 1)});
  CHECK_THROWS_AS(AllocationProblem(g, PerformanceSpec{}, 3.0),
                  inertia::InfeasibleError);
}

TEST_CASE("variant dispatch routes to the matching solver") {
  const GridModel g = GridModel::build(
      {bus(1, 1, 0.4, 4, 1.0), bus(2, 1, 0.4, 4, 4.0)}, {edge(1, 2, 1)});
  AllocationProblem problem(g, effort_spec(), 3.0);
  problem.variant = Variant::PrimaryEffort;
  const AllocationResult direct = inertia::solve_primary_effort(problem);
  const AllocationResult routed = inertia::solve(problem);
  CHECK((routed.m_star - direct.m_star).norm() < 1e-12);
}
