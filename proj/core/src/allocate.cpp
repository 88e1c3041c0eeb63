#include "inertia/allocate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <utility>

#include "inertia/errors.hpp"

namespace inertia {
namespace {

double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void check_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
               double budget) {
  if (lo.size() != hi.size())
    throw ModelError("floor and cap vectors must have equal length");
  if ((lo.array() <= 0.0).any())
    throw ModelError("inertia floors must be strictly positive");
  for (Eigen::Index i = 0; i < lo.size(); ++i)
    if (lo(i) > hi(i))
      throw ModelError("inertia floor exceeds cap at index " +
                       std::to_string(i));
  if (!(budget > 0.0)) throw ModelError("inertia budget must be positive");
  const double slack = budget - lo.sum();
  if (slack < -1e-9 * std::max(1.0, budget)) {
    std::ostringstream msg;
    msg << "inertia floors alone need " << lo.sum()
        << " which exceeds the budget " << budget;
    throw InfeasibleError(msg.str());
  }
}

// Solves sum_i clamp(t * u_i, lo_i, hi_i) = budget for the level t by
// bisection, then makes the budget exact on the unclamped set. Entries with
// u_i = 0 stay at their floor. Returns the allocation; *attained reports
// whether the budget could be consumed (caps may prevent it).
Eigen::VectorXd scaled_level_fill(const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& lo,
                                  const Eigen::VectorXd& hi, double budget,
                                  bool* attained = nullptr) {
  const Eigen::Index n = u.size();
  auto level = [&](double t) {
    Eigen::VectorXd m(n);
    for (Eigen::Index i = 0; i < n; ++i)
      m(i) = std::clamp(t * u(i), lo(i), hi(i));
    return m;
  };

  if (attained) *attained = true;
  // Zero-weight entries never rise above their floor, capping what any level
  // can reach.
  double reachable = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) reachable += u(i) > 0.0 ? hi(i) : lo(i);
  if (reachable <= budget) {
    if (attained) *attained = reachable >= budget;
    Eigen::VectorXd m(n);
    for (Eigen::Index i = 0; i < n; ++i) m(i) = u(i) > 0.0 ? hi(i) : lo(i);
    return m;
  }
  if (budget <= lo.sum()) return lo;

  double t_hi = 1.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (u(i) > 0.0) t_hi = std::max(t_hi, hi(i) / u(i));
  t_hi *= 2.0;
  double t_lo = 0.0;

  for (int it = 0; it < 200; ++it) {
    const double t = 0.5 * (t_lo + t_hi);
    (level(t).sum() < budget ? t_lo : t_hi) = t;
  }

  double t = 0.5 * (t_lo + t_hi);
  Eigen::VectorXd m = level(t);
  // Exact polish: with the clamp pattern settled, the level is linear.
  for (int pass = 0; pass < 3; ++pass) {
    double fixed = 0.0, weight = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool free_i = u(i) > 0.0 && t * u(i) > lo(i) && t * u(i) < hi(i);
      if (free_i)
        weight += u(i);
      else
        fixed += std::clamp(t * u(i), lo(i), hi(i));
    }
    if (weight <= 0.0) break;
    const double t_new = (budget - fixed) / weight;
    if (!std::isfinite(t_new) || t_new <= 0.0) break;
    t = t_new;
    m = level(t);
    if (std::abs(m.sum() - budget) <= 1e-12 * std::max(1.0, budget)) break;
  }
  return m;
}

struct PgOutcome {
  Eigen::VectorXd m;
  Eigen::VectorXd grad;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

// Projected gradient descent with Barzilai-Borwein steps and an Armijo
// backtracking safeguard along the projection arc.
PgOutcome projected_gradient(
    const std::function<double(const Eigen::VectorXd&)>& value,
    const std::function<std::pair<double, Eigen::VectorXd>(
        const Eigen::VectorXd&)>& value_and_grad,
    const Eigen::VectorXd& start, const Eigen::VectorXd& lo,
    const Eigen::VectorXd& hi, double budget, int max_iters, double tol) {
  PgOutcome out;
  out.m = project_feasible(start, lo, hi, budget);
  std::pair<double, Eigen::VectorXd> fg = value_and_grad(out.m);
  double f = fg.first;
  Eigen::VectorXd g = fg.second;
  out.value = f;
  out.grad = g;

  Eigen::VectorXd prev_m, prev_g;
  for (int it = 0; it < max_iters; ++it) {
    out.residual = (out.m - project_feasible(out.m - g, lo, hi, budget)).norm();
    if (out.residual <= tol * (1.0 + g.norm())) {
      out.converged = true;
      break;
    }
    out.iterations = it + 1;

    double alpha = 1.0;
    if (prev_m.size() > 0) {
      const Eigen::VectorXd s = out.m - prev_m;
      const Eigen::VectorXd y = g - prev_g;
      const double sy = s.dot(y);
      if (sy > 1e-16 * s.norm() * y.norm())
        alpha = std::clamp(s.squaredNorm() / sy, 1e-12, 1e12);
    }

    bool accepted = false;
    Eigen::VectorXd cand;
    double f_cand = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      cand = project_feasible(out.m - alpha * g, lo, hi, budget);
      const Eigen::VectorXd step = cand - out.m;
      const double step_norm = step.norm();
      if (step_norm <= 1e-16 * (1.0 + out.m.norm())) break;
      f_cand = value(cand);
      if (f_cand <= f + 1e-4 * g.dot(step)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // stalled: residual above reflects the last state

    prev_m = out.m;
    prev_g = g;
    out.m = cand;
    fg = value_and_grad(out.m);
    f = fg.first;
    g = fg.second;
    out.value = f;
    out.grad = g;
  }
  out.residual = (out.m - project_feasible(out.m - g, lo, hi, budget)).norm();
  if (out.residual <= tol * (1.0 + g.norm())) out.converged = true;
  return out;
}

std::vector<Eigen::VectorXd> build_starts(const AllocationProblem& p,
                                          const SolverOptions& options) {
  const int want = std::max(1, options.multistarts);
  std::vector<Eigen::VectorXd> starts;
  if (options.initial && options.initial->size() == p.floor.size())
    starts.push_back(
        project_feasible(*options.initial, p.floor, p.cap, p.budget));
  starts.push_back(p.floor);
  starts.push_back(scaled_level_fill(Eigen::VectorXd::Ones(p.floor.size()),
                                     p.floor, p.cap, p.budget));
  starts.push_back(project_feasible(p.cap, p.floor, p.cap, p.budget));

  std::mt19937_64 rng(options.seed);
  while (static_cast<int>(starts.size()) < want) {
    Eigen::VectorXd r(p.floor.size());
    for (Eigen::Index i = 0; i < r.size(); ++i)
      r(i) = p.floor(i) + u01(rng) * (p.cap(i) - p.floor(i));
    starts.push_back(project_feasible(r, p.floor, p.cap, p.budget));
  }
  starts.resize(static_cast<std::size_t>(want), p.floor);
  return starts;
}

void fill_flags(AllocationResult& res, const AllocationProblem& p) {
  const Eigen::Index n = res.m_star.size();
  res.at_floor.assign(static_cast<std::size_t>(n), false);
  res.at_cap.assign(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double scale = std::max(1.0, p.cap(i));
    res.at_floor[static_cast<std::size_t>(i)] =
        res.m_star(i) - p.floor(i) <= 1e-9 * scale;
    res.at_cap[static_cast<std::size_t>(i)] =
        p.cap(i) - res.m_star(i) <= 1e-9 * scale;
  }
  res.budget_active =
      res.m_star.sum() >= p.budget - 1e-9 * std::max(1.0, p.budget);
}

AllocationResult degenerate_floor_result(const AllocationProblem& p,
                                         double objective) {
  AllocationResult res;
  res.m_star = p.floor;
  res.objective = objective;
  res.h2_norm_sq = objective;
  res.degenerate = true;
  res.converged = true;
  res.iterations = 0;
  res.first_order_residual = 0.0;
  fill_flags(res, p);
  return res;
}

void require_effort_form(const PerformanceSpec& spec, const char* who) {
  if (spec.angle_mode != AnglePenalty::None ||
      spec.freq_mode != FreqPenalty::Damping)
    throw ModelError(std::string(who) +
                     " needs the damping-shaped frequency penalty and no "
                     "angle penalty");
}

// Spread over the set where the water-fill stationarity should hold; a tiny
// value certifies the KKT system of the closed-form solvers.
double level_fill_residual(const Eigen::VectorXd& weights,
                           const Eigen::VectorXd& m, const Eigen::VectorXd& lo,
                           const Eigen::VectorXd& hi) {
  double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (weights(i) <= 0.0) continue;
    const double scale = std::max(1.0, hi(i));
    if (m(i) - lo(i) <= 1e-12 * scale || hi(i) - m(i) <= 1e-12 * scale)
      continue;
    const double ratio = m(i) / weights(i);
    mn = std::min(mn, ratio);
    mx = std::max(mx, ratio);
  }
  if (!std::isfinite(mn) || mx <= 0.0) return 0.0;
  return (mx - mn) / mx;
}

}  // namespace

AllocationProblem::AllocationProblem(GridModel g, PerformanceSpec s,
                                     double total_budget)
    : grid(std::move(g)),
      spec(std::move(s)),
      budget(total_budget),
      floor(grid.inertia_floor_vector()),
      cap(grid.inertia_cap_vector()) {
  check_box(floor, cap, budget);
}

Eigen::VectorXd project_feasible(const Eigen::VectorXd& m,
                                 const Eigen::VectorXd& lo,
                                 const Eigen::VectorXd& hi, double budget) {
  if (m.size() != lo.size() || m.size() != hi.size())
    throw ModelError("projection inputs must have equal length");
  check_box(lo, hi, budget);

  Eigen::VectorXd clipped = m.cwiseMax(lo).cwiseMin(hi);
  if (clipped.sum() <= budget + 1e-12 * std::max(1.0, budget)) return clipped;

  // Shift uniformly until the budget holds: the Euclidean projection onto the
  // box intersected with the budget plane.
  auto shifted = [&](double nu) {
    return (m.array() - nu).cwiseMax(lo.array()).cwiseMin(hi.array()).matrix();
  };
  double nu_lo = 0.0, nu_hi = (m - lo).maxCoeff() + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double nu = 0.5 * (nu_lo + nu_hi);
    (shifted(nu).sum() > budget ? nu_lo : nu_hi) = nu;
  }
  double nu = 0.5 * (nu_lo + nu_hi);
  Eigen::VectorXd proj = shifted(nu);

  for (int pass = 0; pass < 3; ++pass) {
    double fixed = 0.0;
    int free_count = 0;
    double free_sum = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double v = m(i) - nu;
      if (v > lo(i) && v < hi(i)) {
        ++free_count;
        free_sum += m(i);
      } else {
        fixed += std::clamp(v, lo(i), hi(i));
      }
    }
    if (free_count == 0) break;
    nu = (free_sum + fixed - budget) / free_count;
    proj = shifted(nu);
    if (std::abs(proj.sum() - budget) <= 1e-12 * std::max(1.0, budget)) break;
  }
  return proj;
}

AllocationResult solve_general(const AllocationProblem& problem,
                               const SolverOptions& options) {
  check_box(problem.floor, problem.cap, problem.budget);
  const Eigen::VectorXd w = problem.spec.disturbance_diag(problem.grid);
  if (w.maxCoeff() <= 0.0) return degenerate_floor_result(problem, 0.0);

  const H2Evaluator eval(problem.grid, problem.spec);
  auto value = [&](const Eigen::VectorXd& m) { return eval.norm_squared(m); };
  auto vg = [&](const Eigen::VectorXd& m) {
    const auto s = eval.sensitivity(m);
    return std::make_pair(s.value, s.grad);
  };

  PgOutcome best;
  bool have = false;
  for (const Eigen::VectorXd& start : build_starts(problem, options)) {
    const PgOutcome run =
        projected_gradient(value, vg, start, problem.floor, problem.cap,
                           problem.budget, options.max_iters, options.tol);
    if (!have || run.value < best.value) {
      best = run;
      have = true;
    }
  }

  AllocationResult res;
  res.m_star = best.m;
  res.objective = best.value;
  res.h2_norm_sq = best.value;
  res.converged = best.converged;
  res.iterations = best.iterations;
  res.projected_grad_norm = best.residual;
  res.first_order_residual = best.residual / (1.0 + best.grad.norm());
  fill_flags(res, problem);
  return res;
}

AllocationResult solve_primary_effort(const AllocationProblem& problem) {
  check_box(problem.floor, problem.cap, problem.budget);
  require_effort_form(problem.spec, "the effort-sharing solver");
  const Eigen::VectorXd w = problem.spec.disturbance_diag(problem.grid);
  if (w.maxCoeff() <= 0.0) return degenerate_floor_result(problem, 0.0);

  const Eigen::VectorXd u = w.cwiseSqrt();
  AllocationResult res;
  res.m_star =
      scaled_level_fill(u, problem.floor, problem.cap, problem.budget);
  res.objective = 0.5 * (w.array() / res.m_star.array()).sum();
  res.h2_norm_sq = res.objective;
  res.converged = true;
  res.iterations = 0;
  res.first_order_residual =
      level_fill_residual(u, res.m_star, problem.floor, problem.cap);
  res.projected_grad_norm = res.first_order_residual;
  fill_flags(res, problem);
  return res;
}

AllocationResult solve_uniform_ratio(const AllocationProblem& problem) {
  check_box(problem.floor, problem.cap, problem.budget);
  const Eigen::VectorXd w = problem.spec.disturbance_diag(problem.grid);
  const Eigen::VectorXd d = problem.grid.damping_vector();
  if (w.maxCoeff() <= 0.0) return degenerate_floor_result(problem, 0.0);

  // The proportional profile w = ratio * d must hold exactly for the
  // closed form to apply; report the worst offenders otherwise.
  const Eigen::VectorXd ratios = w.cwiseQuotient(d);
  Eigen::Index lo_ix = 0, hi_ix = 0;
  ratios.minCoeff(&lo_ix);
  ratios.maxCoeff(&hi_ix);
  const double ratio = w.sum() / d.sum();
  if (ratios(hi_ix) - ratios(lo_ix) > 1e-9 * ratio) {
    std::ostringstream msg;
    msg << "disturbance/damping ratio is not uniform: bus "
        << problem.grid.original_id(static_cast<int>(lo_ix)) << " has "
        << ratios(lo_ix) << " while bus "
        << problem.grid.original_id(static_cast<int>(hi_ix)) << " has "
        << ratios(hi_ix);
    throw ModelError(msg.str());
  }

  const H2Evaluator eval(problem.grid, problem.spec);
  const double offset = eval.trace_offset();
  const Eigen::Index n = problem.grid.size();

  if (problem.spec.allocation_dependent_s()) {
    // Kinetic-energy shaping: the objective is allocation independent.
    const double objective =
        0.5 * ratio *
        (problem.spec.kinetic_scale * static_cast<double>(n) + offset);
    return degenerate_floor_result(problem, objective);
  }

  const Eigen::VectorXd s = problem.spec.freq_penalty_diag(problem.grid,
                                                           problem.floor);
  AllocationResult res;
  if (s.maxCoeff() <= 0.0) {
    res = degenerate_floor_result(problem, 0.5 * ratio * offset);
    return res;
  }
  const Eigen::VectorXd u = s.cwiseSqrt();
  res.m_star =
      scaled_level_fill(u, problem.floor, problem.cap, problem.budget);
  res.objective =
      0.5 * ratio * ((s.array() / res.m_star.array()).sum() + offset);
  res.h2_norm_sq = res.objective;
  res.converged = true;
  res.iterations = 0;
  res.first_order_residual =
      level_fill_residual(u, res.m_star, problem.floor, problem.cap);
  res.projected_grad_norm = res.first_order_residual;
  fill_flags(res, problem);
  return res;
}

AllocationResult solve_sparse(const AllocationProblem& problem,
                              const SolverOptions& options) {
  check_box(problem.floor, problem.cap, problem.budget);
  if (problem.gamma < 0.0)
    throw ModelError("sparsity charge must be nonnegative");
  const Eigen::VectorXd w = problem.spec.disturbance_diag(problem.grid);
  if (w.maxCoeff() <= 0.0) {
    AllocationResult res = degenerate_floor_result(problem, 0.0);
    return res;
  }

  const H2Evaluator eval(problem.grid, problem.spec);
  const double gamma = problem.gamma;
  const Eigen::VectorXd& lo = problem.floor;
  auto value = [&](const Eigen::VectorXd& m) {
    return eval.norm_squared(m) + gamma * (m - lo).sum();
  };
  auto vg = [&](const Eigen::VectorXd& m) {
    const auto s = eval.sensitivity(m);
    return std::make_pair(s.value + gamma * (m - lo).sum(),
                          (s.grad.array() + gamma).matrix().eval());
  };

  PgOutcome best;
  bool have = false;
  for (const Eigen::VectorXd& start : build_starts(problem, options)) {
    const PgOutcome run =
        projected_gradient(value, vg, start, problem.floor, problem.cap,
                           problem.budget, options.max_iters, options.tol);
    if (!have || run.value < best.value) {
      best = run;
      have = true;
    }
  }

  AllocationResult res;
  res.m_star = best.m;
  res.objective = best.value;
  res.h2_norm_sq = eval.norm_squared(best.m);
  res.converged = best.converged;
  res.iterations = best.iterations;
  res.projected_grad_norm = best.residual;
  res.first_order_residual = best.residual / (1.0 + best.grad.norm());
  fill_flags(res, problem);
  for (Eigen::Index i = 0; i < res.m_star.size(); ++i)
    if (res.m_star(i) - lo(i) > 1e-6 * lo(i))
      res.support.push_back(problem.grid.original_id(static_cast<int>(i)));
  return res;
}

namespace {

// Newton refinement of the minimax optimum: equalize the active node costs
// at a common level while keeping the budget tight. Returns true when the
// refined point is accepted.
bool equalize_active_costs(const AllocationProblem& problem,
                           const H2Evaluator& eval, Eigen::VectorXd& m,
                           int max_steps, int* steps_taken) {
  const Eigen::Index n = m.size();
  const Eigen::VectorXd& lo = problem.floor;
  const Eigen::VectorXd& hi = problem.cap;

  auto costs = [&](const Eigen::VectorXd& x) {
    const Gramian g = eval.gramian(x);
    return (g.freq_block().diagonal().array() / x.array().square()).matrix()
        .eval();
  };

  const Eigen::VectorXd g0 = costs(m);
  const double before = g0.maxCoeff();
  std::vector<int> active;
  for (Eigen::Index k = 0; k < n; ++k)
    if (g0(k) >= before * (1.0 - 1e-3)) active.push_back(static_cast<int>(k));

  Eigen::VectorXd best_m = m;
  double best_val = before;
  int taken = 0;
  Eigen::VectorXd cur = m;
  for (int step = 0; step < max_steps; ++step) {
    const auto sens = eval.sensitivity(cur);
    const Eigen::VectorXd& g = sens.node_cost;

    std::vector<int> free_ix;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double scale = std::max(1.0, hi(i));
      if (cur(i) - lo(i) > 1e-9 * scale && hi(i) - cur(i) > 1e-9 * scale)
        free_ix.push_back(static_cast<int>(i));
    }
    if (free_ix.empty()) break;

    const int na = static_cast<int>(active.size());
    const int nf = static_cast<int>(free_ix.size());
    double t = 0.0;
    for (int k : active) t += g(k);
    t /= std::max(1, na);

    Eigen::VectorXd resid(na + 1);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(na + 1, nf + 1);
    for (int r = 0; r < na; ++r) {
      resid(r) = g(active[static_cast<std::size_t>(r)]) - t;
      for (int c = 0; c < nf; ++c)
        jac(r, c) = sens.cost_jacobian(active[static_cast<std::size_t>(r)],
                                       free_ix[static_cast<std::size_t>(c)]);
      jac(r, nf) = -1.0;
    }
    resid(na) = cur.sum() - problem.budget;
    for (int c = 0; c < nf; ++c) jac(na, c) = 1.0;

    if (resid.cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + std::abs(t))) break;
    ++taken;

    const Eigen::VectorXd delta =
        jac.completeOrthogonalDecomposition().solve(-resid);
    Eigen::VectorXd next = cur;
    double damp = 1.0;
    for (int c = 0; c < nf; ++c) {
      const int i = free_ix[static_cast<std::size_t>(c)];
      const double span = hi(i) - lo(i);
      if (std::abs(delta(c)) > 0.5 * span)
        damp = std::min(damp, 0.5 * span / std::abs(delta(c)));
    }
    for (int c = 0; c < nf; ++c) {
      const int i = free_ix[static_cast<std::size_t>(c)];
      next(i) = std::clamp(cur(i) + damp * delta(c), lo(i), hi(i));
    }
    next = project_feasible(next, lo, hi, problem.budget);

    const double val = costs(next).maxCoeff();
    if (val < best_val) {
      best_val = val;
      best_m = next;
    }
    if ((next - cur).norm() <= 1e-14 * (1.0 + cur.norm())) break;
    cur = next;
  }
  if (steps_taken) *steps_taken = taken;
  if (best_val <= before + 1e-12 * (1.0 + before)) {
    m = best_m;
    return true;
  }
  return false;
}

}  // namespace

AllocationResult solve_robust(const AllocationProblem& problem,
                              const SolverOptions& options) {
  check_box(problem.floor, problem.cap, problem.budget);
  if (!(problem.disturbance_budget > 0.0))
    throw ModelError("robust variants need a positive disturbance budget");
  const double wb = problem.disturbance_budget;

  const H2Evaluator eval(problem.grid, problem.spec);
  auto costs = [&](const Eigen::VectorXd& m) {
    const Gramian g = eval.gramian(m);
    return (g.freq_block().diagonal().array() / m.array().square()).matrix()
        .eval();
  };

  // Smooth the max with a softmax at increasing sharpness, then refine by
  // equalizing the active costs.
  Eigen::VectorXd m = scaled_level_fill(
      Eigen::VectorXd::Ones(problem.floor.size()), problem.floor, problem.cap,
      problem.budget);
  const double g_scale = std::max(costs(m).maxCoeff(),
                                  std::numeric_limits<double>::min());

  int total_iters = 0;
  bool last_converged = false;
  for (const double sharpness : {1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7}) {
    const double beta = sharpness / g_scale;
    auto smooth_value = [&](const Eigen::VectorXd& x) {
      const Eigen::VectorXd g = costs(x);
      const double top = g.maxCoeff();
      return wb * (top + std::log((beta * (g.array() - top)).exp().sum()) /
                             beta);
    };
    auto smooth_vg = [&](const Eigen::VectorXd& x) {
      const auto sens = eval.sensitivity(x);
      const Eigen::VectorXd& g = sens.node_cost;
      const double top = g.maxCoeff();
      Eigen::VectorXd p = (beta * (g.array() - top)).exp().matrix();
      const double z = p.sum();
      p /= z;
      const double val = wb * (top + std::log(z) / beta);
      const Eigen::VectorXd grad = wb * (sens.cost_jacobian.transpose() * p);
      return std::make_pair(val, grad);
    };
    const PgOutcome run = projected_gradient(
        smooth_value, smooth_vg, m, problem.floor, problem.cap, problem.budget,
        std::max(1, options.max_iters / 7), options.tol);
    m = run.m;
    total_iters += run.iterations;
    last_converged = run.converged;
  }

  int polish_steps = 0;
  const bool budget_tight =
      m.sum() >= problem.budget - 1e-9 * std::max(1.0, problem.budget);
  if (budget_tight)
    equalize_active_costs(problem, eval, m, 30, &polish_steps);
  total_iters += polish_steps;

  AllocationResult res;
  res.m_star = m;
  res.node_cost = costs(m);
  res.lambda = res.node_cost.maxCoeff();
  res.objective = wb * res.lambda;
  res.h2_norm_sq = res.objective;
  res.mu = Eigen::VectorXd::Constant(m.size(), res.lambda) - res.node_cost;

  // Report the adversary through the sharpest softmax weights; ties share
  // the budget evenly in the limit.
  const double beta = 1e7 / std::max(res.lambda, 1e-300);
  const Eigen::VectorXd p =
      (beta * (res.node_cost.array() - res.lambda)).exp().matrix();
  res.worst_w = wb * p / p.sum();

  // Equalization spread over the buses that are free and active.
  double spread = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double scale = std::max(1.0, problem.cap(i));
    const bool interior = m(i) - problem.floor(i) > 1e-7 * scale &&
                          problem.cap(i) - m(i) > 1e-7 * scale;
    if (interior && res.node_cost(i) >= res.lambda * (1.0 - 1e-3))
      spread = std::max(spread,
                        (res.lambda - res.node_cost(i)) / res.lambda);
  }
  res.first_order_residual = spread;
  res.projected_grad_norm = spread;
  res.converged = budget_tight ? spread <= 1e-6 : last_converged;

  // The smoothed stages stall well before their own residual certifies the
  // kink, so check nonsmooth first-order conditions directly when the budget
  // has slack. A unique worst bus must admit no feasible coordinate move
  // with negative directional derivative; several tied worst buses are the
  // equalized min-max signature, accepted at the same spread tolerance as
  // the budget-tight polish.
  if (!res.converged && !budget_tight) {
    std::vector<Eigen::Index> top;
    for (Eigen::Index i = 0; i < m.size(); ++i)
      if (res.node_cost(i) >= res.lambda * (1.0 - 1e-6)) top.push_back(i);
    if (top.size() == 1) {
      const Eigen::VectorXd grow =
          eval.sensitivity(m).cost_jacobian.row(static_cast<int>(top[0]));
      double rate = 0.0;
      for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double scale = std::max(1.0, problem.cap(i));
        if (problem.cap(i) - m(i) > 1e-9 * scale)
          rate += std::min(0.0, grow(i));
        if (m(i) - problem.floor(i) > 1e-9 * scale)
          rate += std::min(0.0, -grow(i));
      }
      res.converged = rate >= -1e-6 * (1.0 + res.lambda);
    } else {
      res.converged = spread <= 1e-6;
    }
  }
  res.iterations = total_iters;
  fill_flags(res, problem);
  return res;
}

AllocationResult solve_robust_primary(const AllocationProblem& problem) {
  check_box(problem.floor, problem.cap, problem.budget);
  require_effort_form(problem.spec, "the robust effort-sharing solver");
  if (!(problem.disturbance_budget > 0.0))
    throw ModelError("robust variants need a positive disturbance budget");
  const double wb = problem.disturbance_budget;

  // Worst case concentrates on the least-inertia bus, so the optimum raises
  // the lowest levels first: a valley fill.
  AllocationResult res;
  res.m_star = scaled_level_fill(Eigen::VectorXd::Ones(problem.floor.size()),
                                 problem.floor, problem.cap, problem.budget);
  res.node_cost = (0.5 / res.m_star.array()).matrix();
  res.lambda = res.node_cost.maxCoeff();
  res.objective = wb * res.lambda;
  res.h2_norm_sq = res.objective;
  res.mu = Eigen::VectorXd::Constant(res.m_star.size(), res.lambda) -
           res.node_cost;

  std::vector<int> ties;
  for (Eigen::Index i = 0; i < res.m_star.size(); ++i)
    if (res.node_cost(i) >= res.lambda * (1.0 - 1e-9))
      ties.push_back(static_cast<int>(i));
  res.worst_w = Eigen::VectorXd::Zero(res.m_star.size());
  for (int i : ties) res.worst_w(i) = wb / static_cast<double>(ties.size());

  res.converged = true;
  res.iterations = 0;
  res.first_order_residual = level_fill_residual(
      Eigen::VectorXd::Ones(res.m_star.size()), res.m_star, problem.floor,
      problem.cap);
  res.projected_grad_norm = res.first_order_residual;
  fill_flags(res, problem);
  return res;
}

AllocationResult solve_sparse(const AllocationProblem& problem, double gamma,
                              const SolverOptions& options) {
  AllocationProblem scoped = problem;
  scoped.gamma = gamma;
  return solve_sparse(scoped, options);
}

AllocationResult solve_robust(const AllocationProblem& problem,
                              double disturbance_budget,
                              const SolverOptions& options) {
  AllocationProblem scoped = problem;
  scoped.disturbance_budget = disturbance_budget;
  return solve_robust(scoped, options);
}

AllocationResult solve_robust_primary(const AllocationProblem& problem,
                                      double disturbance_budget) {
  AllocationProblem scoped = problem;
  scoped.disturbance_budget = disturbance_budget;
  return solve_robust_primary(scoped);
}

AllocationResult solve(const AllocationProblem& problem,
                       const SolverOptions& options) {
  switch (problem.variant) {
    case Variant::General:
      return solve_general(problem, options);
    case Variant::PrimaryEffort:
      return solve_primary_effort(problem);
    case Variant::UniformRatio:
      return solve_uniform_ratio(problem);
    case Variant::Sparse:
      return solve_sparse(problem, options);
    case Variant::Robust:
      return solve_robust(problem, options);
    case Variant::RobustPrimary:
      return solve_robust_primary(problem);
  }
  throw ModelError("unknown allocation variant");
}

HeuristicSet heuristic_allocations(const AllocationProblem& problem) {
  check_box(problem.floor, problem.cap, problem.budget);
  HeuristicSet set;
  set.no_add = problem.floor;
  set.uniform = scaled_level_fill(Eigen::VectorXd::Ones(problem.floor.size()),
                                  problem.floor, problem.cap, problem.budget);
  set.max_cap =
      project_feasible(problem.cap, problem.floor, problem.cap, problem.budget);
  return set;
}

}  // namespace inertia
