#include "inertia/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "inertia/allocate.hpp"
#include "inertia/errors.hpp"
#include "inertia/h2.hpp"
#include "inertia/simulate.hpp"
#include "inertia/state_space.hpp"

namespace inertia {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// Everything numeric in the emitted artifacts goes through a 12-significant-
// digit round so that reruns are byte-identical across platforms.
double r12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

std::string fmt12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot write " + path.string());
  out << text;
}

ordered_json by_bus(const GridModel& g, const Eigen::VectorXd& v) {
  ordered_json obj;
  for (int i = 0; i < g.size(); ++i)
    obj[std::to_string(g.original_id(i))] = r12(v(i));
  return obj;
}

ordered_json ids_where(const GridModel& g, const std::vector<bool>& mask) {
  ordered_json arr = ordered_json::array();
  for (int i = 0; i < g.size(); ++i)
    if (mask[static_cast<size_t>(i)]) arr.push_back(g.original_id(i));
  return arr;
}

int max_iters_override(int fallback) {
  const char* env = std::getenv("INERTIA_OPT_MAX_ITERS");
  if (env == nullptr || *env == '\0') return fallback;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v <= 0)
    throw ScenarioError("INERTIA_OPT_MAX_ITERS must be a positive integer",
                        "environment");
  return static_cast<int>(std::min<long>(v, 1000000));
}

bool robust_variant(Variant v) {
  return v == Variant::Robust || v == Variant::RobustPrimary;
}

/// The variant's objective functional at an arbitrary feasible allocation,
/// used to score the reference heuristics on equal footing.
double objective_at(const AllocationProblem& p, const H2Evaluator& eval,
                    const Eigen::VectorXd& m) {
  switch (p.variant) {
    case Variant::General:
    case Variant::PrimaryEffort:
    case Variant::UniformRatio:
      return eval.norm_squared(m);
    case Variant::Sparse:
      return eval.norm_squared(m) + p.gamma * (m - p.floor).sum();
    case Variant::Robust: {
      const Gramian gram = eval.gramian(m);
      const Eigen::VectorXd cost =
          (gram.freq_block().diagonal().array() / m.array().square()).matrix();
      return p.disturbance_budget * cost.maxCoeff();
    }
    case Variant::RobustPrimary:
      return p.disturbance_budget * 0.5 / m.minCoeff();
  }
  throw ModelError("unknown variant");
}

ordered_json solution_json(const AllocationProblem& p, const GridModel& g,
                           const AllocationResult& res) {
  ordered_json obj;
  obj["allocation"] = by_bus(g, res.m_star);
  obj["objective"] = r12(res.objective);
  obj["h2_norm_sq"] = r12(res.h2_norm_sq);
  obj["budget"] = r12(p.budget);
  obj["budget_used"] = r12(res.m_star.sum());
  obj["budget_active"] = res.budget_active;
  obj["converged"] = res.converged;
  obj["iterations"] = res.iterations;
  obj["projected_grad_norm"] = r12(res.projected_grad_norm);
  obj["first_order_residual"] = r12(res.first_order_residual);
  obj["degenerate"] = res.degenerate;
  obj["at_floor"] = ids_where(g, res.at_floor);
  obj["at_cap"] = ids_where(g, res.at_cap);
  if (robust_variant(p.variant)) {
    ordered_json duals;
    duals["lambda"] = r12(res.lambda);
    duals["node_cost"] = by_bus(g, res.node_cost);
    duals["mu"] = by_bus(g, res.mu);
    duals["worst_w"] = by_bus(g, res.worst_w);
    obj["duals"] = duals;
  }
  if (p.variant == Variant::Sparse) {
    obj["support"] = res.support;
    obj["support_size"] = res.support.size();
  }
  return obj;
}

ordered_json heuristics_json(const AllocationProblem& p, const GridModel& g,
                             const H2Evaluator& eval, double opt_objective,
                             bool* not_worse) {
  const HeuristicSet set = heuristic_allocations(p);
  ordered_json arr = ordered_json::array();
  bool ok = true;
  for (const Heuristic h : p.heuristics) {
    const Eigen::VectorXd& m = h == Heuristic::NoAdd    ? set.no_add
                               : h == Heuristic::Uniform ? set.uniform
                                                         : set.max_cap;
    const double f = objective_at(p, eval, m);
    ordered_json item;
    item["name"] = to_string(h);
    item["allocation"] = by_bus(g, m);
    item["objective"] = r12(f);
    arr.push_back(item);
    if (opt_objective > f + 1e-9 * (1.0 + std::abs(f))) ok = false;
  }
  if (not_worse != nullptr) *not_worse = ok;
  return arr;
}

SolverOptions base_options(const RunOptions& ropt) {
  SolverOptions sopt;
  sopt.seed = ropt.seed;
  sopt.max_iters = max_iters_override(sopt.max_iters);
  return sopt;
}

struct SpectralRates {
  double radius = 0.0;   ///< max |lambda|
  double slowest = 0.0;  ///< min -Re(lambda) over the decaying modes
};

SpectralRates spectral_rates(const std::vector<SpectrumMode>& modes) {
  SpectralRates r;
  r.slowest = std::numeric_limits<double>::infinity();
  for (const SpectrumMode& mode : modes) {
    r.radius = std::max(r.radius, std::abs(mode.value));
    if (!mode.structural_zero)
      r.slowest = std::min(r.slowest, -mode.value.real());
  }
  if (!std::isfinite(r.slowest) || r.slowest <= 0.0) r.slowest = 1e-6;
  if (r.radius <= 0.0) r.radius = 1.0;
  return r;
}

int default_input_index(const Scenario& sc, const GridModel& g,
                        const PerformanceSpec& spec) {
  if (sc.impulse_bus >= 0) return g.index_of(sc.impulse_bus);
  const Eigen::VectorXd w = spec.disturbance.size() > 0
                                ? spec.disturbance
                                : g.disturbance_vector();
  int best = 0;
  for (int i = 1; i < g.size(); ++i)
    if (w(i) > w(best)) best = i;
  return best;
}

double trapezoid_l2_sq(const Eigen::MatrixXd& signal, double dt) {
  const Eigen::Index cols = signal.cols();
  if (cols < 2) return 0.0;
  double sum = 0.0;
  for (Eigen::Index t = 0; t < cols; ++t) {
    const double w = (t == 0 || t == cols - 1) ? 0.5 : 1.0;
    sum += w * signal.col(t).squaredNorm();
  }
  return sum * dt;
}

std::vector<double> parse_gamma_grid(const std::string& spec_text) {
  const std::string text = spec_text.empty() ? "log:1e-6:1e-3:25" : spec_text;
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 4 || (parts[0] != "log" && parts[0] != "lin"))
    throw ScenarioError("expected log:<lo>:<hi>:<count> or lin:<lo>:<hi>:<count>",
                        "--gamma-grid");
  double lo = 0.0, hi = 0.0;
  long count = 0;
  try {
    lo = std::stod(parts[1]);
    hi = std::stod(parts[2]);
    count = std::stol(parts[3]);
  } catch (const std::exception&) {
    throw ScenarioError("malformed number in '" + text + "'", "--gamma-grid");
  }
  if (count < 2 || !(lo <= hi) || (parts[0] == "log" && !(lo > 0.0)))
    throw ScenarioError("need count >= 2 and 0 < lo <= hi (lo may be 0 for lin)",
                        "--gamma-grid");
  std::vector<double> grid(static_cast<size_t>(count));
  for (long k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(count - 1);
    grid[static_cast<size_t>(k)] =
        parts[0] == "log" ? lo * std::pow(hi / lo, t) : lo + t * (hi - lo);
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Command bodies. Each fills doc["results"] and may add CSV files.
// ---------------------------------------------------------------------------

ordered_json cmd_evaluate(const AllocationProblem& problem, const GridModel& g,
                          const H2Evaluator& eval) {
  const Eigen::VectorXd m = problem.floor;
  const H2Report rep = eval.report(m);
  const double slack = 1e-9 * (1.0 + rep.upper_bound);
  if (rep.norm_sq < rep.lower_bound - slack ||
      rep.norm_sq > rep.upper_bound + slack)
    throw NumericalError("performance bounds violated at the evaluated point",
                         std::max(rep.lower_bound - rep.norm_sq,
                                  rep.norm_sq - rep.upper_bound));
  ordered_json out;
  out["allocation"] = by_bus(g, m);
  out["h2_norm_sq"] = r12(rep.norm_sq);
  out["lower_bound"] = r12(rep.lower_bound);
  out["upper_bound"] = r12(rep.upper_bound);
  out["bounds_hold"] = true;
  out["trace_offset"] = r12(rep.trace_offset);
  out["per_bus_cost"] = by_bus(g, rep.per_bus);
  out["gramian_residual"] = r12(rep.gramian_residual);
  out["budget"] = r12(problem.budget);
  out["headroom"] = r12(problem.budget - m.sum());
  return out;
}

ordered_json sweep_block(const AllocationProblem& base, const GridModel& g,
                         const SolverOptions& sopt, int points,
                         const fs::path& out_dir) {
  if (g.size() != 2)
    throw ModelError(
        "the disturbance sweep is defined for two-bus reduced networks; this "
        "scenario retains " +
        std::to_string(g.size()));
  if (robust_variant(base.variant))
    throw ModelError(
        "robust variants are disturbance-independent; a disturbance sweep is "
        "not meaningful for them");
  const int K = points > 1 ? points : 101;

  std::ostringstream csv;
  csv << "w1,w2,m_" << g.original_id(0) << ",m_" << g.original_id(1)
      << ",objective,sum_m,budget_active\n";

  bool monotone = true;
  bool inactive_somewhere = false;
  bool flag_consistent = true;
  double prev_m1 = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd warm;
  for (int k = 0; k < K; ++k) {
    const double w1 = static_cast<double>(k) / static_cast<double>(K - 1);
    AllocationProblem pk = base;
    pk.spec.disturbance = Eigen::Vector2d(w1, 1.0 - w1);
    SolverOptions ok = sopt;
    if (warm.size() > 0) {
      ok.initial = warm;
      ok.multistarts = 4;
    }
    const AllocationResult res = solve(pk, ok);
    warm = res.m_star;

    const double m1 = res.m_star(0);
    if (m1 < prev_m1 - 1e-6 * (1.0 + std::abs(prev_m1))) monotone = false;
    prev_m1 = std::max(prev_m1, m1);
    const bool nearly_tight =
        res.m_star.sum() >= pk.budget - 1e-6 * (1.0 + pk.budget);
    if (res.budget_active != nearly_tight) flag_consistent = false;
    if (!res.budget_active) inactive_somewhere = true;

    csv << fmt12(w1) << ',' << fmt12(1.0 - w1) << ',' << fmt12(r12(m1)) << ','
        << fmt12(r12(res.m_star(1))) << ',' << fmt12(r12(res.objective)) << ','
        << fmt12(r12(res.m_star.sum())) << ',' << (res.budget_active ? 1 : 0)
        << '\n';
  }
  write_file(out_dir / "sweep.csv", csv.str());

  ordered_json out;
  out["points"] = K;
  out["csv"] = "sweep.csv";
  out["m1_monotone_nondecreasing"] = monotone;
  out["budget_inactive_somewhere"] = inactive_somewhere;
  out["budget_flag_consistent"] = flag_consistent;
  return out;
}

ordered_json cmd_optimize(const AllocationProblem& problem, const GridModel& g,
                          const H2Evaluator& eval, const SolverOptions& sopt,
                          const RunOptions& ropt, const fs::path& out_dir) {
  const AllocationResult res = solve(problem, sopt);
  ordered_json out;
  out["solution"] = solution_json(problem, g, res);
  const PerformanceBounds bounds =
      performance_bounds(g, problem.spec, res.m_star);
  out["bounds_at_optimum"] = {{"lower", r12(bounds.lower)},
                              {"upper", r12(bounds.upper)}};
  bool not_worse = true;
  out["heuristics"] = heuristics_json(problem, g, eval, res.objective, &not_worse);
  out["optimal_not_worse"] = not_worse;
  if (ropt.sweep_points > 0)
    out["sweep"] = sweep_block(problem, g, sopt, ropt.sweep_points, out_dir);
  return out;
}

ordered_json cmd_simulate(const Scenario& sc, const AllocationProblem& problem,
                          const GridModel& g, const H2Evaluator& eval,
                          const SolverOptions& sopt, const fs::path& out_dir) {
  const AllocationResult res = solve(problem, sopt);
  const int node = default_input_index(sc, g, problem.spec);

  struct Profile {
    std::string name;
    Eigen::VectorXd m;
  };
  std::vector<Profile> profiles;
  profiles.push_back({"optimal", res.m_star});
  const HeuristicSet set = heuristic_allocations(problem);
  for (const Heuristic h : problem.heuristics)
    profiles.push_back({to_string(h), h == Heuristic::NoAdd    ? set.no_add
                                      : h == Heuristic::Uniform ? set.uniform
                                                                : set.max_cap});

  ordered_json out;
  out["input_bus"] = g.original_id(node);
  out["strength"] = r12(sc.impulse_strength);

  ordered_json rows = ordered_json::array();
  double opt_effort = 0.0;
  bool effort_ok = true;
  double used_dt = 0.0, used_horizon = 0.0;
  for (size_t pi = 0; pi < profiles.size(); ++pi) {
    const Profile& prof = profiles[pi];
    const StateSpace ss = assemble_state_space(g, problem.spec, prof.m);
    const SpectralRates rates = spectral_rates(eigen_spectrum(ss));
    const double dt = sc.sim_dt > 0.0 ? sc.sim_dt : 0.05 / rates.radius;
    const double horizon =
        sc.sim_horizon > 0.0 ? sc.sim_horizon : 20.0 / rates.slowest;
    const Trajectory traj =
        impulse_response(ss, node, sc.impulse_strength, horizon, dt);
    const Eigen::MatrixXd effort = control_effort(traj, prof.m);
    const double effort_l2 = std::sqrt(trapezoid_l2_sq(effort, dt));
    const double peak_omega = traj.omega.cwiseAbs().maxCoeff();

    ordered_json row;
    row["name"] = prof.name;
    row["allocation"] = by_bus(g, prof.m);
    row["dt"] = r12(dt);
    row["horizon"] = r12(horizon);
    row["effort_l2"] = r12(effort_l2);
    row["peak_omega"] = r12(peak_omega);
    rows.push_back(row);

    if (pi == 0) {
      opt_effort = effort_l2;
      used_dt = dt;
      used_horizon = horizon;
      // Trajectory export, thinned to keep the file reviewable.
      const Eigen::Index cols = traj.time.size();
      const Eigen::Index stride = std::max<Eigen::Index>(1, (cols - 1) / 2000);
      std::ostringstream csv;
      csv << 't';
      for (int i = 0; i < g.size(); ++i) csv << ",theta_" << g.original_id(i);
      for (int i = 0; i < g.size(); ++i) csv << ",omega_" << g.original_id(i);
      for (int i = 0; i < g.size(); ++i) csv << ",effort_" << g.original_id(i);
      csv << '\n';
      for (Eigen::Index t = 0; t < cols; t += stride) {
        csv << fmt12(r12(traj.time(t)));
        for (int i = 0; i < g.size(); ++i)
          csv << ',' << fmt12(r12(traj.theta(i, t)));
        for (int i = 0; i < g.size(); ++i)
          csv << ',' << fmt12(r12(traj.omega(i, t)));
        for (int i = 0; i < g.size(); ++i)
          csv << ',' << fmt12(r12(effort(i, t)));
        csv << '\n';
      }
      write_file(out_dir / "trajectory.csv", csv.str());
    } else if (opt_effort > effort_l2 + 1e-9 * (1.0 + effort_l2)) {
      effort_ok = false;
    }
  }
  out["profiles"] = rows;
  out["optimal_effort_leq_heuristics"] = effort_ok;
  out["trajectory_csv"] = "trajectory.csv";

  // Time-domain oracle against the Lyapunov value at the optimum.
  const StateSpace ss = assemble_state_space(g, problem.spec, res.m_star);
  bool horizon_ok = false;
  double h2_td = 0.0;
  if (sc.sim_horizon > 0.0) {
    h2_td = h2_via_impulse(ss, used_horizon, used_dt, &horizon_ok);
  } else {
    double horizon_used = 0.0;
    h2_td = h2_via_impulse_auto(ss, used_dt, &horizon_used, &horizon_ok);
    used_horizon = horizon_used;
  }
  const double h2_ly = eval.norm_squared(res.m_star);
  out["h2_time_domain"] = r12(h2_td);
  out["h2_lyapunov"] = r12(h2_ly);
  out["rel_gap"] =
      r12(std::abs(h2_td - h2_ly) / std::max(h2_ly, 1e-300));
  out["oracle_horizon"] = r12(used_horizon);
  out["horizon_ok"] = horizon_ok;
  out["solution"] = solution_json(problem, g, res);
  return out;
}

ordered_json cmd_spectrum(const AllocationProblem& problem, const GridModel& g,
                          const SolverOptions& sopt, const fs::path& out_dir) {
  const AllocationResult res = solve(problem, sopt);
  const HeuristicSet set = heuristic_allocations(problem);
  struct Profile {
    std::string name;
    Eigen::VectorXd m;
  };
  const std::vector<Profile> profiles = {{"no-add", set.no_add},
                                         {"uniform", set.uniform},
                                         {"max-cap", set.max_cap},
                                         {"optimal", res.m_star}};
  std::ostringstream csv;
  csv << "profile,re,im,damping_ratio,structural_zero\n";
  ordered_json out;
  ordered_json arr = ordered_json::array();
  for (const Profile& prof : profiles) {
    const StateSpace ss = assemble_state_space(g, problem.spec, prof.m);
    const std::vector<SpectrumMode> modes = eigen_spectrum(ss);
    int zeros = 0;
    double abscissa = -std::numeric_limits<double>::infinity();
    double min_damping = std::numeric_limits<double>::infinity();
    ordered_json eigs = ordered_json::array();
    for (const SpectrumMode& mode : modes) {
      csv << prof.name << ',' << fmt12(r12(mode.value.real())) << ','
          << fmt12(r12(mode.value.imag())) << ','
          << fmt12(r12(mode.damping_ratio)) << ','
          << (mode.structural_zero ? 1 : 0) << '\n';
      ordered_json e;
      e["re"] = r12(mode.value.real());
      e["im"] = r12(mode.value.imag());
      e["damping_ratio"] = r12(mode.damping_ratio);
      e["structural_zero"] = mode.structural_zero;
      eigs.push_back(e);
      if (mode.structural_zero) {
        ++zeros;
      } else {
        abscissa = std::max(abscissa, mode.value.real());
        min_damping = std::min(min_damping, mode.damping_ratio);
      }
    }
    ordered_json row;
    row["name"] = prof.name;
    row["allocation"] = by_bus(g, prof.m);
    row["zero_count"] = zeros;
    row["spectral_abscissa"] = r12(abscissa);
    row["min_damping_ratio"] = r12(min_damping);
    row["eigenvalues"] = eigs;
    arr.push_back(row);
  }
  write_file(out_dir / "spectrum.csv", csv.str());
  out["profiles"] = arr;
  out["csv"] = "spectrum.csv";
  out["solution"] = solution_json(problem, g, res);
  return out;
}

ordered_json cmd_sparsity_path(const AllocationProblem& base,
                               const GridModel& g, const H2Evaluator& eval,
                               const SolverOptions& sopt,
                               const RunOptions& ropt,
                               const fs::path& out_dir) {
  AllocationProblem problem = base;
  problem.variant = Variant::Sparse;
  const std::vector<double> grid = parse_gamma_grid(ropt.gamma_grid);

  const AllocationResult unreg = solve_sparse(problem, 0.0, sopt);
  const double f_star = unreg.h2_norm_sq;
  const double f_floor = eval.norm_squared(problem.floor);
  const double denom = f_floor - f_star;
  const auto rel_loss = [&](double h2) {
    if (denom <= 1e-12 * std::max(1.0, f_floor)) return 0.0;
    return (h2 - f_star) / denom * 100.0;
  };

  std::ostringstream csv;
  csv << "gamma,support_size,h2_norm_sq,objective,rel_loss_pct,support\n";
  ordered_json points = ordered_json::array();
  bool support_monotone = true;
  size_t prev_support = static_cast<size_t>(g.size()) + 1;

  Eigen::VectorXd warm = unreg.m_star;
  for (const double gamma : grid) {
    SolverOptions ok = sopt;
    ok.initial = warm;
    ok.multistarts = 3;
    const AllocationResult res = solve_sparse(problem, gamma, ok);
    warm = res.m_star;

    if (res.support.size() > prev_support) support_monotone = false;
    prev_support = res.support.size();

    std::ostringstream ids;
    for (size_t i = 0; i < res.support.size(); ++i) {
      if (i > 0) ids << ';';
      ids << res.support[i];
    }
    csv << fmt12(r12(gamma)) << ',' << res.support.size() << ','
        << fmt12(r12(res.h2_norm_sq)) << ',' << fmt12(r12(res.objective))
        << ',' << fmt12(r12(rel_loss(res.h2_norm_sq))) << ',' << ids.str()
        << '\n';

    ordered_json pt;
    pt["gamma"] = r12(gamma);
    pt["support_size"] = res.support.size();
    pt["support"] = res.support;
    pt["h2_norm_sq"] = r12(res.h2_norm_sq);
    pt["objective"] = r12(res.objective);
    pt["rel_loss_pct"] = r12(rel_loss(res.h2_norm_sq));
    pt["allocation"] = by_bus(g, res.m_star);
    points.push_back(pt);
  }
  write_file(out_dir / "gamma_path.csv", csv.str());

  ordered_json out;
  out["unregularized"] = solution_json(problem, g, unreg);
  out["no_add_h2"] = r12(f_floor);
  out["path"] = points;
  out["support_monotone_nonincreasing"] = support_monotone;
  out["csv"] = "gamma_path.csv";
  return out;
}

ordered_json cmd_robust(const AllocationProblem& base, const GridModel& g,
                        const H2Evaluator& eval, const SolverOptions& sopt) {
  AllocationProblem problem = base;
  if (!robust_variant(problem.variant)) problem.variant = Variant::Robust;
  const AllocationResult res = solve(problem, sopt);
  ordered_json out;
  out["solution"] = solution_json(problem, g, res);

  // Equalization diagnostic: spread of the node costs over the buses that
  // actually received inertia (the water level should be flat there).
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < g.size(); ++i) {
    if (res.at_floor[static_cast<size_t>(i)]) continue;
    lo = std::min(lo, res.node_cost(i));
    hi = std::max(hi, res.node_cost(i));
  }
  out["active_cost_spread"] =
      r12(std::isfinite(lo) && res.lambda > 0.0 ? (hi - lo) / res.lambda : 0.0);
  bool not_worse = true;
  out["heuristics"] = heuristics_json(problem, g, eval, res.objective, &not_worse);
  out["optimal_not_worse"] = not_worse;
  return out;
}

}  // namespace

std::string run(const Scenario& scenario, const std::string& command,
                const RunOptions& options) {
  static const std::vector<std::string> kCommands = {
      "evaluate", "optimize",      "sweep", "simulate",
      "spectrum", "sparsity-path", "robust"};
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
    throw ModelError("unknown command '" + command + "'");

  Scenario sc = scenario;
  if (!options.variant_override.empty()) {
    try {
      sc.variant = variant_from_string(options.variant_override);
    } catch (const ModelError& err) {
      throw ScenarioError(err.what(), "--variant");
    }
  }

  const GridModel g = sc.grid();
  const AllocationProblem problem = sc.problem(g);
  const H2Evaluator eval(g, problem.spec);
  const SolverOptions sopt = base_options(options);

  const fs::path out_dir(options.out_dir.empty() ? "." : options.out_dir);
  fs::create_directories(out_dir);

  ordered_json doc;
  doc["schema"] = "inertia-opt-results/1";
  doc["command"] = command;
  doc["name"] = sc.name;
  doc["seed"] = options.seed;
  doc["variant"] = to_string(problem.variant);
  doc["retained_buses"] = g.size();
  doc["scenario"] = ordered_json::parse(normalized_scenario_text(sc));

  if (command == "evaluate") {
    doc["results"] = cmd_evaluate(problem, g, eval);
  } else if (command == "optimize") {
    doc["results"] = cmd_optimize(problem, g, eval, sopt, options, out_dir);
  } else if (command == "sweep") {
    doc["results"] =
        sweep_block(problem, g, sopt, options.sweep_points, out_dir);
  } else if (command == "simulate") {
    doc["results"] = cmd_simulate(sc, problem, g, eval, sopt, out_dir);
  } else if (command == "spectrum") {
    doc["results"] = cmd_spectrum(problem, g, sopt, out_dir);
  } else if (command == "sparsity-path") {
    doc["results"] = cmd_sparsity_path(problem, g, eval, sopt, options, out_dir);
  } else {  // robust
    doc["results"] = cmd_robust(problem, g, eval, sopt);
  }

  const std::string text = doc.dump(2) + "\n";
  write_file(out_dir / "results.json", text);
  return text;
}

}  // namespace inertia
