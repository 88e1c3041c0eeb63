#include "inertia/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "inertia/errors.hpp"

namespace inertia {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& what, const std::string& path) {
  throw ScenarioError(what, path);
}

void check_known_keys(const json& j, const std::string& path,
                      std::initializer_list<const char*> known) {
  for (const auto& item : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) {
          return item.key() == k;
        }) == known.end())
      fail("unknown key '" + item.key() + "'", path);
  }
}

const json& require(const json& j, const std::string& path, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) fail(std::string("missing required key '") + key + "'", path);
  return *it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail("expected a number", path);
  return j.get<double>();
}

double opt_number(const json& j, const std::string& path, const char* key,
                  double fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  return as_number(*it, path + "." + key);
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail("expected an integer", path);
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail("expected a string", path);
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail("expected a boolean", path);
  return j.get<bool>();
}

std::vector<WeightedEdge> parse_edge_array(const json& j,
                                           const std::string& path,
                                           const char* weight_key) {
  if (!j.is_array()) fail("expected an array", path);
  std::vector<WeightedEdge> edges;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string epath = path + "[" + std::to_string(k) + "]";
    const json& e = j[k];
    if (!e.is_object()) fail("expected an object", epath);
    check_known_keys(e, epath, {"from", "to", weight_key});
    WeightedEdge edge;
    edge.from = as_int(require(e, epath, "from"), epath + ".from");
    edge.to = as_int(require(e, epath, "to"), epath + ".to");
    edge.weight =
        as_number(require(e, epath, weight_key), epath + "." + weight_key);
    if (edge.weight < 0.0) fail("negative weight", epath + "." + weight_key);
    edges.push_back(edge);
  }
  return edges;
}

void parse_performance(const json& j, Scenario& sc) {
  const std::string path = "performance";
  check_known_keys(j, path, {"angle_penalty", "freq_penalty", "disturbance"});

  if (const auto it = j.find("angle_penalty"); it != j.end()) {
    const std::string apath = path + ".angle_penalty";
    std::string mode;
    const json* obj = nullptr;
    if (it->is_string()) {
      mode = it->get<std::string>();
    } else if (it->is_object()) {
      obj = &*it;
      check_known_keys(*obj, apath, {"mode", "edges"});
      mode = as_string(require(*obj, apath, "mode"), apath + ".mode");
    } else {
      fail("expected a string or an object", apath);
    }
    if (mode == "none") {
      sc.angle_mode = AnglePenalty::None;
    } else if (mode == "laplacian") {
      sc.angle_mode = AnglePenalty::NetworkLaplacian;
    } else if (mode == "average") {
      sc.angle_mode = AnglePenalty::Average;
    } else if (mode == "edges") {
      sc.angle_mode = AnglePenalty::ExplicitEdges;
      if (!obj || obj->find("edges") == obj->end())
        fail("angle mode 'edges' needs an edge list", apath);
      sc.angle_edges =
          parse_edge_array((*obj)["edges"], apath + ".edges", "weight");
    } else {
      fail("unknown angle penalty mode '" + mode + "'", apath);
    }
  }

  if (const auto it = j.find("freq_penalty"); it != j.end()) {
    const std::string fpath = path + ".freq_penalty";
    std::string mode;
    const json* obj = nullptr;
    if (it->is_string()) {
      mode = it->get<std::string>();
    } else if (it->is_object()) {
      obj = &*it;
      check_known_keys(*obj, fpath, {"mode", "c"});
      mode = as_string(require(*obj, fpath, "mode"), fpath + ".mode");
    } else {
      fail("expected a string or an object", fpath);
    }
    if (mode == "explicit") {
      sc.freq_mode = FreqPenalty::Explicit;
    } else if (mode == "damping") {
      sc.freq_mode = FreqPenalty::Damping;
    } else if (mode == "c_times_m") {
      sc.freq_mode = FreqPenalty::KineticEnergy;
      if (!obj) fail("mode 'c_times_m' needs the object form with 'c'", fpath);
      sc.kinetic_scale = as_number(require(*obj, fpath, "c"), fpath + ".c");
      if (sc.kinetic_scale < 0.0) fail("c must be nonnegative", fpath + ".c");
    } else {
      fail("unknown frequency penalty mode '" + mode + "'", fpath);
    }
  }

  if (const auto it = j.find("disturbance"); it != j.end()) {
    const std::string dpath = path + ".disturbance";
    if (it->is_string()) {
      const std::string s = it->get<std::string>();
      if (s == "explicit") {
        sc.dist_mode = DisturbanceMode::Explicit;
      } else if (s == "uniform") {
        sc.dist_mode = DisturbanceMode::Uniform;
        sc.uniform_total = 1.0;
      } else if (s.rfind("localized:", 0) == 0) {
        sc.dist_mode = DisturbanceMode::Localized;
        try {
          sc.localized_bus = std::stoi(s.substr(10));
        } catch (const std::exception&) {
          fail("malformed localized selector '" + s + "'", dpath);
        }
        sc.localized_strength = 1.0;
      } else {
        fail("unknown disturbance selector '" + s + "'", dpath);
      }
    } else if (it->is_object()) {
      check_known_keys(*it, dpath,
                       {"mode", "values", "total", "bus", "strength"});
      const std::string mode =
          as_string(require(*it, dpath, "mode"), dpath + ".mode");
      if (mode == "explicit") {
        sc.dist_mode = DisturbanceMode::Explicit;
      } else if (mode == "vector") {
        sc.dist_mode = DisturbanceMode::Vector;
        const json& vals = require(*it, dpath, "values");
        if (!vals.is_array()) fail("expected an array", dpath + ".values");
        sc.dist_values.clear();
        for (std::size_t k = 0; k < vals.size(); ++k) {
          const double v = as_number(
              vals[k], dpath + ".values[" + std::to_string(k) + "]");
          if (v < 0.0)
            fail("negative disturbance",
                 dpath + ".values[" + std::to_string(k) + "]");
          sc.dist_values.push_back(v);
        }
      } else if (mode == "uniform") {
        sc.dist_mode = DisturbanceMode::Uniform;
        sc.uniform_total = opt_number(*it, dpath, "total", 1.0);
        if (sc.uniform_total < 0.0)
          fail("total must be nonnegative", dpath + ".total");
      } else if (mode == "localized") {
        sc.dist_mode = DisturbanceMode::Localized;
        sc.localized_bus = as_int(require(*it, dpath, "bus"), dpath + ".bus");
        sc.localized_strength = opt_number(*it, dpath, "strength", 1.0);
        if (sc.localized_strength < 0.0)
          fail("strength must be nonnegative", dpath + ".strength");
      } else {
        fail("unknown disturbance mode '" + mode + "'", dpath);
      }
    } else {
      fail("expected a string or an object", dpath);
    }
  }
}

void parse_problem(const json& j, Scenario& sc) {
  const std::string path = "problem";
  if (!j.is_object()) fail("expected an object", path);
  check_known_keys(j, path,
                   {"variant", "budget", "gamma", "disturbance_budget",
                    "heuristics"});
  if (const auto it = j.find("variant"); it != j.end()) {
    const std::string s = as_string(*it, path + ".variant");
    try {
      sc.variant = variant_from_string(s);
    } catch (const ModelError& err) {
      fail(err.what(), path + ".variant");
    }
  }
  sc.budget = as_number(require(j, path, "budget"), path + ".budget");
  if (!(sc.budget > 0.0)) fail("budget must be positive", path + ".budget");
  sc.gamma = opt_number(j, path, "gamma", 0.0);
  if (sc.gamma < 0.0) fail("gamma must be nonnegative", path + ".gamma");
  sc.disturbance_budget = opt_number(j, path, "disturbance_budget", 1.0);
  if (!(sc.disturbance_budget > 0.0))
    fail("disturbance_budget must be positive", path + ".disturbance_budget");
  if (const auto it = j.find("heuristics"); it != j.end()) {
    if (!it->is_array()) fail("expected an array", path + ".heuristics");
    sc.heuristics.clear();
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string hpath = path + ".heuristics[" + std::to_string(k) + "]";
      try {
        sc.heuristics.push_back(heuristic_from_string(as_string((*it)[k], hpath)));
      } catch (const ModelError& err) {
        fail(err.what(), hpath);
      }
    }
  } else {
    sc.heuristics = {Heuristic::NoAdd, Heuristic::Uniform, Heuristic::MaxCap};
  }
}

void parse_simulation(const json& j, Scenario& sc) {
  const std::string path = "simulation";
  if (!j.is_object()) fail("expected an object", path);
  check_known_keys(j, path, {"impulse_bus", "strength", "dt", "horizon"});
  if (const auto it = j.find("impulse_bus"); it != j.end())
    sc.impulse_bus = as_int(*it, path + ".impulse_bus");
  sc.impulse_strength = opt_number(j, path, "strength", 1.0);
  auto timing = [&](const char* key, double fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    const std::string kpath = path + "." + key;
    if (it->is_string()) {
      if (it->get<std::string>() != "auto")
        fail("expected a positive number or \"auto\"", kpath);
      return 0.0;
    }
    const double v = as_number(*it, kpath);
    if (!(v > 0.0)) fail("expected a positive number or \"auto\"", kpath);
    return v;
  };
  sc.sim_dt = timing("dt", 0.0);
  sc.sim_horizon = timing("horizon", 0.0);
}

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

ordered_json edges_to_json(const std::vector<WeightedEdge>& edges,
                           const char* weight_key) {
  ordered_json arr = ordered_json::array();
  for (const WeightedEdge& e : edges) {
    ordered_json je;
    je["from"] = e.from;
    je["to"] = e.to;
    je[weight_key] = e.weight;
    arr.push_back(je);
  }
  return arr;
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::General: return "general";
    case Variant::PrimaryEffort: return "primary-effort";
    case Variant::UniformRatio: return "uniform-ratio";
    case Variant::Sparse: return "sparse";
    case Variant::Robust: return "robust";
    case Variant::RobustPrimary: return "robust-primary";
  }
  throw ModelError("unknown variant");
}

Variant variant_from_string(const std::string& s) {
  if (s == "general") return Variant::General;
  if (s == "primary-effort") return Variant::PrimaryEffort;
  if (s == "uniform-ratio") return Variant::UniformRatio;
  if (s == "sparse") return Variant::Sparse;
  if (s == "robust") return Variant::Robust;
  if (s == "robust-primary") return Variant::RobustPrimary;
  throw ModelError("unknown variant '" + s + "'");
}

std::string to_string(Heuristic h) {
  switch (h) {
    case Heuristic::NoAdd: return "no-add";
    case Heuristic::Uniform: return "uniform";
    case Heuristic::MaxCap: return "max-cap";
  }
  throw ModelError("unknown heuristic");
}

Heuristic heuristic_from_string(const std::string& s) {
  if (s == "no-add") return Heuristic::NoAdd;
  if (s == "uniform") return Heuristic::Uniform;
  if (s == "max-cap") return Heuristic::MaxCap;
  throw ModelError("unknown heuristic '" + s + "'");
}

GridModel Scenario::grid() const {
  std::vector<Bus> buses;
  std::vector<int> passive;
  for (const ScenarioBus& sb : this->buses) {
    Bus b;
    b.id = sb.id;
    b.damping = sb.damping;
    b.inertia_floor = sb.inertia_min;
    b.inertia_cap = sb.inertia_max < 0.0
                        ? std::max(budget, sb.inertia_min)
                        : sb.inertia_max;
    b.disturbance_weight = sb.disturbance;
    b.freq_penalty = sb.freq_penalty;
    buses.push_back(b);
    if (sb.passive) passive.push_back(sb.id);
  }
  return GridModel::build(std::move(buses), edges, passive);
}

PerformanceSpec Scenario::performance(const GridModel& g) const {
  PerformanceSpec spec;
  spec.angle_mode = angle_mode;
  spec.angle_edges = angle_edges;
  spec.freq_mode = freq_mode;
  spec.kinetic_scale = kinetic_scale;

  const int n = g.size();
  switch (dist_mode) {
    case DisturbanceMode::Explicit:
      break;  // taken from the bus data
    case DisturbanceMode::Vector: {
      if (static_cast<int>(dist_values.size()) != n)
        throw ScenarioError("disturbance vector length " +
                                std::to_string(dist_values.size()) +
                                " does not match the " + std::to_string(n) +
                                " retained buses",
                            "performance.disturbance.values");
      Eigen::VectorXd w(n);
      for (int i = 0; i < n; ++i) w(i) = dist_values[static_cast<size_t>(i)];
      spec.disturbance = w;
      break;
    }
    case DisturbanceMode::Uniform:
      spec.disturbance =
          Eigen::VectorXd::Constant(n, uniform_total / static_cast<double>(n));
      break;
    case DisturbanceMode::Localized: {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
      w(g.index_of(localized_bus)) = localized_strength;
      spec.disturbance = w;
      break;
    }
  }
  return spec;
}

AllocationProblem Scenario::problem(const GridModel& g) const {
  AllocationProblem p(g, performance(g), budget);
  p.variant = variant;
  p.gamma = gamma;
  p.disturbance_budget = disturbance_budget;
  p.heuristics = heuristics;
  return p;
}

Scenario parse_scenario_text(const std::string& text,
                             const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    fail(std::string("parse error: ") + err.what(),
         origin + ": " + line_column(text, err.byte));
  }
  if (!doc.is_object()) fail("expected a top-level object", origin);
  check_known_keys(doc, "<root>",
                   {"schema", "name", "buses", "edges", "performance",
                    "problem", "simulation"});

  Scenario sc;
  sc.schema = as_string(require(doc, "<root>", "schema"), "schema");
  if (sc.schema != "inertia-opt-scenario/1")
    fail("unsupported schema '" + sc.schema + "'", "schema");
  if (const auto it = doc.find("name"); it != doc.end())
    sc.name = as_string(*it, "name");

  const json& buses = require(doc, "<root>", "buses");
  if (!buses.is_array() || buses.empty())
    fail("expected a non-empty array", "buses");
  std::set<int> seen_ids;
  for (std::size_t k = 0; k < buses.size(); ++k) {
    const std::string bpath = "buses[" + std::to_string(k) + "]";
    const json& jb = buses[k];
    if (!jb.is_object()) fail("expected an object", bpath);
    check_known_keys(jb, bpath,
                     {"id", "damping", "inertia_min", "inertia_max",
                      "disturbance", "freq_penalty", "passive"});
    ScenarioBus b;
    b.id = as_int(require(jb, bpath, "id"), bpath + ".id");
    if (!seen_ids.insert(b.id).second)
      fail("duplicate bus id " + std::to_string(b.id), bpath + ".id");
    b.damping = opt_number(jb, bpath, "damping", 1.0);
    b.inertia_min = opt_number(jb, bpath, "inertia_min", 1.0);
    b.inertia_max = opt_number(jb, bpath, "inertia_max", -1.0);
    b.disturbance = opt_number(jb, bpath, "disturbance", 0.0);
    b.freq_penalty = opt_number(jb, bpath, "freq_penalty", 1.0);
    if (const auto it = jb.find("passive"); it != jb.end())
      b.passive = as_bool(*it, bpath + ".passive");
    if (!b.passive) {
      if (!(b.damping > 0.0)) fail("damping must be positive", bpath + ".damping");
      if (!(b.inertia_min > 0.0))
        fail("inertia_min must be positive", bpath + ".inertia_min");
      if (b.inertia_max >= 0.0 && b.inertia_max < b.inertia_min)
        fail("inertia_max below inertia_min", bpath + ".inertia_max");
      if (b.disturbance < 0.0)
        fail("disturbance must be nonnegative", bpath + ".disturbance");
      if (!(b.freq_penalty > 0.0))
        fail("freq_penalty must be positive", bpath + ".freq_penalty");
    }
    sc.buses.push_back(b);
  }

  sc.edges = parse_edge_array(require(doc, "<root>", "edges"), "edges",
                              "susceptance");
  for (std::size_t k = 0; k < sc.edges.size(); ++k) {
    const std::string epath = "edges[" + std::to_string(k) + "]";
    if (seen_ids.count(sc.edges[k].from) == 0)
      fail("unknown bus id " + std::to_string(sc.edges[k].from),
           epath + ".from");
    if (seen_ids.count(sc.edges[k].to) == 0)
      fail("unknown bus id " + std::to_string(sc.edges[k].to), epath + ".to");
  }

  if (const auto it = doc.find("performance"); it != doc.end()) {
    if (!it->is_object()) fail("expected an object", "performance");
    parse_performance(*it, sc);
  }
  parse_problem(require(doc, "<root>", "problem"), sc);
  if (const auto it = doc.find("simulation"); it != doc.end())
    parse_simulation(*it, sc);

  for (const WeightedEdge& e : sc.angle_edges) {
    if (seen_ids.count(e.from) == 0 || seen_ids.count(e.to) == 0)
      fail("angle penalty edge references an unknown bus",
           "performance.angle_penalty.edges");
  }
  if (sc.dist_mode == DisturbanceMode::Localized &&
      seen_ids.count(sc.localized_bus) == 0)
    fail("unknown bus id " + std::to_string(sc.localized_bus),
         "performance.disturbance.bus");
  if (sc.impulse_bus >= 0 && seen_ids.count(sc.impulse_bus) == 0)
    fail("unknown bus id " + std::to_string(sc.impulse_bus),
         "simulation.impulse_bus");

  // Force full model validation so a loaded scenario is usable as-is.
  const GridModel g = sc.grid();
  sc.problem(g);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file", path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  Scenario sc = parse_scenario_text(buffer.str(), path);
  if (sc.name.empty()) {
    // Default the study name to the file stem.
    std::string stem = path;
    if (const auto slash = stem.find_last_of("/\\"); slash != std::string::npos)
      stem = stem.substr(slash + 1);
    if (const auto dot = stem.find_last_of('.'); dot != std::string::npos)
      stem = stem.substr(0, dot);
    sc.name = stem;
  }
  return sc;
}

std::string normalized_scenario_text(const Scenario& sc) {
  ordered_json doc;
  doc["schema"] = sc.schema;
  doc["name"] = sc.name;

  ordered_json buses = ordered_json::array();
  for (const ScenarioBus& b : sc.buses) {
    ordered_json jb;
    jb["id"] = b.id;
    jb["damping"] = b.damping;
    jb["inertia_min"] = b.inertia_min;
    jb["inertia_max"] =
        b.inertia_max < 0.0 ? std::max(sc.budget, b.inertia_min) : b.inertia_max;
    jb["disturbance"] = b.disturbance;
    jb["freq_penalty"] = b.freq_penalty;
    jb["passive"] = b.passive;
    buses.push_back(jb);
  }
  doc["buses"] = buses;
  doc["edges"] = edges_to_json(sc.edges, "susceptance");

  ordered_json perf;
  ordered_json angle;
  switch (sc.angle_mode) {
    case AnglePenalty::None: angle["mode"] = "none"; break;
    case AnglePenalty::NetworkLaplacian: angle["mode"] = "laplacian"; break;
    case AnglePenalty::Average: angle["mode"] = "average"; break;
    case AnglePenalty::ExplicitEdges:
      angle["mode"] = "edges";
      angle["edges"] = edges_to_json(sc.angle_edges, "weight");
      break;
  }
  perf["angle_penalty"] = angle;
  ordered_json freq;
  switch (sc.freq_mode) {
    case FreqPenalty::Explicit: freq["mode"] = "explicit"; break;
    case FreqPenalty::Damping: freq["mode"] = "damping"; break;
    case FreqPenalty::KineticEnergy:
      freq["mode"] = "c_times_m";
      freq["c"] = sc.kinetic_scale;
      break;
  }
  perf["freq_penalty"] = freq;
  ordered_json dist;
  switch (sc.dist_mode) {
    case DisturbanceMode::Explicit:
      dist["mode"] = "explicit";
      break;
    case DisturbanceMode::Vector:
      dist["mode"] = "vector";
      dist["values"] = sc.dist_values;
      break;
    case DisturbanceMode::Uniform:
      dist["mode"] = "uniform";
      dist["total"] = sc.uniform_total;
      break;
    case DisturbanceMode::Localized:
      dist["mode"] = "localized";
      dist["bus"] = sc.localized_bus;
      dist["strength"] = sc.localized_strength;
      break;
  }
  perf["disturbance"] = dist;
  doc["performance"] = perf;

  ordered_json problem;
  problem["variant"] = to_string(sc.variant);
  problem["budget"] = sc.budget;
  problem["gamma"] = sc.gamma;
  problem["disturbance_budget"] = sc.disturbance_budget;
  ordered_json heur = ordered_json::array();
  for (const Heuristic h : sc.heuristics) heur.push_back(to_string(h));
  problem["heuristics"] = heur;
  doc["problem"] = problem;

  ordered_json sim;
  sim["impulse_bus"] = sc.impulse_bus;
  sim["strength"] = sc.impulse_strength;
  if (sc.sim_dt > 0.0)
    sim["dt"] = sc.sim_dt;
  else
    sim["dt"] = "auto";
  if (sc.sim_horizon > 0.0)
    sim["horizon"] = sc.sim_horizon;
  else
    sim["horizon"] = "auto";
  doc["simulation"] = sim;

  return doc.dump(2) + "\n";
}

void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ScenarioError("cannot write scenario file", path);
  out << normalized_scenario_text(sc);
}

}  // namespace inertia
