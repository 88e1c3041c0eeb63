#include "inertia/grid.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "inertia/errors.hpp"

namespace inertia {

namespace {

std::string format_component(const std::vector<int>& component) {
  std::ostringstream os;
  os << "{";
  for (size_t i = 0; i < component.size(); ++i) {
    if (i) os << ", ";
    os << component[i];
  }
  os << "}";
  return os.str();
}

}  // namespace

Eigen::MatrixXd build_laplacian(const std::vector<std::tuple<int, int, double>>& edges,
                                int n, bool require_connected) {
  if (n <= 0) throw ModelError("laplacian needs at least one vertex");
  Eigen::MatrixXd laplacian = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j, b] : edges) {
    if (i < 0 || i >= n || j < 0 || j >= n) {
      throw ModelError("edge (" + std::to_string(i) + "," + std::to_string(j) +
                       ") out of range for n=" + std::to_string(n));
    }
    if (i == j) {
      throw ModelError("self-loop at vertex " + std::to_string(i));
    }
    if (b < 0.0) {
      throw ModelError("negative edge weight " + std::to_string(b) + " on (" +
                       std::to_string(i) + "," + std::to_string(j) + ")");
    }
    laplacian(i, j) -= b;
    laplacian(j, i) -= b;
    laplacian(i, i) += b;
    laplacian(j, j) += b;
  }
  if (require_connected && !is_connected_laplacian(laplacian)) {
    auto components = graph_components(laplacian);
    throw ModelError("graph is disconnected; offending component " +
                     format_component(components.front()));
  }
  return laplacian;
}

bool is_connected_laplacian(const Eigen::MatrixXd& laplacian) {
  const int n = static_cast<int>(laplacian.rows());
  if (n == 1) return true;
  const double max_degree = laplacian.diagonal().maxCoeff();
  if (max_degree <= 0.0) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(laplacian,
                                                     Eigen::EigenvaluesOnly);
  // eigenvalues are sorted ascending; index 1 is the Fiedler value
  return eig.eigenvalues()(1) > 1e-9 * max_degree;
}

std::vector<std::vector<int>> graph_components(const Eigen::MatrixXd& laplacian) {
  const int n = static_cast<int>(laplacian.rows());
  std::vector<int> label(static_cast<size_t>(n), -1);
  std::vector<std::vector<int>> components;
  for (int root = 0; root < n; ++root) {
    if (label[static_cast<size_t>(root)] >= 0) continue;
    const int comp = static_cast<int>(components.size());
    components.emplace_back();
    std::vector<int> stack{root};
    label[static_cast<size_t>(root)] = comp;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      components[static_cast<size_t>(comp)].push_back(v);
      for (int u = 0; u < n; ++u) {
        if (u != v && laplacian(v, u) < 0.0 && label[static_cast<size_t>(u)] < 0) {
          label[static_cast<size_t>(u)] = comp;
          stack.push_back(u);
        }
      }
    }
    std::sort(components.back().begin(), components.back().end());
  }
  return components;
}

Eigen::MatrixXd kron_reduce(const Eigen::MatrixXd& laplacian,
                            const std::vector<int>& passive) {
  const int n = static_cast<int>(laplacian.rows());
  if (passive.empty()) return laplacian;

  std::vector<bool> is_passive(static_cast<size_t>(n), false);
  for (int p : passive) {
    if (p < 0 || p >= n) {
      throw ModelError("passive index " + std::to_string(p) + " out of range");
    }
    is_passive[static_cast<size_t>(p)] = true;
  }
  std::vector<int> retained;
  std::vector<int> eliminated;
  for (int k = 0; k < n; ++k) {
    (is_passive[static_cast<size_t>(k)] ? eliminated : retained).push_back(k);
  }
  if (retained.empty()) {
    throw ModelError("cannot Kron-reduce every bus away");
  }

  const int r = static_cast<int>(retained.size());
  const int p = static_cast<int>(eliminated.size());
  Eigen::MatrixXd l_rr(r, r), l_rp(r, p), l_pp(p, p);
  for (int a = 0; a < r; ++a) {
    for (int b = 0; b < r; ++b) l_rr(a, b) = laplacian(retained[a], retained[b]);
    for (int b = 0; b < p; ++b) l_rp(a, b) = laplacian(retained[a], eliminated[b]);
  }
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) l_pp(a, b) = laplacian(eliminated[a], eliminated[b]);

  Eigen::LDLT<Eigen::MatrixXd> ldlt(l_pp);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-12 * std::max(1.0, l_pp.diagonal().maxCoeff())) {
    throw ModelError("singular passive block in Kron reduction");
  }

  Eigen::MatrixXd reduced = l_rr - l_rp * ldlt.solve(l_rp.transpose());

  // restore the exact Laplacian structure lost to roundoff
  reduced = 0.5 * (reduced + reduced.transpose()).eval();
  for (int a = 0; a < r; ++a) {
    for (int b = 0; b < r; ++b) {
      if (a != b && reduced(a, b) > 0.0) reduced(a, b) = 0.0;
    }
  }
  for (int a = 0; a < r; ++a) {
    reduced(a, a) = 0.0;
    reduced(a, a) = -reduced.row(a).sum();
  }
  return reduced;
}

GridModel GridModel::build(std::vector<Bus> buses, std::vector<WeightedEdge> edges,
                           const std::vector<int>& passive_ids) {
  if (buses.empty()) throw ModelError("grid needs at least one bus");

  std::unordered_map<int, int> index_of_id;
  for (size_t k = 0; k < buses.size(); ++k) {
    if (!index_of_id.emplace(buses[k].id, static_cast<int>(k)).second) {
      throw ModelError("duplicate bus id " + std::to_string(buses[k].id));
    }
  }
  std::vector<bool> passive(buses.size(), false);
  for (int id : passive_ids) {
    auto it = index_of_id.find(id);
    if (it == index_of_id.end()) {
      throw ModelError("passive id " + std::to_string(id) + " is not a bus");
    }
    passive[static_cast<size_t>(it->second)] = true;
  }

  for (size_t k = 0; k < buses.size(); ++k) {
    if (passive[k]) continue;
    const Bus& bus = buses[k];
    const std::string tag = "bus " + std::to_string(bus.id) + ": ";
    if (!(bus.damping > 0.0)) throw ModelError(tag + "damping must be > 0");
    if (!(bus.inertia_floor > 0.0))
      throw ModelError(tag + "inertia floor must be > 0");
    if (!(bus.inertia_cap >= bus.inertia_floor))
      throw ModelError(tag + "inertia cap must be >= floor");
    if (!(bus.disturbance_weight >= 0.0))
      throw ModelError(tag + "disturbance weight must be >= 0");
    if (!(bus.freq_penalty > 0.0))
      throw ModelError(tag + "frequency penalty must be > 0");
  }

  std::vector<std::tuple<int, int, double>> indexed_edges;
  indexed_edges.reserve(edges.size());
  for (const auto& edge : edges) {
    auto it_from = index_of_id.find(edge.from);
    auto it_to = index_of_id.find(edge.to);
    if (it_from == index_of_id.end() || it_to == index_of_id.end()) {
      throw ModelError("edge (" + std::to_string(edge.from) + "," +
                       std::to_string(edge.to) + ") references an unknown bus");
    }
    indexed_edges.emplace_back(it_from->second, it_to->second, edge.weight);
  }

  Eigen::MatrixXd full =
      build_laplacian(indexed_edges, static_cast<int>(buses.size()),
                      /*require_connected=*/buses.size() > 1);

  std::vector<int> passive_indices;
  for (size_t k = 0; k < buses.size(); ++k) {
    if (passive[k]) passive_indices.push_back(static_cast<int>(k));
  }

  GridModel model;
  model.laplacian_ = kron_reduce(full, passive_indices);
  model.edges_ = std::move(edges);
  for (size_t k = 0; k < buses.size(); ++k) {
    if (!passive[k]) model.buses_.push_back(buses[k]);
  }
  if (model.buses_.size() > 1 && !is_connected_laplacian(model.laplacian_)) {
    auto components = graph_components(model.laplacian_);
    throw ModelError("retained graph is disconnected; offending component " +
                     format_component(components.front()));
  }
  return model;
}

int GridModel::index_of(int id) const {
  for (size_t k = 0; k < buses_.size(); ++k) {
    if (buses_[k].id == id) return static_cast<int>(k);
  }
  throw ModelError("bus id " + std::to_string(id) + " is not a retained bus");
}

Eigen::VectorXd GridModel::damping_vector() const {
  Eigen::VectorXd v(size());
  for (int k = 0; k < size(); ++k) v(k) = buses_[static_cast<size_t>(k)].damping;
  return v;
}

Eigen::VectorXd GridModel::inertia_floor_vector() const {
  Eigen::VectorXd v(size());
  for (int k = 0; k < size(); ++k)
    v(k) = buses_[static_cast<size_t>(k)].inertia_floor;
  return v;
}

Eigen::VectorXd GridModel::inertia_cap_vector() const {
  Eigen::VectorXd v(size());
  for (int k = 0; k < size(); ++k)
    v(k) = buses_[static_cast<size_t>(k)].inertia_cap;
  return v;
}

Eigen::VectorXd GridModel::disturbance_vector() const {
  Eigen::VectorXd v(size());
  for (int k = 0; k < size(); ++k)
    v(k) = buses_[static_cast<size_t>(k)].disturbance_weight;
  return v;
}

Eigen::VectorXd GridModel::freq_penalty_vector() const {
  Eigen::VectorXd v(size());
  for (int k = 0; k < size(); ++k)
    v(k) = buses_[static_cast<size_t>(k)].freq_penalty;
  return v;
}

}  // namespace inertia
