#pragma once

#include <Eigen/Dense>
#include <vector>

namespace inertia {

/// One retained (dynamic) bus of the reduced network. All quantities are
/// dimensionless per-unit on a common system base.
struct Bus {
  int id = 0;                     ///< original bus id (survives Kron reduction)
  double damping = 0.0;           ///< d_i > 0, damping / droop coefficient
  double inertia_floor = 0.0;     ///< existing inertia, > 0
  double inertia_cap = 0.0;       ///< installable maximum, >= floor (inf = uncapped)
  double disturbance_weight = 0;  ///< w_i >= 0, disturbance variance scale
  double freq_penalty = 1.0;      ///< s_i > 0, frequency deviation weight
};

struct WeightedEdge {
  int from = 0;  ///< bus id
  int to = 0;    ///< bus id
  double weight = 0.0;
};

/// Builds the graph Laplacian of `edges` over `n` vertices (0-based indices).
/// Duplicate edges accumulate. Off-diagonals are -b_ij, rows sum to zero.
/// Rejects negative weights, self-loops, out-of-range indices and, when
/// `require_connected` is set, disconnected graphs (the message lists one
/// offending component).
Eigen::MatrixXd build_laplacian(const std::vector<std::tuple<int, int, double>>& edges,
                                int n, bool require_connected = true);

/// Schur complement elimination of the `passive` vertex set from Laplacian L.
/// The result is again a Laplacian on the retained vertices, in the order
/// they appear in L with passive rows removed.
Eigen::MatrixXd kron_reduce(const Eigen::MatrixXd& laplacian,
                            const std::vector<int>& passive);

/// Connectivity test via the Fiedler value, thresholded at 1e-9 relative to
/// the maximum degree. Works for any PSD matrix with zero row sums.
bool is_connected_laplacian(const Eigen::MatrixXd& laplacian);

/// Connected components of the graph with an edge wherever laplacian(i,j) < 0.
std::vector<std::vector<int>> graph_components(const Eigen::MatrixXd& laplacian);

/// The reduced network: retained buses, their Laplacian, and the map back to
/// original bus ids.
class GridModel {
 public:
  /// Validates bus/edge data over all buses (ids must be unique; retained
  /// buses need d > 0, 0 < m_floor <= m_cap, w >= 0, s > 0), builds the full
  /// susceptance Laplacian, Kron-reduces the passive set, and returns the
  /// model on retained buses. `passive_ids` may be empty.
  static GridModel build(std::vector<Bus> buses,
                         std::vector<WeightedEdge> edges,
                         const std::vector<int>& passive_ids = {});

  int size() const { return static_cast<int>(buses_.size()); }
  const std::vector<Bus>& buses() const { return buses_; }
  const Eigen::MatrixXd& laplacian() const { return laplacian_; }
  /// Pre-reduction edge list (original ids), kept for provenance.
  const std::vector<WeightedEdge>& edges() const { return edges_; }

  /// Original id of retained bus k.
  int original_id(int k) const { return buses_[static_cast<size_t>(k)].id; }
  /// Retained index of an original bus id; throws ModelError if the id is
  /// passive or unknown.
  int index_of(int id) const;

  Eigen::VectorXd damping_vector() const;
  Eigen::VectorXd inertia_floor_vector() const;
  Eigen::VectorXd inertia_cap_vector() const;
  Eigen::VectorXd disturbance_vector() const;
  Eigen::VectorXd freq_penalty_vector() const;

 private:
  GridModel() = default;

  std::vector<Bus> buses_;          // retained, reduced ordering
  std::vector<WeightedEdge> edges_; // original edges over all buses
  Eigen::MatrixXd laplacian_;       // reduced
};

}  // namespace inertia
