#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace rigidmotion {

/// Oriented edge between two 0-based vertex ids.
struct Edge {
  int tail = 0;
  int head = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected, simple, connected sensing topology with a fixed edge order and
/// orientation. Construction throws InvalidGraph on any violation.
class SensingGraph {
 public:
  SensingGraph(int vertex_count, std::vector<Edge> edges);

  /// Builds a graph from 1-based (tail, head) pairs as written in scenario files.
  static SensingGraph from_one_based(int vertex_count,
                                     std::span<const std::pair<int, int>> edges);

  int vertex_count() const { return vertex_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int k) const { return edges_[static_cast<std::size_t>(k)]; }

  /// Indices of the edges that have `vertex` as an endpoint, in edge order.
  std::vector<int> incident_edges(int vertex) const;
  std::vector<int> neighbors(int vertex) const;

 private:
  int vertex_count_;
  std::vector<Edge> edges_;
};

/// A sensing graph together with stacked agent positions in R^m (m = 2 or 3).
class Framework {
 public:
  Framework(SensingGraph graph, int dimension, Eigen::VectorXd positions);

  const SensingGraph& graph() const { return graph_; }
  int dimension() const { return dimension_; }
  int agent_count() const { return graph_.vertex_count(); }
  int edge_count() const { return graph_.edge_count(); }
  const Eigen::VectorXd& positions() const { return positions_; }

  Eigen::VectorXd point(int agent) const {
    return positions_.segment(agent * dimension_, dimension_);
  }

  /// Same graph and dimension, different positions.
  Framework with_positions(Eigen::VectorXd positions) const {
    return Framework(graph_, dimension_, std::move(positions));
  }

 private:
  SensingGraph graph_;
  int dimension_;
  Eigen::VectorXd positions_;
};

struct RigidityReport {
  int rigidity_rank = 0;
  int expected_rank = 0;
  bool is_infinitesimally_rigid = false;
  bool is_minimally_rigid = false;
  int bearing_rank = 0;
  int bearing_kernel_dim = 0;
  bool is_bearing_rigid = false;
  /// Minimally rigid with a bearing kernel made of translations and scaling only.
  bool is_congruent_rigid = false;
  double tolerance = 0.0;
};

/// Vertex-by-edge incidence matrix: +1 at the tail, -1 at the head.
Eigen::MatrixXd incidence_matrix(const SensingGraph& graph);

/// M ⊗ I_m.
Eigen::MatrixXd kron_identity(const Eigen::MatrixXd& m, int dimension);

/// Stacked z_k = p_tail(k) - p_head(k).
Eigen::VectorXd relative_positions(const Framework& fw);

/// Stacked edge lengths ||z_k||.
Eigen::VectorXd edge_lengths(const Framework& fw);

/// |E| x nm matrix with z_k^T in the tail block and -z_k^T in the head block.
/// Equals half the Jacobian of the squared edge-length map.
Eigen::MatrixXd rigidity_matrix(const Framework& fw);

/// Stacked unit vectors z_k / ||z_k||. Throws ZeroEdge on a zero-length edge.
Eigen::VectorXd bearing_function(const Framework& fw);

/// Jacobian of bearing_function with respect to the stacked positions.
Eigen::MatrixXd bearing_rigidity_matrix(const Framework& fw);

/// I - x̂ x̂^T. Throws ZeroVector when x = 0.
Eigen::MatrixXd orthogonal_projector(const Eigen::VectorXd& x);

/// Rank of R(z) for an infinitesimally rigid framework with n agents in R^m.
int expected_rigid_rank(int agent_count, int dimension);

/// Default rank cutoff max(nm, |E| m) * eps relative to sigma_max.
double default_rigidity_tolerance(const Framework& fw);

RigidityReport rigidity_report(const Framework& fw,
                               std::optional<double> tolerance = std::nullopt);

}  // namespace rigidmotion
