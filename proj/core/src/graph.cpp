#include "rigidmotion/graph.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "rigidmotion/errors.hpp"
#include "rigidmotion/linalg.hpp"

namespace rigidmotion {
namespace {

bool is_connected(int vertex_count, const std::vector<Edge>& edges) {
  std::vector<int> parent(static_cast<std::size_t>(vertex_count));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  int components = vertex_count;
  for (const Edge& e : edges) {
    const int a = find(e.tail);
    const int b = find(e.head);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

}  // namespace

SensingGraph::SensingGraph(int vertex_count, std::vector<Edge> edges)
    : vertex_count_(vertex_count), edges_(std::move(edges)) {
  if (vertex_count_ < 2) {
    throw InvalidGraph("graph needs at least 2 vertices, got " +
                       std::to_string(vertex_count_));
  }
  std::set<std::pair<int, int>> seen;
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const Edge& e = edges_[k];
    const std::string where = "edge " + std::to_string(k + 1);
    if (e.tail < 0 || e.tail >= vertex_count_ || e.head < 0 ||
        e.head >= vertex_count_) {
      throw InvalidGraph(where + ": vertex id out of range");
    }
    if (e.tail == e.head) throw InvalidGraph(where + ": self-loop");
    const auto key = std::minmax(e.tail, e.head);
    if (!seen.insert({key.first, key.second}).second) {
      throw InvalidGraph(where + ": duplicate edge");
    }
  }
  if (!is_connected(vertex_count_, edges_)) {
    throw InvalidGraph("graph is not connected");
  }
}

SensingGraph SensingGraph::from_one_based(
    int vertex_count, std::span<const std::pair<int, int>> edges) {
  std::vector<Edge> converted;
  converted.reserve(edges.size());
  for (const auto& [tail, head] : edges) converted.push_back({tail - 1, head - 1});
  return SensingGraph(vertex_count, std::move(converted));
}

std::vector<int> SensingGraph::incident_edges(int vertex) const {
  std::vector<int> out;
  for (int k = 0; k < edge_count(); ++k) {
    if (edge(k).tail == vertex || edge(k).head == vertex) out.push_back(k);
  }
  return out;
}

std::vector<int> SensingGraph::neighbors(int vertex) const {
  std::vector<int> out;
  for (const Edge& e : edges_) {
    if (e.tail == vertex) out.push_back(e.head);
    if (e.head == vertex) out.push_back(e.tail);
  }
  return out;
}

Framework::Framework(SensingGraph graph, int dimension, Eigen::VectorXd positions)
    : graph_(std::move(graph)), dimension_(dimension), positions_(std::move(positions)) {
  if (dimension_ != 2 && dimension_ != 3) {
    throw InvalidGraph("dimension must be 2 or 3, got " + std::to_string(dimension_));
  }
  if (positions_.size() != static_cast<Eigen::Index>(graph_.vertex_count()) * dimension_) {
    throw InvalidGraph("expected " + std::to_string(graph_.vertex_count() * dimension_) +
                       " stacked coordinates, got " + std::to_string(positions_.size()));
  }
}

Eigen::MatrixXd incidence_matrix(const SensingGraph& graph) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(graph.vertex_count(), graph.edge_count());
  for (int k = 0; k < graph.edge_count(); ++k) {
    b(graph.edge(k).tail, k) = 1.0;
    b(graph.edge(k).head, k) = -1.0;
  }
  return b;
}

Eigen::MatrixXd kron_identity(const Eigen::MatrixXd& m, int dimension) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows() * dimension, m.cols() * dimension);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) {
        out.block(i * dimension, j * dimension, dimension, dimension).diagonal().setConstant(m(i, j));
      }
    }
  }
  return out;
}

Eigen::VectorXd relative_positions(const Framework& fw) {
  const int m = fw.dimension();
  Eigen::VectorXd z(fw.edge_count() * m);
  for (int k = 0; k < fw.edge_count(); ++k) {
    const Edge& e = fw.graph().edge(k);
    z.segment(k * m, m) = fw.point(e.tail) - fw.point(e.head);
  }
  return z;
}

Eigen::VectorXd edge_lengths(const Framework& fw) {
  const int m = fw.dimension();
  const Eigen::VectorXd z = relative_positions(fw);
  Eigen::VectorXd lengths(fw.edge_count());
  for (int k = 0; k < fw.edge_count(); ++k) lengths(k) = z.segment(k * m, m).norm();
  return lengths;
}

Eigen::MatrixXd rigidity_matrix(const Framework& fw) {
  const int m = fw.dimension();
  const Eigen::VectorXd z = relative_positions(fw);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(fw.edge_count(), fw.agent_count() * m);
  for (int k = 0; k < fw.edge_count(); ++k) {
    const Edge& e = fw.graph().edge(k);
    r.block(k, e.tail * m, 1, m) = z.segment(k * m, m).transpose();
    r.block(k, e.head * m, 1, m) = -z.segment(k * m, m).transpose();
  }
  return r;
}

Eigen::VectorXd bearing_function(const Framework& fw) {
  const int m = fw.dimension();
  Eigen::VectorXd z = relative_positions(fw);
  for (int k = 0; k < fw.edge_count(); ++k) {
    const double len = z.segment(k * m, m).norm();
    if (len == 0.0) throw ZeroEdge("edge " + std::to_string(k + 1) + " has zero length");
    z.segment(k * m, m) /= len;
  }
  return z;
}

Eigen::MatrixXd orthogonal_projector(const Eigen::VectorXd& x) {
  const double len = x.norm();
  if (len == 0.0) throw ZeroVector("projector of the zero vector");
  const Eigen::VectorXd u = x / len;
  return Eigen::MatrixXd::Identity(x.size(), x.size()) - u * u.transpose();
}

Eigen::MatrixXd bearing_rigidity_matrix(const Framework& fw) {
  const int m = fw.dimension();
  const Eigen::VectorXd z = relative_positions(fw);
  Eigen::MatrixXd rb = Eigen::MatrixXd::Zero(fw.edge_count() * m, fw.agent_count() * m);
  for (int k = 0; k < fw.edge_count(); ++k) {
    const Eigen::VectorXd zk = z.segment(k * m, m);
    const double len = zk.norm();
    if (len == 0.0) throw ZeroEdge("edge " + std::to_string(k + 1) + " has zero length");
    const Eigen::MatrixXd block = orthogonal_projector(zk) / len;
    const Edge& e = fw.graph().edge(k);
    rb.block(k * m, e.tail * m, m, m) = block;
    rb.block(k * m, e.head * m, m, m) = -block;
  }
  return rb;
}

int expected_rigid_rank(int agent_count, int dimension) {
  // Fewer agents than the dimension span a simplex: every pair is independent.
  if (agent_count <= dimension) return agent_count * (agent_count - 1) / 2;
  return dimension * agent_count - dimension * (dimension + 1) / 2;
}

double default_rigidity_tolerance(const Framework& fw) {
  const int m = fw.dimension();
  return static_cast<double>(std::max(fw.agent_count() * m, fw.edge_count() * m)) *
         std::numeric_limits<double>::epsilon();
}

RigidityReport rigidity_report(const Framework& fw, std::optional<double> tolerance) {
  RigidityReport report;
  report.tolerance = tolerance.value_or(default_rigidity_tolerance(fw));
  const int m = fw.dimension();
  const int n = fw.agent_count();

  report.rigidity_rank = linalg::numerical_rank(rigidity_matrix(fw), report.tolerance);
  report.expected_rank = expected_rigid_rank(n, m);
  report.is_infinitesimally_rigid = report.rigidity_rank == report.expected_rank;
  report.is_minimally_rigid =
      report.is_infinitesimally_rigid && fw.edge_count() == report.expected_rank;

  report.bearing_rank = linalg::numerical_rank(bearing_rigidity_matrix(fw), report.tolerance);
  report.bearing_kernel_dim = n * m - report.bearing_rank;
  report.is_bearing_rigid = report.bearing_kernel_dim == m + 1;
  report.is_congruent_rigid = report.is_minimally_rigid && report.is_bearing_rigid;
  return report;
}

}  // namespace rigidmotion
