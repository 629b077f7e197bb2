#pragma once

#include <cstddef>
#include <vector>

#include "vgne/linalg.hpp"

namespace vgne {

/// Oriented edge source -> target, 0-based node ids.
struct Edge {
  std::size_t source = 0;
  std::size_t target = 0;
  bool operator==(const Edge&) const = default;
};

/// Connected undirected communication graph with a fixed edge orientation
/// and order. Edge l's variable z_l is owned by its source node.
class CommGraph {
 public:
  struct Incident {
    std::size_t edge;
    int sign;  // V_il: +1 if node is the target, -1 if it is the source
  };

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  /// V in {-1, 0, 1}^{N x M}.
  const Eigen::MatrixXi& incidence() const { return incidence_; }
  const std::vector<std::size_t>& in_edges(std::size_t i) const { return in_edges_[i]; }
  const std::vector<std::size_t>& out_edges(std::size_t i) const { return out_edges_[i]; }
  /// E_i in increasing edge order.
  const std::vector<Incident>& incident(std::size_t i) const { return incident_[i]; }

  /// V (x) I_m as a dense matrix, mN x mM.
  Matrix stacked_incidence(std::size_t m) const;
  /// V V' as a dense matrix.
  Matrix laplacian() const;

  friend CommGraph build_incidence(std::size_t n_nodes, std::vector<Edge> edges);

 private:
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  Eigen::MatrixXi incidence_;
  std::vector<std::vector<std::size_t>> in_edges_, out_edges_;
  std::vector<std::vector<Incident>> incident_;
};

/// Validates (n >= 2, no self loops, no duplicate undirected edges,
/// connected) and builds the incidence structure. Throws StructuralError.
CommGraph build_incidence(std::size_t n_nodes, std::vector<Edge> edges);

/// 0 -> 1 -> ... -> n-1.
CommGraph path_graph(std::size_t n);
CommGraph ring_graph(std::size_t n);

/// out_l = value_{target(l)} - value_{source(l)}, i.e. (V (x) I_m)' per_node.
Vector edge_differences(const CommGraph& graph, const Vector& per_node, std::size_t m);
/// out_i = sum_{l in E_i} V_il z_l, i.e. (V (x) I_m) per_edge.
Vector node_aggregate(const CommGraph& graph, const Vector& per_edge, std::size_t m);

}  // namespace vgne
