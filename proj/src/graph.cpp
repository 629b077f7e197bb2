#include "vgne/graph.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <string>
#include <utility>

#include "vgne/errors.hpp"
#include "vgne/kernels.hpp"

namespace vgne {

CommGraph build_incidence(std::size_t n_nodes, std::vector<Edge> edges) {
  if (n_nodes < 2) throw StructuralError("communication graph needs at least 2 nodes");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t l = 0; l < edges.size(); ++l) {
    const auto& e = edges[l];
    if (e.source >= n_nodes || e.target >= n_nodes)
      throw StructuralError("edge " + std::to_string(l) + " references a missing node");
    if (e.source == e.target)
      throw StructuralError("edge " + std::to_string(l) + " is a self-loop");
    auto key = std::minmax(e.source, e.target);
    if (!seen.insert({key.first, key.second}).second)
      throw StructuralError("edge " + std::to_string(l) + " duplicates an undirected edge");
  }

  CommGraph g;
  g.num_nodes_ = n_nodes;
  g.edges_ = std::move(edges);
  const auto big_n = static_cast<Eigen::Index>(n_nodes);
  const auto big_m = static_cast<Eigen::Index>(g.edges_.size());
  g.incidence_ = Eigen::MatrixXi::Zero(big_n, big_m);
  g.in_edges_.assign(n_nodes, {});
  g.out_edges_.assign(n_nodes, {});
  g.incident_.assign(n_nodes, {});
  for (std::size_t l = 0; l < g.edges_.size(); ++l) {
    const auto& e = g.edges_[l];
    g.incidence_(static_cast<Eigen::Index>(e.source), static_cast<Eigen::Index>(l)) = -1;
    g.incidence_(static_cast<Eigen::Index>(e.target), static_cast<Eigen::Index>(l)) = 1;
    g.out_edges_[e.source].push_back(l);
    g.in_edges_[e.target].push_back(l);
    g.incident_[e.source].push_back({l, -1});
    g.incident_[e.target].push_back({l, 1});
  }

  // spanning tree by BFS
  std::vector<char> reached(n_nodes, 0);
  std::queue<std::size_t> frontier;
  reached[0] = 1;
  frontier.push(0);
  std::size_t count = 1;
  while (!frontier.empty()) {
    std::size_t i = frontier.front();
    frontier.pop();
    for (const auto& inc : g.incident_[i]) {
      const auto& e = g.edges_[inc.edge];
      std::size_t j = e.source == i ? e.target : e.source;
      if (!reached[j]) {
        reached[j] = 1;
        ++count;
        frontier.push(j);
      }
    }
  }
  if (count != n_nodes)
    throw StructuralError("communication graph is disconnected (" + std::to_string(count) + " of " +
                          std::to_string(n_nodes) + " nodes reachable from node 1)");
  return g;
}

Matrix CommGraph::stacked_incidence(std::size_t m) const {
  const auto mm = static_cast<Eigen::Index>(m);
  Matrix out = Matrix::Zero(mm * static_cast<Eigen::Index>(num_nodes_),
                            mm * static_cast<Eigen::Index>(edges_.size()));
  for (std::size_t l = 0; l < edges_.size(); ++l) {
    const auto col = mm * static_cast<Eigen::Index>(l);
    out.block(mm * static_cast<Eigen::Index>(edges_[l].source), col, mm, mm) -= Matrix::Identity(mm, mm);
    out.block(mm * static_cast<Eigen::Index>(edges_[l].target), col, mm, mm) += Matrix::Identity(mm, mm);
  }
  return out;
}

Matrix CommGraph::laplacian() const {
  Matrix v = incidence_.cast<double>();
  return v * v.transpose();
}

CommGraph path_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return build_incidence(n, std::move(edges));
}

CommGraph ring_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  if (n > 2) edges.push_back({n - 1, 0});
  return build_incidence(n, std::move(edges));
}

Vector edge_differences(const CommGraph& graph, const Vector& per_node, std::size_t m) {
  if (m == 0 || per_node.size() != static_cast<Eigen::Index>(m * graph.num_nodes()))
    throw StructuralError("edge_differences: expected " + std::to_string(graph.num_nodes()) +
                          " node blocks of length " + std::to_string(m));
  Vector out(static_cast<Eigen::Index>(m * graph.num_edges()));
  kernels::edge_differences(graph, m, per_node, out);
  return out;
}

Vector node_aggregate(const CommGraph& graph, const Vector& per_edge, std::size_t m) {
  if (m == 0 || per_edge.size() != static_cast<Eigen::Index>(m * graph.num_edges()))
    throw StructuralError("node_aggregate: expected " + std::to_string(graph.num_edges()) +
                          " edge blocks of length " + std::to_string(m));
  Vector out(static_cast<Eigen::Index>(m * graph.num_nodes()));
  kernels::node_aggregate(graph, m, per_edge, out);
  return out;
}

}  // namespace vgne
