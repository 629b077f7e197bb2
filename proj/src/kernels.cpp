#include "vgne/kernels.hpp"

#include <exception>

namespace vgne::kernels {

namespace {

// Runs body(i) for i in [0, count). Exceptions thrown inside the parallel
// region are captured and the first one is rethrown on the calling thread.
template <class Body>
void for_each_index(std::size_t count, Exec exec, Body&& body) {
  const auto n = static_cast<long long>(count);
  if (exec == Exec::Serial) {
    for (long long i = 0; i < n; ++i) body(static_cast<std::size_t>(i));
    return;
  }
  std::exception_ptr failure;
#pragma omp parallel for schedule(static) if (count >= kParallelThreshold)
  for (long long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(vgne_kernel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

void smooth_pseudo_gradient(const GameInstance& game, const Vector& x, Vector& out, Exec exec) {
  out.resize(static_cast<Eigen::Index>(game.total_dim()));
  for_each_index(game.num_players(), exec, [&](std::size_t i) {
    Eigen::Ref<Vector> block = game.block(out, i);
    game.player(i).gradient(x, block);
  });
}

void apply_constraints(const GameInstance& game, const Vector& x, Vector& out, Exec exec) {
  const auto m = static_cast<Eigen::Index>(game.coupling_dim());
  out.resize(m * static_cast<Eigen::Index>(game.num_players()));
  for_each_index(game.num_players(), exec, [&](std::size_t i) {
    out.segment(m * static_cast<Eigen::Index>(i), m).noalias() = game.player(i).A * game.block(x, i);
  });
}

void apply_constraints_transpose(const GameInstance& game, const Vector& y, Vector& out,
                                 Exec exec) {
  const auto m = static_cast<Eigen::Index>(game.coupling_dim());
  out.resize(static_cast<Eigen::Index>(game.total_dim()));
  for_each_index(game.num_players(), exec, [&](std::size_t i) {
    game.block(out, i).noalias() =
        game.player(i).A.transpose() * y.segment(m * static_cast<Eigen::Index>(i), m);
  });
}

void edge_differences(const CommGraph& graph, std::size_t m, const Vector& per_node, Vector& out,
                      Exec exec) {
  const auto mm = static_cast<Eigen::Index>(m);
  out.resize(mm * static_cast<Eigen::Index>(graph.num_edges()));
  for_each_index(graph.num_edges(), exec, [&](std::size_t l) {
    const auto& e = graph.edges()[l];
    out.segment(mm * static_cast<Eigen::Index>(l), mm) =
        per_node.segment(mm * static_cast<Eigen::Index>(e.target), mm) -
        per_node.segment(mm * static_cast<Eigen::Index>(e.source), mm);
  });
}

void node_aggregate(const CommGraph& graph, std::size_t m, const Vector& per_edge, Vector& out,
                    Exec exec) {
  const auto mm = static_cast<Eigen::Index>(m);
  out.resize(mm * static_cast<Eigen::Index>(graph.num_nodes()));
  for_each_index(graph.num_nodes(), exec, [&](std::size_t i) {
    auto acc = out.segment(mm * static_cast<Eigen::Index>(i), mm);
    acc.setZero();
    for (const auto& inc : graph.incident(i)) {
      auto z = per_edge.segment(mm * static_cast<Eigen::Index>(inc.edge), mm);
      if (inc.sign > 0)
        acc += z;
      else
        acc -= z;
    }
  });
}

void prox_sweep(const GameInstance& game, const Vector& u, const Vector& direction, double step,
                Vector& out, Exec exec) {
  out.resize(u.size());
  for_each_index(game.num_players(), exec, [&](std::size_t i) {
    const auto& p = game.player(i);
    auto target = game.block(out, i);
    Vector v = game.block(u, i) - step * game.block(direction, i);
    if (p.nonsmooth.empty()) {
      target = v.cwiseMax(p.box.lower).cwiseMin(p.box.upper);
    } else {
      for (Eigen::Index j = 0; j < v.size(); ++j)
        target[j] = p.nonsmooth[static_cast<std::size_t>(j)].prox(v[j], step, p.box.lower[j],
                                                                 p.box.upper[j]);
    }
  });
}

}  // namespace vgne::kernels
