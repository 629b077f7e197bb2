// Serial reference vs OpenMP variant of the per-player and per-edge kernels.

#include <benchmark/benchmark.h>

#include <cstddef>
#include <memory>
#include <vector>

#include "vgne/graph.hpp"
#include "vgne/kernels.hpp"
#include "vgne/rng.hpp"

using namespace vgne;
using kernels::Exec;

namespace {

constexpr std::size_t kDim = 4;
constexpr std::size_t kM = 3;

// Player i: 1/2 |x_i|^2 + 0.1 x_i' (x_{i-1} + x_{i+1}) on a ring.
GameInstance ring_game(std::size_t n) {
  std::vector<PlayerSpec> players(n);
  Rng rng(7);
  for (std::size_t i = 0; i < n; ++i) {
    auto& p = players[i];
    p.dim = kDim;
    const Eigen::Index self = static_cast<Eigen::Index>(i * kDim);
    const Eigen::Index prev = static_cast<Eigen::Index>(((i + n - 1) % n) * kDim);
    const Eigen::Index next = static_cast<Eigen::Index>(((i + 1) % n) * kDim);
    const Eigen::Index d = static_cast<Eigen::Index>(kDim);
    p.gradient = [=](const Vector& x, Eigen::Ref<Vector> out) {
      out = x.segment(self, d) + 0.1 * (x.segment(prev, d) + x.segment(next, d));
    };
    p.A = Matrix(kM, kDim);
    for (Eigen::Index r = 0; r < p.A.rows(); ++r)
      for (Eigen::Index c = 0; c < p.A.cols(); ++c) p.A(r, c) = rng.uniform(-1.0, 1.0);
    p.b = Vector::Zero(kM);
    p.box = BoxSet(Vector::Constant(d, -1.0), Vector::Constant(d, 1.0));
  }
  return GameInstance(std::move(players), kM, CouplingKind::Equality, "bench_ring");
}

struct Fixture {
  explicit Fixture(std::size_t n) : game(ring_game(n)), graph(ring_graph(n)) {
    Rng rng(11);
    x = Vector(static_cast<Eigen::Index>(game.total_dim()));
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = rng.uniform(-1.0, 1.0);
    lam = Vector(static_cast<Eigen::Index>(n * kM));
    for (Eigen::Index j = 0; j < lam.size(); ++j) lam[j] = rng.uniform(-1.0, 1.0);
    z = Vector(static_cast<Eigen::Index>(graph.num_edges() * kM));
    for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = rng.uniform(-1.0, 1.0);
  }
  GameInstance game;
  CommGraph graph;
  Vector x, lam, z;
};

const Fixture& fixture(std::size_t n) {
  static std::vector<std::unique_ptr<Fixture>> cache;
  for (const auto& f : cache)
    if (f->game.num_players() == n) return *f;
  cache.push_back(std::make_unique<Fixture>(n));
  return *cache.back();
}

template <Exec E>
void BM_pseudo_gradient(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  Vector out;
  for (auto _ : state) {
    kernels::smooth_pseudo_gradient(f.game, f.x, out, E);
    benchmark::DoNotOptimize(out.data());
  }
}

template <Exec E>
void BM_constraints(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  Vector out, back;
  for (auto _ : state) {
    kernels::apply_constraints(f.game, f.x, out, E);
    kernels::apply_constraints_transpose(f.game, f.lam, back, E);
    benchmark::DoNotOptimize(out.data());
    benchmark::DoNotOptimize(back.data());
  }
}

template <Exec E>
void BM_graph(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  Vector diff, agg;
  for (auto _ : state) {
    kernels::edge_differences(f.graph, kM, f.lam, diff, E);
    kernels::node_aggregate(f.graph, kM, f.z, agg, E);
    benchmark::DoNotOptimize(diff.data());
    benchmark::DoNotOptimize(agg.data());
  }
}

template <Exec E>
void BM_prox_sweep(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  Vector dir, out;
  kernels::smooth_pseudo_gradient(f.game, f.x, dir, Exec::Serial);
  for (auto _ : state) {
    kernels::prox_sweep(f.game, f.x, dir, 0.1, out, E);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

#define VGNE_BENCH_PAIR(fn)                                                              \
  BENCHMARK_TEMPLATE(fn, Exec::Serial)->RangeMultiplier(8)->Range(512, 32768)->UseRealTime(); \
  BENCHMARK_TEMPLATE(fn, Exec::Parallel)->RangeMultiplier(8)->Range(512, 32768)->UseRealTime()

VGNE_BENCH_PAIR(BM_pseudo_gradient);
VGNE_BENCH_PAIR(BM_constraints);
VGNE_BENCH_PAIR(BM_graph);
VGNE_BENCH_PAIR(BM_prox_sweep);

BENCHMARK_MAIN();
