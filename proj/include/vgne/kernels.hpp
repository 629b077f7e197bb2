#pragma once

// Per-player and per-edge loops. Each kernel has a serial reference and an
// OpenMP variant; every output entry is written by exactly one iteration with
// a fixed summation order, so both variants agree bitwise.

#include <cstddef>

#include "vgne/game.hpp"
#include "vgne/graph.hpp"
#include "vgne/linalg.hpp"

namespace vgne::kernels {

enum class Exec { Serial, Parallel };

/// Below this many blocks the OpenMP variant runs on the calling thread.
inline constexpr std::size_t kParallelThreshold = 64;

/// col_i(grad_i g_i(x)); out has length n.
void smooth_pseudo_gradient(const GameInstance& game, const Vector& x, Vector& out,
                            Exec exec = Exec::Parallel);

/// out = Lambda x (length mN).
void apply_constraints(const GameInstance& game, const Vector& x, Vector& out,
                       Exec exec = Exec::Parallel);

/// out = Lambda' y (length n).
void apply_constraints_transpose(const GameInstance& game, const Vector& y, Vector& out,
                                 Exec exec = Exec::Parallel);

/// out_l = node_{target(l)} - node_{source(l)} (length mM).
void edge_differences(const CommGraph& graph, std::size_t m, const Vector& per_node,
                      Vector& out, Exec exec = Exec::Parallel);

/// out_i = sum_{l in E_i} V_il z_l (length mN).
void node_aggregate(const CommGraph& graph, std::size_t m, const Vector& per_edge, Vector& out,
                    Exec exec = Exec::Parallel);

/// One forward-backward sweep u <- prox_{step}(u - step * direction) per
/// player block, writing into out.
void prox_sweep(const GameInstance& game, const Vector& u, const Vector& direction, double step,
                Vector& out, Exec exec = Exec::Parallel);

}  // namespace vgne::kernels
