#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vgne/game.hpp"
#include "vgne/graph.hpp"
#include "vgne/inner.hpp"
#include "vgne/params.hpp"
#include "vgne/pppa.hpp"
#include "vgne/trace.hpp"

namespace vgne {

/// Primal decisions, local multipliers (mN) and edge variables (mM).
struct IterateState {
  Vector x;
  Vector lambda_bar;
  Vector Z;
  std::size_t k = 0;
};
using AdmmState = IterateState;

/// x_0 uniform in the product box (seeded), lambda_bar_0 = 0, Z_0 = 0.
IterateState initial_state(const GameInstance& game, const CommGraph& graph, std::uint64_t seed);

struct OuterStep {
  IterateState next;
  Vector x_tilde;
  InnerResult inner;
  double mu = 0.0;
};

/// One iteration computed player by player and edge by edge.
OuterStep admm_iterate(const GameInstance& game, const CommGraph& graph, const AlgoParams& params,
                       const IterateState& state, const InnerSettings& inner,
                       kernels::Exec exec = kernels::Exec::Parallel);

/// Same iteration through the stacked dense compact form.
OuterStep admm_iterate_compact(const GameInstance& game, const CommGraph& graph,
                               const AlgoParams& params, const IterateState& state,
                               const InnerSettings& inner);

struct RunResult {
  IterateState state;
  std::vector<TraceRow> trace;
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t inner_iterations = 0;
  OperatorResidual final_residual;
};

/// Iterates until every residual_Me component is <= tol or max_iter.
/// Validates parameters and step sizes first (ValidationError); throws
/// DivergenceError on a non-finite iterate.
RunResult run_admm(const GameInstance& game, const CommGraph& graph, const AlgoParams& params,
                   const InnerSettings& inner, const RunOptions& options, IterateState start);

struct CorrespondenceReport {
  /// Relative deviation of the mapping at k = 0..n_iters.
  std::vector<double> deviation;
  double max_deviation = 0.0;
  /// Worst |w_tilde - w_hat| / nu_k over the run (inexact runs only).
  double max_nu_ratio = 0.0;
  /// Augmented PPPA iterates (x, eta, Z, theta).
  std::vector<Vector> pppa_trace;
  std::vector<IterateState> admm_trace;
};

struct CorrespondenceOptions {
  std::size_t n_iters = 100;
  double eta0_perturbation = 0.0;
  std::uint64_t seed = 0;
};

/// Runs the ADMM and the augmented PPPA side by side from the mapped
/// initialisation eta_0 = lambda_0 + H(Lambda x_0 + Vbar Z_0 - b_bar),
/// theta_0 = 0, and measures
///   lambda_k vs eta_k - theta_k - H(Lambda x_k + Vbar Z_k - b_bar)
/// along with the x and Z blocks. Inexact schedules use the selection
///   eta~ = eta^ + H Lambda (x~ - x^) + 1/2 H Vbar (Z~ - Z^), theta~ = theta^ - (same).
CorrespondenceReport correspondence_check(const GameInstance& game, const CommGraph& graph,
                                          const AlgoParams& params, const InnerSettings& inner,
                                          const CorrespondenceOptions& options);

/// nu_k / mu_k for the selection above:
/// sqrt(1 + c1^2 + c2^2 + c3^2) with c1 = |2 W Vbar' H Lambda| and
/// c2 = c3 = |H Lambda - H Vbar W Vbar' H Lambda|.
double correspondence_nu_factor(const GameInstance& game, const CommGraph& graph,
                                const AlgoParams& params);

/// Maps an ADMM state to the augmented variable with theta = 0.
Vector augmented_from_state(const GameInstance& game, const CommGraph& graph,
                            const AlgoParams& params, const IterateState& state);

}  // namespace vgne
