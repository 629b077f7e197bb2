#pragma once

#include <cstddef>
#include <vector>

#include "vgne/admm.hpp"
#include "vgne/game.hpp"
#include "vgne/graph.hpp"
#include "vgne/inner.hpp"
#include "vgne/params.hpp"
#include "vgne/pppa.hpp"
#include "vgne/trace.hpp"

namespace vgne {

using SplitState = IterateState;

/// Projection onto the nonnegative orthant in the H^-1 metric. Exact clamp
/// for diagonal H; anything else throws PreconditionError.
Vector project_nonneg_weighted(const Matrix& H, const Vector& v);

/// Which of the two independent first steps runs first.
enum class StepOrder { PrimalFirst, EdgeFirst };

OuterStep splitting_iterate(const GameInstance& game, const CommGraph& graph,
                            const AlgoParams& params, const SplitState& state,
                            const InnerSettings& inner, StepOrder order = StepOrder::PrimalFirst,
                            kernels::Exec exec = kernels::Exec::Parallel);

/// Stacked dense form of the same iteration.
OuterStep splitting_iterate_compact(const GameInstance& game, const CommGraph& graph,
                                    const AlgoParams& params, const SplitState& state,
                                    const InnerSettings& inner);

/// What to do when Phi^i is not positive definite. rho and SPD violations
/// are always errors.
enum class ValidationPolicy { Enforce, Warn };

/// Iterates until every residual_Mi component is <= tol or max_iter.
RunResult run_splitting(const GameInstance& game, const CommGraph& graph, const AlgoParams& params,
                        const InnerSettings& inner, const RunOptions& options, SplitState start,
                        ValidationPolicy policy = ValidationPolicy::Enforce);

struct EquivalenceReport {
  std::vector<double> deviation;  ///< max-abs difference at k = 0..n_iters
  double max_deviation = 0.0;
  std::vector<Vector> pppa_trace;  ///< (x, Z, lambda_bar) iterates
};

/// Runs the splitting iteration and PPPA on M^i with Phi^i side by side from
/// the same start.
EquivalenceReport pppa_equivalence_check(const GameInstance& game, const CommGraph& graph,
                                         const AlgoParams& params, const InnerSettings& inner,
                                         std::size_t n_iters, std::uint64_t seed = 0);

/// (x, Z, lambda_bar) stacked.
Vector stack_iterate(const SplitState& state);

}  // namespace vgne
