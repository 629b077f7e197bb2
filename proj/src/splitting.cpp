#include "vgne/splitting.hpp"

#include "vgne/diagnostics.hpp"
#include "vgne/errors.hpp"
#include "vgne/kernels.hpp"

namespace vgne {

Vector project_nonneg_weighted(const Matrix& H, const Vector& v) {
  if (H.rows() != v.size() || H.cols() != v.size())
    throw StructuralError("weighted projection: size mismatch");
  if (!H.isDiagonal(0.0))
    throw PreconditionError("weighted orthant projection is only supported for diagonal H");
  return v.cwiseMax(0.0);
}

OuterStep splitting_iterate(const GameInstance& game, const CommGraph& graph,
                            const AlgoParams& params, const SplitState& state,
                            const InnerSettings& inner, StepOrder order, kernels::Exec exec) {
  const std::size_t m = game.coupling_dim();
  const auto mm = static_cast<Eigen::Index>(m);
  const double rho = params.rho;
  OuterStep out;
  out.mu = params.mu.at(state.k + 1);

  Vector z_tilde;
  auto primal = [&] {
    Subgame sg = build_subgame_inequality(game, params, state.x, state.lambda_bar);
    InnerSettings settings = inner;
    settings.exec = exec;
    out.inner = solve_subgame(sg, out.mu, settings);
    out.x_tilde = out.inner.x_tilde;
  };
  auto edges = [&] {
    Vector diff;
    kernels::edge_differences(graph, m, state.lambda_bar, diff, exec);
    z_tilde = state.Z;
    for (std::size_t l = 0; l < graph.num_edges(); ++l) {
      const auto seg = mm * static_cast<Eigen::Index>(l);
      z_tilde.segment(seg, mm) -= params.W[l] * diff.segment(seg, mm);
    }
  };
  if (order == StepOrder::PrimalFirst) {
    primal();
    edges();
  } else {
    edges();
    primal();
  }

  // Step 2 with reflected arguments.
  Vector x_ref = 2.0 * out.x_tilde - state.x;
  Vector z_ref = 2.0 * z_tilde - state.Z;
  Vector ax, agg;
  kernels::apply_constraints(game, x_ref, ax, exec);
  kernels::node_aggregate(graph, m, z_ref, agg, exec);
  Vector lambda_t(state.lambda_bar.size());
  for (std::size_t i = 0; i < game.num_players(); ++i) {
    const auto seg = mm * static_cast<Eigen::Index>(i);
    Vector v = state.lambda_bar.segment(seg, mm) +
               params.H[i] * (ax.segment(seg, mm) + agg.segment(seg, mm) - game.player(i).b);
    lambda_t.segment(seg, mm) = project_nonneg_weighted(params.H[i], v);
  }

  out.next.x = state.x + rho * (out.x_tilde - state.x);
  out.next.Z = state.Z + rho * (z_tilde - state.Z);
  out.next.lambda_bar = state.lambda_bar + rho * (lambda_t - state.lambda_bar);
  out.next.k = state.k + 1;
  return out;
}

OuterStep splitting_iterate_compact(const GameInstance& game, const CommGraph& graph,
                                    const AlgoParams& params, const SplitState& state,
                                    const InnerSettings& inner) {
  StackedSystem s = stack_system(game, graph, params);
  OuterStep out;
  out.mu = params.mu.at(state.k + 1);
  const double rho = params.rho;
  Subgame sg{&game, state.x, s.Lambda.transpose() * state.lambda_bar, params.R};
  out.inner = solve_subgame(sg, out.mu, inner);
  out.x_tilde = out.inner.x_tilde;
  Vector z_t = state.Z - s.W * (s.Vbar.transpose() * state.lambda_bar);
  Vector lambda_t = (state.lambda_bar + s.H * (s.Lambda * (2.0 * out.x_tilde - state.x) +
                                               s.Vbar * (2.0 * z_t - state.Z) - s.bbar))
                        .cwiseMax(0.0);
  out.next.x = state.x + rho * (out.x_tilde - state.x);
  out.next.Z = state.Z + rho * (z_t - state.Z);
  out.next.lambda_bar = state.lambda_bar + rho * (lambda_t - state.lambda_bar);
  out.next.k = state.k + 1;
  return out;
}

RunResult run_splitting(const GameInstance& game, const CommGraph& graph, const AlgoParams& params,
                        const InnerSettings& inner, const RunOptions& options, SplitState start,
                        ValidationPolicy policy) {
  if (game.kind() != CouplingKind::Inequality)
    throw PreconditionError("the splitting solver needs an inequality-coupled game");
  validate_params(params, game, graph);
  if (!has_diagonal_H(params))
    throw ValidationError("H_i must be diagonal for the exact weighted orthant projection");
  StepSizeReport rep = check_step_sizes_inequality(params, game, graph);
  if (!rep.ok) {
    if (policy == ValidationPolicy::Enforce) throw ValidationError(rep.message);
    warn(rep.message + "; continuing because sufficient conditions are set to warn");
  }
  if (options.trace_stride == 0) throw PreconditionError("trace stride must be >= 1");
  InnerSettings settings = resolve_inner_settings(inner, game);

  const std::size_t m = game.coupling_dim();
  RunResult result;
  result.state = std::move(start);
  for (std::size_t it = 1; it <= options.stop.max_iter; ++it) {
    OuterStep step;
    try {
      step = splitting_iterate(game, graph, params, result.state, settings, StepOrder::PrimalFirst,
                               settings.exec);
    } catch (const NumericError& e) {
      throw DivergenceError(std::string("iteration ") + std::to_string(it) + ": " + e.what(), it - 1);
    }
    if (!(step.next.x.allFinite() && step.next.Z.allFinite() && step.next.lambda_bar.allFinite()))
      throw DivergenceError("non-finite iterate at iteration " + std::to_string(it), it - 1);
    double step_norm = (step.next.x - result.state.x).norm();
    result.state = std::move(step.next);
    result.iterations = it;
    result.inner_iterations += step.inner.certificate.iterations;
    result.final_residual = residual_Mi(game, graph, result.state.x, result.state.Z,
                                        result.state.lambda_bar, false);
    result.converged = result.final_residual.max() <= options.stop.tol;
    if (it % options.trace_stride == 0 || result.converged || it == options.stop.max_iter) {
      TraceRow row;
      row.k = it;
      row.step_norm = step_norm;
      row.consensus_error = consensus_error(result.state.lambda_bar, m);
      row.feasibility = max_coupling_violation(game, result.state.x);
      row.stationarity = result.final_residual.stationarity;
      row.complementarity = result.final_residual.complementarity;
      row.inner_iterations = step.inner.certificate.iterations;
      row.mu_k = step.mu;
      result.trace.push_back(row);
    }
    if (result.converged) break;
  }
  return result;
}

Vector stack_iterate(const SplitState& state) {
  Vector w(state.x.size() + state.Z.size() + state.lambda_bar.size());
  w << state.x, state.Z, state.lambda_bar;
  return w;
}

EquivalenceReport pppa_equivalence_check(const GameInstance& game, const CommGraph& graph,
                                         const AlgoParams& params, const InnerSettings& inner,
                                         std::size_t n_iters, std::uint64_t seed) {
  validate_params(params, game, graph);
  InnerSettings settings = resolve_inner_settings(inner, game);
  BlockTriangularOperator op = make_pppa_Mi(game, graph, params, settings);
  SplitState state = initial_state(game, graph, seed);
  Vector w = stack_iterate(state);
  EquivalenceReport rep;
  rep.pppa_trace.push_back(w);
  rep.deviation.push_back(0.0);
  for (std::size_t k = 1; k <= n_iters; ++k) {
    state = splitting_iterate(game, graph, params, state, settings).next;
    w = pppa_step(op, w, params.mu.at(k), params.rho).next;
    rep.pppa_trace.push_back(w);
    rep.deviation.push_back((stack_iterate(state) - w).cwiseAbs().maxCoeff());
  }
  for (double d : rep.deviation) rep.max_deviation = std::max(rep.max_deviation, d);
  return rep;
}

}  // namespace vgne
