#include "vgne/admm.hpp"

#include <cmath>

#include "vgne/diagnostics.hpp"
#include "vgne/errors.hpp"
#include "vgne/kernels.hpp"
#include "vgne/rng.hpp"

namespace vgne {

IterateState initial_state(const GameInstance& game, const CommGraph& graph, std::uint64_t seed) {
  Rng rng(seed);
  IterateState s;
  s.x.resize(static_cast<Eigen::Index>(game.total_dim()));
  for (Eigen::Index j = 0; j < s.x.size(); ++j) s.x[j] = rng.uniform(game.lower()[j], game.upper()[j]);
  const auto m = static_cast<Eigen::Index>(game.coupling_dim());
  s.lambda_bar = Vector::Zero(m * static_cast<Eigen::Index>(game.num_players()));
  s.Z = Vector::Zero(m * static_cast<Eigen::Index>(graph.num_edges()));
  return s;
}

OuterStep admm_iterate(const GameInstance& game, const CommGraph& graph, const AlgoParams& params,
                       const IterateState& state, const InnerSettings& inner,
                       kernels::Exec exec) {
  const std::size_t m = game.coupling_dim();
  const auto mm = static_cast<Eigen::Index>(m);
  const double rho = params.rho;
  OuterStep out;
  out.mu = params.mu.at(state.k + 1);

  // Step 1: regularised subgame.
  Subgame sg = build_subgame_equality(game, graph, params, state.x, state.lambda_bar, state.Z);
  InnerSettings settings = inner;
  settings.exec = exec;
  out.inner = solve_subgame(sg, out.mu, settings);
  out.x_tilde = out.inner.x_tilde;

  // Step 2: local multipliers and the s_i messages.
  Vector agg, ax;
  kernels::node_aggregate(graph, m, state.Z, agg, exec);
  kernels::apply_constraints(game, out.x_tilde, ax, exec);
  IterateState& next = out.next;
  next.lambda_bar.resize(state.lambda_bar.size());
  Vector s(state.lambda_bar.size());
  for (std::size_t i = 0; i < game.num_players(); ++i) {
    const auto seg = mm * static_cast<Eigen::Index>(i);
    Vector resid = ax.segment(seg, mm) + agg.segment(seg, mm) - game.player(i).b;
    Vector hr = params.H[i] * resid;
    auto lam = state.lambda_bar.segment(seg, mm);
    next.lambda_bar.segment(seg, mm) = lam + rho * hr;
    s.segment(seg, mm) = next.lambda_bar.segment(seg, mm) / rho + ((rho - 1.0) / rho) * lam + hr;
  }

  // Step 3: edge variables, owned by the source node.
  Vector diff;
  kernels::edge_differences(graph, m, s, diff, exec);
  next.Z = state.Z;
  for (std::size_t l = 0; l < graph.num_edges(); ++l) {
    const auto seg = mm * static_cast<Eigen::Index>(l);
    next.Z.segment(seg, mm) -= rho * (params.W[l] * diff.segment(seg, mm));
  }

  next.x = state.x + rho * (out.x_tilde - state.x);
  next.k = state.k + 1;
  return out;
}

OuterStep admm_iterate_compact(const GameInstance& game, const CommGraph& graph,
                               const AlgoParams& params, const IterateState& state,
                               const InnerSettings& inner) {
  StackedSystem s = stack_system(game, graph, params);
  OuterStep out;
  out.mu = params.mu.at(state.k + 1);
  const double rho = params.rho;

  Subgame sg{&game, state.x, Vector(), params.R};
  sg.shift = s.Lambda.transpose() *
             (state.lambda_bar + s.H * (s.Lambda * state.x + s.Vbar * state.Z - s.bbar));
  out.inner = solve_subgame(sg, out.mu, inner);
  out.x_tilde = out.inner.x_tilde;

  Vector resid = s.Lambda * out.x_tilde + s.Vbar * state.Z - s.bbar;
  Vector lambda_t = state.lambda_bar + s.H * resid;
  Vector z_t = state.Z - s.W * (s.Vbar.transpose() * (lambda_t + s.H * resid));

  out.next.x = state.x + rho * (out.x_tilde - state.x);
  out.next.lambda_bar = state.lambda_bar + rho * (lambda_t - state.lambda_bar);
  out.next.Z = state.Z + rho * (z_t - state.Z);
  out.next.k = state.k + 1;
  return out;
}

namespace {

bool finite_state(const IterateState& s) {
  return s.x.allFinite() && s.lambda_bar.allFinite() && s.Z.allFinite();
}

}  // namespace

RunResult run_admm(const GameInstance& game, const CommGraph& graph, const AlgoParams& params,
                   const InnerSettings& inner, const RunOptions& options, IterateState start) {
  if (game.kind() != CouplingKind::Equality)
    throw PreconditionError("the ADMM solver needs an equality-coupled game");
  validate_params(params, game, graph);
  StepSizeReport rep = check_step_sizes_equality(params, game, graph);
  if (!rep.ok) throw ValidationError(rep.message);
  if (options.trace_stride == 0) throw PreconditionError("trace stride must be >= 1");
  InnerSettings settings = resolve_inner_settings(inner, game);

  const std::size_t m = game.coupling_dim();
  RunResult result;
  result.state = std::move(start);
  for (std::size_t it = 1; it <= options.stop.max_iter; ++it) {
    OuterStep step;
    try {
      step = admm_iterate(game, graph, params, result.state, settings, settings.exec);
    } catch (const NumericError& e) {
      throw DivergenceError(std::string("iteration ") + std::to_string(it) + ": " + e.what(), it - 1);
    }
    if (!finite_state(step.next))
      throw DivergenceError("non-finite iterate at iteration " + std::to_string(it), it - 1);
    double step_norm = (step.next.x - result.state.x).norm();
    result.state = std::move(step.next);
    result.iterations = it;
    result.inner_iterations += step.inner.certificate.iterations;
    result.final_residual = residual_Me(game, graph, result.state.x, result.state.Z, result.state.lambda_bar);
    result.converged = result.final_residual.max() <= options.stop.tol;
    if (it % options.trace_stride == 0 || result.converged || it == options.stop.max_iter) {
      TraceRow row;
      row.k = it;
      row.step_norm = step_norm;
      row.consensus_error = consensus_error(result.state.lambda_bar, m);
      row.feasibility = coupling_violation(game, result.state.x);
      row.stationarity = result.final_residual.stationarity;
      row.complementarity = 0.0;
      row.inner_iterations = step.inner.certificate.iterations;
      row.mu_k = step.mu;
      result.trace.push_back(row);
    }
    if (result.converged) break;
  }
  return result;
}

double correspondence_nu_factor(const GameInstance& game, const CommGraph& graph,
                                const AlgoParams& params) {
  StackedSystem s = stack_system(game, graph, params);
  Matrix hl = s.H * s.Lambda;
  double c1 = operator_norm(2.0 * s.W * s.Vbar.transpose() * hl);
  double c2 = operator_norm(hl - s.H * s.Vbar * s.W * s.Vbar.transpose() * hl);
  return std::sqrt(1.0 + c1 * c1 + 2.0 * c2 * c2);
}

Vector augmented_from_state(const GameInstance& game, const CommGraph& graph,
                            const AlgoParams& params, const IterateState& state) {
  StackedSystem s = stack_system(game, graph, params);
  const auto n = state.x.size(), mn = state.lambda_bar.size(), mm = state.Z.size();
  Vector w = Vector::Zero(n + 2 * mn + mm);
  w.segment(0, n) = state.x;
  w.segment(n, mn) = state.lambda_bar + s.H * (s.Lambda * state.x + s.Vbar * state.Z - s.bbar);
  w.segment(n + mn, mm) = state.Z;
  return w;
}

CorrespondenceReport correspondence_check(const GameInstance& game, const CommGraph& graph,
                                          const AlgoParams& params, const InnerSettings& inner,
                                          const CorrespondenceOptions& options) {
  validate_params(params, game, graph);
  InnerSettings settings = resolve_inner_settings(inner, game);
  StackedSystem s = stack_system(game, graph, params);
  BlockTriangularOperator op = make_pppa_Me_bar(game, graph, params, settings);
  const double nu_factor = correspondence_nu_factor(game, graph, params);
  const auto n = static_cast<Eigen::Index>(game.total_dim());
  const auto mn = s.Lambda.rows(), mm = s.Vbar.cols();

  CorrespondenceReport rep;
  IterateState admm = initial_state(game, graph, options.seed);
  Vector w = augmented_from_state(game, graph, params, admm);
  w.segment(n, mn).array() += options.eta0_perturbation;

  auto deviation = [&](const IterateState& a, const Vector& v) {
    Vector x = v.segment(0, n), eta = v.segment(n, mn), z = v.segment(n + mn, mm),
           theta = v.segment(n + mn + mm, mn);
    Vector mapped = eta - theta - s.H * (s.Lambda * x + s.Vbar * z - s.bbar);
    double dx = (a.x - x).norm() / std::max(1.0, a.x.norm());
    double dz = (a.Z - z).norm() / std::max(1.0, a.Z.norm());
    double dl = (a.lambda_bar - mapped).norm() / std::max(1.0, a.lambda_bar.norm());
    return std::max({dx, dz, dl});
  };

  rep.admm_trace.push_back(admm);
  rep.pppa_trace.push_back(w);
  rep.deviation.push_back(deviation(admm, w));
  const double rho = params.rho;
  for (std::size_t k = 1; k <= options.n_iters; ++k) {
    OuterStep step = admm_iterate(game, graph, params, admm, settings);
    admm = step.next;

    const double mu = params.mu.at(k);
    InnerResult sub = solve_subgame(op.leading_subgame(w), mu, settings);
    const Vector& x_hat = sub.x_hat ? *sub.x_hat : sub.x_tilde;
    Vector w_hat = op.complete(w, x_hat);
    Vector w_tilde = w_hat;
    Vector dx = sub.x_tilde - x_hat;
    if (dx.size() > 0 && dx.squaredNorm() > 0.0) {
      Vector dz = -2.0 * s.W * (s.Vbar.transpose() * (s.H * (s.Lambda * dx)));
      Vector shift = s.H * (s.Lambda * dx) + 0.5 * s.H * (s.Vbar * dz);
      w_tilde.segment(0, n) = sub.x_tilde;
      w_tilde.segment(n, mn) += shift;
      w_tilde.segment(n + mn, mm) += dz;
      w_tilde.segment(n + mn + mm, mn) -= shift;
    }
    if (mu > 0.0) rep.max_nu_ratio = std::max(rep.max_nu_ratio, (w_tilde - w_hat).norm() / (nu_factor * mu));
    w = w + rho * (w_tilde - w);

    rep.admm_trace.push_back(admm);
    rep.pppa_trace.push_back(w);
    rep.deviation.push_back(deviation(admm, w));
  }
  for (double d : rep.deviation) rep.max_deviation = std::max(rep.max_deviation, d);
  return rep;
}

}  // namespace vgne
