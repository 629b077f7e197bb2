#include "vgne/inner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vgne/errors.hpp"

namespace vgne {

namespace {

void apply_weight(const Subgame& sg, const Vector& v, Vector& out) {
  const auto& game = *sg.game;
  out.resize(v.size());
  for (std::size_t i = 0; i < game.num_players(); ++i)
    game.block(out, i).noalias() = sg.prox_weight[i] * game.block(v, i);
}

void check_subgame(const Subgame& sg) {
  if (sg.game == nullptr) throw StructuralError("subgame has no base game");
  const auto n = static_cast<Eigen::Index>(sg.game->total_dim());
  if (sg.anchor.size() != n || sg.shift.size() != n)
    throw StructuralError("subgame anchor/shift length mismatch");
  if (sg.prox_weight.size() != sg.game->num_players())
    throw StructuralError("subgame needs one proximal weight per player");
}

}  // namespace

Vector Subgame::smooth_operator(const Vector& x) const {
  Vector out = smooth_pseudo_gradient(*game, x);
  Vector w;
  apply_weight(*this, x - anchor, w);
  out += w + shift;
  return out;
}

Vector Subgame::operator_selection(const Vector& x) const {
  Vector out = pseudo_subdifferential(*game, x);
  Vector w;
  apply_weight(*this, x - anchor, w);
  out += w + shift;
  return out;
}

double Subgame::min_weight_eigenvalue() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : prox_weight) best = std::min(best, min_eigenvalue(r));
  return best;
}

double Subgame::max_weight_eigenvalue() const {
  double best = 0.0;
  for (const auto& r : prox_weight) best = std::max(best, max_eigenvalue(r));
  return best;
}

Subgame build_subgame_equality(const GameInstance& game, const CommGraph& graph,
                               const AlgoParams& params, const Vector& x, const Vector& lambda_bar,
                               const Vector& Z) {
  if (game.kind() != CouplingKind::Equality)
    throw PreconditionError("equality subgame requested for an inequality game");
  const std::size_t m = game.coupling_dim();
  const auto mm = static_cast<Eigen::Index>(m);
  Vector agg = node_aggregate(graph, Z, m);
  Subgame sg{&game, x, Vector(x.size()), params.R};
  for (std::size_t i = 0; i < game.num_players(); ++i) {
    const auto& p = game.player(i);
    const auto seg = mm * static_cast<Eigen::Index>(i);
    Vector price = lambda_bar.segment(seg, mm) +
                   params.H[i] * (p.A * game.block(x, i) + agg.segment(seg, mm) - p.b);
    game.block(sg.shift, i).noalias() = p.A.transpose() * price;
  }
  return sg;
}

Subgame build_subgame_inequality(const GameInstance& game, const AlgoParams& params,
                                 const Vector& x, const Vector& lambda_bar) {
  if (game.kind() != CouplingKind::Inequality)
    throw PreconditionError("inequality subgame requested for an equality game");
  const auto mm = static_cast<Eigen::Index>(game.coupling_dim());
  Subgame sg{&game, x, Vector(x.size()), params.R};
  for (std::size_t i = 0; i < game.num_players(); ++i)
    game.block(sg.shift, i).noalias() =
        game.player(i).A.transpose() * lambda_bar.segment(mm * static_cast<Eigen::Index>(i), mm);
  return sg;
}

InnerSettings resolve_inner_settings(InnerSettings settings, const GameInstance& game) {
  if (!settings.lipschitz) {
    if (game.lipschitz_hint)
      settings.lipschitz = *game.lipschitz_hint;
    else
      settings.lipschitz = 1.5 * estimate_lipschitz(game, 200, 0x5eed);
  }
  return settings;
}

double inner_step(const Subgame& subgame, const InnerSettings& settings) {
  if (settings.gamma) {
    if (!(*settings.gamma > 0.0)) throw PreconditionError("inner step gamma must be positive");
    return *settings.gamma;
  }
  double lip = settings.lipschitz.value_or(0.0);
  double sigma = subgame.min_weight_eigenvalue();
  double total = lip + subgame.max_weight_eigenvalue();
  return sigma / (total * total);
}

double subgame_natural_residual(const Subgame& subgame, const Vector& x, double gamma) {
  Vector next;
  kernels::prox_sweep(*subgame.game, x, subgame.smooth_operator(x), gamma, next);
  return (x - next).norm();
}

InnerResult solve_subgame(const Subgame& subgame, double mu, const InnerSettings& given) {
  check_subgame(subgame);
  if (!(mu >= 0.0)) throw PreconditionError("inner tolerance mu must be >= 0");
  const GameInstance& game = *subgame.game;
  InnerSettings settings = given.lipschitz || given.gamma ? given : resolve_inner_settings(given, game);
  const double gamma = inner_step(subgame, settings);
  const double sigma = subgame.min_weight_eigenvalue();
  const double total_lip = settings.lipschitz.value_or(0.0) + subgame.max_weight_eigenvalue();
  const double bound_factor = (1.0 + gamma * total_lip) / (gamma * sigma);

  if (settings.method == InnerMethod::BestResponse) {
    for (std::size_t i = 0; i < game.num_players(); ++i)
      if (!game.player(i).best_response)
        throw PreconditionError("best-response inner method needs a best-response oracle for player " +
                                std::to_string(i + 1));
  }

  auto advance = [&](const Vector& u, Vector& next) {
    if (settings.method == InnerMethod::Gradient) {
      kernels::prox_sweep(game, u, subgame.smooth_operator(u), gamma, next, settings.exec);
    } else {
      next.resize(u.size());
      for (std::size_t i = 0; i < game.num_players(); ++i) {
        Eigen::Ref<Vector> out = game.block(next, i);
        game.player(i).best_response(u, subgame.prox_weight[i], game.block(subgame.anchor, i),
                                     game.block(subgame.shift, i), out);
      }
    }
    if (!next.allFinite()) throw NumericError("inner iterate became non-finite");
  };

  const Vector start = game.project(subgame.anchor);
  InnerResult result;
  result.certificate.mode = settings.mode;

  if (settings.mode == CertificateMode::Residual) {
    if (!(mu > 0.0)) throw PreconditionError("residual certificate needs mu > 0");
    Vector u = start, next, probe;
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t <= settings.max_iterations; ++t) {
      if (settings.method == InnerMethod::Gradient) {
        advance(u, next);
        bound = (u - next).norm() * bound_factor;
      } else {
        bound = subgame_natural_residual(subgame, u, gamma) * bound_factor;
      }
      if (bound <= mu) {
        result.x_tilde = u;
        result.certificate.bound = bound;
        result.certificate.iterations = t;
        return result;
      }
      if (settings.method == InnerMethod::BestResponse) advance(u, next);
      u.swap(next);
    }
    throw InexactnessError("inner solver reached " + std::to_string(settings.max_iterations) +
                               " iterations without certifying mu = " + std::to_string(mu),
                           bound);
  }

  // Oracle mode: machine-precision fixed point first.
  Vector u = start, next;
  double best_step = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0, used = 0;
  bool settled = false;
  for (; used < settings.max_iterations; ++used) {
    advance(u, next);
    double step = (next - u).norm();
    double scale = std::max(1.0, next.norm());
    u.swap(next);
    if (step <= 8.0 * std::numeric_limits<double>::epsilon() * scale) {
      settled = true;
      ++used;
      break;
    }
    if (step < best_step) {
      best_step = step;
      since_best = 0;
    } else if (++since_best >= 100 && best_step <= 1e-10 * scale) {
      settled = true;
      ++used;
      break;
    }
  }
  if (!settled)
    throw InexactnessError("inner solver reached " + std::to_string(settings.max_iterations) +
                               " iterations before reaching a fixed point",
                           best_step * bound_factor);
  result.x_hat = u;
  result.certificate.iterations = used;
  if (mu == 0.0) {
    result.x_tilde = u;
    result.certificate.bound = 0.0;
    return result;
  }
  Vector v = start;
  for (std::size_t t = 0;; ++t) {
    double dist = (v - u).norm();
    if (dist <= mu) {
      result.x_tilde = v;
      result.certificate.bound = dist;
      result.certificate.iterations += t;
      return result;
    }
    advance(v, next);
    v.swap(next);
  }
}

std::string_view to_string(CertificateMode mode) {
  return mode == CertificateMode::Oracle ? "oracle" : "residual";
}

std::string_view to_string(InnerMethod method) {
  return method == InnerMethod::Gradient ? "gradient" : "best_response";
}

}  // namespace vgne
