#include "vgne/diagnostics.hpp"

#include <cmath>

#include "vgne/errors.hpp"

namespace vgne {

namespace {

KktReport stationarity_part(const GameInstance& game, const Vector& x, const Vector& lambda) {
  if (x.size() != static_cast<Eigen::Index>(game.total_dim()))
    throw StructuralError("KKT residual: decision length mismatch");
  if (lambda.size() != static_cast<Eigen::Index>(game.coupling_dim()))
    throw StructuralError("KKT residual: multiplier length mismatch");
  Vector g = smooth_pseudo_gradient(game, x);
  Vector price(x.size());
  for (std::size_t i = 0; i < game.num_players(); ++i)
    game.block(price, i).noalias() = game.player(i).A.transpose() * lambda;
  Vector r = x - game.prox(x - (g + price), 1.0);
  KktReport rep;
  double sq = 0.0;
  for (std::size_t i = 0; i < game.num_players(); ++i) {
    double v = game.block(r, i).norm();
    rep.stationarity_per_player.push_back(v);
    sq += v * v;
  }
  rep.stationarity = std::sqrt(sq);
  return rep;
}

Vector coupling_gap(const GameInstance& game, const Vector& x) {
  Vector gap = -game.coupling_rhs();
  for (std::size_t i = 0; i < game.num_players(); ++i) gap.noalias() += game.player(i).A * game.block(x, i);
  return gap;
}

}  // namespace

KktReport kkt_residual_equality(const GameInstance& game, const Vector& x, const Vector& lambda,
                                double tol) {
  KktReport rep = stationarity_part(game, x, lambda);
  rep.feasibility = coupling_gap(game, x).norm();
  rep.is_variational = rep.stationarity <= tol && rep.feasibility <= tol;
  return rep;
}

KktReport kkt_residual_inequality(const GameInstance& game, const Vector& x, const Vector& lambda,
                                  double tol) {
  if (lambda.size() > 0 && lambda.minCoeff() < 0.0)
    throw PreconditionError("inequality KKT residual needs lambda >= 0");
  KktReport rep = stationarity_part(game, x, lambda);
  Vector gap = coupling_gap(game, x);
  rep.feasibility = gap.cwiseMax(0.0).norm();
  rep.complementarity = lambda.cwiseMin(-gap).norm();
  rep.is_variational = rep.stationarity <= tol && rep.feasibility <= tol && rep.complementarity <= tol;
  return rep;
}

KktReport kkt_residual_local(const GameInstance& game, const Vector& x, const Vector& lambda_bar,
                             double tol) {
  const std::size_t m = game.coupling_dim();
  Vector mean = mean_multiplier(lambda_bar, m);
  KktReport rep;
  if (game.kind() == CouplingKind::Equality) {
    rep = kkt_residual_equality(game, x, mean, tol);
  } else {
    // relaxed iterates may carry tiny negative entries
    rep = kkt_residual_inequality(game, x, mean.cwiseMax(0.0), tol);
  }
  rep.consensus = consensus_error(lambda_bar, m);
  rep.is_variational = rep.is_variational && rep.consensus <= tol;
  return rep;
}

Vector mean_multiplier(const Vector& lambda_bar, std::size_t m) {
  const auto mm = static_cast<Eigen::Index>(m);
  if (m == 0 || lambda_bar.size() % mm != 0)
    throw StructuralError("local multipliers are not a whole number of blocks");
  const Eigen::Index n_blocks = lambda_bar.size() / mm;
  Vector mean = Vector::Zero(mm);
  for (Eigen::Index i = 0; i < n_blocks; ++i) mean += lambda_bar.segment(i * mm, mm);
  return mean / static_cast<double>(n_blocks);
}

double consensus_error(const Vector& lambda_bar, std::size_t m) {
  Vector mean = mean_multiplier(lambda_bar, m);
  const auto mm = static_cast<Eigen::Index>(m);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < lambda_bar.size() / mm; ++i)
    worst = std::max(worst, (lambda_bar.segment(i * mm, mm) - mean).norm());
  return worst;
}

double coupling_violation(const GameInstance& game, const Vector& x) {
  Vector gap = coupling_gap(game, x);
  return game.kind() == CouplingKind::Equality ? gap.norm() : gap.cwiseMax(0.0).norm();
}

double max_coupling_violation(const GameInstance& game, const Vector& x) {
  return std::max(0.0, coupling_gap(game, x).maxCoeff());
}

FejerReport fejer_check(const std::vector<Vector>& trace, const Matrix& phi, const Vector& w_star,
                        double slack) {
  FejerReport rep;
  for (const auto& w : trace) rep.distances.push_back(weighted_norm(w - w_star, phi));
  for (std::size_t k = 1; k < rep.distances.size(); ++k) {
    double rise = rep.distances[k] - rep.distances[k - 1];
    rep.worst_violation = std::max(rep.worst_violation, rise);
    if (rise > slack) rep.monotone = false;
  }
  return rep;
}

}  // namespace vgne
