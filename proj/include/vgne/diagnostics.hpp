#pragma once

#include <cstddef>
#include <vector>

#include "vgne/game.hpp"
#include "vgne/linalg.hpp"

namespace vgne {

struct KktReport {
  std::vector<double> stationarity_per_player;
  double stationarity = 0.0;  ///< Euclidean norm over players
  double feasibility = 0.0;
  double consensus = 0.0;
  double complementarity = 0.0;
  bool is_variational = false;
};

/// Shared-multiplier KKT residuals for an equality game:
/// stationarity_i = |x_i - prox_i(x_i - (g_i + A_i' lambda))|,
/// feasibility = |sum A_i x_i - sum b_i|.
KktReport kkt_residual_equality(const GameInstance& game, const Vector& x, const Vector& lambda,
                                double tol = 1e-6);

/// Adds complementarity |min(lambda, sum b - sum A x)| and uses the
/// positive part of the violation as feasibility. lambda must be >= 0.
KktReport kkt_residual_inequality(const GameInstance& game, const Vector& x, const Vector& lambda,
                                  double tol = 1e-6);

/// Local-multiplier overloads: feed the mean multiplier and report the
/// consensus error alongside.
KktReport kkt_residual_local(const GameInstance& game, const Vector& x, const Vector& lambda_bar,
                             double tol = 1e-6);

/// (1/N) sum_i lambda_i.
Vector mean_multiplier(const Vector& lambda_bar, std::size_t m);

/// max_i |lambda_i - mean|.
double consensus_error(const Vector& lambda_bar, std::size_t m);

/// |sum A_i x_i - sum b_i| for equality games, |max(0, .)| for inequality.
double coupling_violation(const GameInstance& game, const Vector& x);
/// max_j (sum A x - sum b)_j, clipped at 0.
double max_coupling_violation(const GameInstance& game, const Vector& x);

struct FejerReport {
  bool monotone = true;
  double worst_violation = 0.0;  ///< max_k (d_{k+1} - d_k), clipped at 0
  std::vector<double> distances;
};

/// Checks |w_{k+1} - w*|_Phi <= |w_k - w*|_Phi + slack along the trace.
FejerReport fejer_check(const std::vector<Vector>& trace, const Matrix& phi, const Vector& w_star,
                        double slack = 1e-10);

}  // namespace vgne
