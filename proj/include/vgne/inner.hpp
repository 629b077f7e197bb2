#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "vgne/game.hpp"
#include "vgne/graph.hpp"
#include "vgne/kernels.hpp"
#include "vgne/linalg.hpp"
#include "vgne/params.hpp"

namespace vgne {

/// Regularised subgame: player i minimises
///   f_i(u, x_{-i}) + 1/2 |u - anchor_i|^2_{R_i} + shift_i' u  over its box,
/// whose pseudo-subdifferential F(x) + R(x - anchor) + shift is strongly
/// monotone with modulus >= lambda_min(R).
struct Subgame {
  const GameInstance* game = nullptr;
  Vector anchor;
  Vector shift;
  std::vector<Matrix> prox_weight;

  /// Smooth part of the subgame operator.
  Vector smooth_operator(const Vector& x) const;
  /// Full selection, nonsmooth terms included.
  Vector operator_selection(const Vector& x) const;
  double min_weight_eigenvalue() const;
  double max_weight_eigenvalue() const;
};

/// c_i = A_i' [lambda_i + H_i (A_i x_i + sum_l V_il z_l - b_i)].
Subgame build_subgame_equality(const GameInstance& game, const CommGraph& graph,
                               const AlgoParams& params, const Vector& x, const Vector& lambda_bar,
                               const Vector& Z);

/// c_i = A_i' lambda_i.
Subgame build_subgame_inequality(const GameInstance& game, const AlgoParams& params,
                                 const Vector& x, const Vector& lambda_bar);

enum class CertificateMode { Oracle, Residual };
enum class InnerMethod { Gradient, BestResponse };

struct InnerSettings {
  CertificateMode mode = CertificateMode::Oracle;
  InnerMethod method = InnerMethod::Gradient;
  /// Forward-backward step; derived from the weights and lipschitz if unset.
  std::optional<double> gamma;
  /// Lipschitz estimate of the smooth pseudo-gradient (without the R term).
  std::optional<double> lipschitz;
  std::size_t max_iterations = 100000;
  kernels::Exec exec = kernels::Exec::Parallel;
};

/// Fills in lipschitz from the game's hint or a sampled estimate (x1.5).
InnerSettings resolve_inner_settings(InnerSettings settings, const GameInstance& game);

struct InnerCertificate {
  CertificateMode mode = CertificateMode::Oracle;
  double bound = 0.0;  ///< certified upper bound on |x_tilde - x_hat|
  std::size_t iterations = 0;
};

struct InnerResult {
  Vector x_tilde;
  /// Machine-precision fixed point (Oracle mode only).
  std::optional<Vector> x_hat;
  InnerCertificate certificate;
};

/// Oracle mode: iterate to a machine-precision fixed point x_hat, then replay
/// and return the first iterate within mu of it (mu = 0 returns x_hat).
/// Residual mode: stop once r(u)(1 + gamma L)/(gamma sigma) <= mu, r the
/// natural residual. Throws InexactnessError if the cap is hit first.
InnerResult solve_subgame(const Subgame& subgame, double mu, const InnerSettings& settings);

/// Step used for a given subgame and settings.
double inner_step(const Subgame& subgame, const InnerSettings& settings);

/// |x - prox_gamma(x - gamma * smooth_operator(x))|.
double subgame_natural_residual(const Subgame& subgame, const Vector& x, double gamma = 1.0);

std::string_view to_string(CertificateMode mode);
std::string_view to_string(InnerMethod method);

}  // namespace vgne
