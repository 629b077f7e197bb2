#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "vgne/game.hpp"
#include "vgne/graph.hpp"
#include "vgne/linalg.hpp"

namespace vgne {

/// Inner tolerance mu_k for outer iteration k >= 1.
struct MuSchedule {
  enum class Kind { Zero, InverseSquare };
  Kind kind = Kind::Zero;
  double mu0 = 1.0;

  static MuSchedule zero() { return {}; }
  static MuSchedule inverse_square(double mu0 = 1.0) { return {Kind::InverseSquare, mu0}; }

  /// mu0 / k^2, or 0. k = 0 is treated as k = 1.
  double at(std::size_t k) const;
  std::string describe() const;
};

/// Local step sizes: one R_i per player, one H_i per player (m x m), one
/// W_l per edge (m x m), plus the relaxation rho.
struct AlgoParams {
  std::vector<Matrix> R;
  std::vector<Matrix> H;
  std::vector<Matrix> W;
  double rho = 1.0;
  MuSchedule mu;

  Matrix R_stacked() const;
  Matrix H_stacked() const;
  Matrix W_stacked() const;
  Matrix H_inverse_stacked() const;
  Matrix W_inverse_stacked() const;
};

/// R_i = r I, H_i = h I, W_l = w I.
AlgoParams uniform_params(const GameInstance& game, const CommGraph& graph, double r, double h,
                          double w, double rho, MuSchedule mu = {});

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Diagonal step sizes with entries uniform in the given ranges. Draw order:
/// R (player-major), then H, then W.
AlgoParams random_diagonal_params(const GameInstance& game, const CommGraph& graph,
                                  std::uint64_t seed, Range r, Range h, Range w, double rho,
                                  MuSchedule mu = {});

/// Dimensions, SPD blocks, rho in [1, 2) and a finite summable schedule.
/// Throws ValidationError naming the offending block.
void validate_params(const AlgoParams& params, const GameInstance& game, const CommGraph& graph);

/// Every H_i diagonal (needed for the exact orthant clamp).
bool has_diagonal_H(const AlgoParams& params);

}  // namespace vgne
