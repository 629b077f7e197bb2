#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vgne/linalg.hpp"

namespace vgne {

/// Axis-aligned box {v : lower <= v <= upper} with nonempty interior.
struct BoxSet {
  Vector lower;
  Vector upper;

  BoxSet() = default;
  /// Throws StructuralError on length mismatch and PreconditionError unless
  /// lower[j] < upper[j] for every j.
  BoxSet(Vector lower, Vector upper);

  std::size_t dim() const { return static_cast<std::size_t>(lower.size()); }
  bool contains(const Vector& v, double slack = 0.0) const;
  /// Box grown by `fraction` of its width on both sides.
  BoxSet inflated(double fraction) const;
};

/// Componentwise clamp onto the box.
Vector project_box(const BoxSet& box, const Vector& v);

/// Scalar convex function u -> max_k (a_k u^2 + b_k u + c_k) with a_k >= 0.
class MaxOfQuadratics {
 public:
  struct Branch {
    double quadratic = 0.0;
    double linear = 0.0;
    double constant = 0.0;
  };

  explicit MaxOfQuadratics(std::vector<Branch> branches);

  double value(double u) const;
  /// Derivative of the first listed branch attaining the maximum.
  double subgradient(double u) const;
  /// argmin over [lo, hi] of step * value(u) + (u - v)^2 / 2, solved exactly
  /// by enumerating the pieces between branch crossings.
  double prox(double v, double step, double lo, double hi) const;

  const std::vector<Branch>& branches() const { return branches_; }

 private:
  std::vector<Branch> branches_;
};

/// Writes the gradient of player i's smooth cost w.r.t. its own block, given
/// the full stacked decision.
using GradientOracle = std::function<void(const Vector& x, Eigen::Ref<Vector> out)>;
using CostOracle = std::function<double(const Vector& x)>;
/// argmin over the player's box of
///   f_i(u, x_{-i}) + 1/2 |u - anchor|^2_W + shift' u.
using BestResponseOracle =
    std::function<void(const Vector& x, const Matrix& prox_weight, const Vector& anchor,
                       const Vector& shift, Eigen::Ref<Vector> out)>;

struct PlayerSpec {
  std::size_t dim = 0;
  /// Smooth part g_i of the objective f_i = g_i + sum_j nonsmooth[j].
  GradientOracle gradient;
  CostOracle cost;
  /// Empty, or one separable term per coordinate.
  std::vector<MaxOfQuadratics> nonsmooth;
  BestResponseOracle best_response;
  Matrix A;  // m x dim
  Vector b;  // m
  BoxSet box;
};

enum class CouplingKind { Equality, Inequality };

std::string_view to_string(CouplingKind kind);
CouplingKind coupling_kind_from_string(std::string_view text);

/// N players with private boxes coupled through sum_i A_i x_i (= or <=) sum_i b_i.
/// Immutable after construction.
class GameInstance {
 public:
  GameInstance(std::vector<PlayerSpec> players, std::size_t coupling_dim, CouplingKind kind,
               std::string name = {});

  std::size_t num_players() const { return players_.size(); }
  std::size_t total_dim() const { return total_dim_; }
  std::size_t coupling_dim() const { return coupling_dim_; }
  CouplingKind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  const PlayerSpec& player(std::size_t i) const { return players_[i]; }
  std::size_t offset(std::size_t i) const { return offsets_[i]; }
  std::size_t dim(std::size_t i) const { return players_[i].dim; }

  auto block(const Vector& x, std::size_t i) const {
    return x.segment(static_cast<Eigen::Index>(offsets_[i]),
                     static_cast<Eigen::Index>(players_[i].dim));
  }
  auto block(Vector& x, std::size_t i) const {
    return x.segment(static_cast<Eigen::Index>(offsets_[i]),
                     static_cast<Eigen::Index>(players_[i].dim));
  }

  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  bool has_nonsmooth() const { return has_nonsmooth_; }

  /// [A_1 ... A_N], m x n.
  Matrix coupling_matrix() const;
  /// sum_i b_i.
  Vector coupling_rhs() const;
  /// blkdiag(A_1, ..., A_N), mN x n.
  Matrix stacked_constraints() const;
  /// col(b_1, ..., b_N).
  Vector stacked_rhs() const;

  /// Euclidean projection onto the product box.
  Vector project(const Vector& x) const;
  /// prox of step * (nonsmooth terms + indicator of the product box).
  Vector prox(const Vector& v, double step) const;

  /// Lipschitz estimate of the smooth pseudo-gradient supplied by a generator.
  std::optional<double> lipschitz_hint;
  /// Free-form generator echo written into instance files.
  nlohmann::json metadata = nlohmann::json::object();

 private:
  std::vector<PlayerSpec> players_;
  std::vector<std::size_t> offsets_;
  std::size_t total_dim_ = 0;
  std::size_t coupling_dim_ = 0;
  CouplingKind kind_;
  std::string name_;
  Vector lower_, upper_;
  bool has_nonsmooth_ = false;
};

/// col_i(selection of d_i f_i(x_i, x_{-i})). Throws NumericError on
/// non-finite oracle output and StructuralError on a length mismatch.
Vector pseudo_subdifferential(const GameInstance& game, const Vector& x);

/// Smooth part only: col_i(grad_i g_i).
Vector smooth_pseudo_gradient(const GameInstance& game, const Vector& x);

/// f_i(x) = cost_i(x) + nonsmooth terms. Requires the cost oracle.
double player_objective(const GameInstance& game, std::size_t i, const Vector& x);

struct MonotonicityReport {
  double min_inner_product = 0.0;
  std::size_t violations = 0;
  std::size_t pairs = 0;
};

/// Sampled audit of <x - y, F(x) - F(y)> >= -tol over uniform pairs in the box.
MonotonicityReport check_monotonicity_samples(const GameInstance& game, std::size_t n_pairs,
                                              std::uint64_t seed, double tol = 1e-9);

/// max |F(x) - F(y)| / |x - y| over sampled pairs of the smooth pseudo-gradient.
double estimate_lipschitz(const GameInstance& game, std::size_t n_pairs, std::uint64_t seed);

/// Emits a warning through the installed sink (stderr by default).
void warn(const std::string& message);
void set_warning_sink(std::function<void(const std::string&)> sink);

}  // namespace vgne
