#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "vgne/game.hpp"
#include "vgne/graph.hpp"
#include "vgne/inner.hpp"
#include "vgne/linalg.hpp"
#include "vgne/params.hpp"

namespace vgne {

struct ResolventResult {
  Vector point;        ///< the (possibly inexact) resolvent point
  double bound = 0.0;  ///< certified bound on its distance to the exact one
  InnerCertificate inner;
  /// Exact resolvent point when the inner solver produced one.
  std::optional<Vector> exact;
};

/// A maximally monotone operator M together with an SPD preconditioner Phi;
/// resolvent(w, nu) returns w_hat with Phi (w - w_hat) in M w_hat, up to nu.
class PreconditionedOperator {
 public:
  virtual ~PreconditionedOperator() = default;
  virtual Eigen::Index dim() const = 0;
  virtual const Matrix& phi() const = 0;
  virtual ResolventResult resolvent(const Vector& w, double nu) const = 0;
};

/// M(w) = M w + c with M monotone. Dense solve; desk scale only.
class LinearOperatorResolvent : public PreconditionedOperator {
 public:
  LinearOperatorResolvent(Matrix m, Vector c, Matrix phi);
  Eigen::Index dim() const override { return phi_.rows(); }
  const Matrix& phi() const override { return phi_; }
  ResolventResult resolvent(const Vector& w, double nu) const override;

 private:
  Matrix m_;
  Vector c_;
  Matrix phi_;
  Eigen::PartialPivLU<Matrix> lu_;
};

enum class BlockKind { Subgame, Linear, Orthant };

/// M(w) = K w + c + S(w) with K skew and S block separable: the game's
/// N + dF on a leading Subgame block, nothing on Linear blocks and the
/// normal cone of the orthant on Orthant blocks. Phi + K must be block
/// lower-triangular, so the resolvent is a forward substitution.
class BlockTriangularOperator : public PreconditionedOperator {
 public:
  struct Block {
    BlockKind kind;
    Eigen::Index size;
  };

  BlockTriangularOperator(std::vector<Block> blocks, Matrix phi, Matrix skew, Vector offset,
                          const GameInstance* game = nullptr,
                          std::vector<Matrix> subgame_weights = {}, InnerSettings inner = {});

  Eigen::Index dim() const override { return phi_.rows(); }
  const Matrix& phi() const override { return phi_; }
  const Matrix& skew() const { return skew_; }
  const Vector& offset() const { return offset_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  Eigen::Index block_offset(std::size_t j) const { return starts_[j]; }

  ResolventResult resolvent(const Vector& w, double nu) const override;

  /// Phi w - c.
  Vector rhs(const Vector& w) const;
  /// Subgame whose solution is the leading block of the resolvent at w.
  Subgame leading_subgame(const Vector& w) const;
  /// Forward substitution for blocks 1.. given the leading block.
  Vector complete(const Vector& w, const Vector& leading) const;
  /// Upper bound on |w_tilde - w_hat| / |x_tilde - x_hat| for the forward
  /// substitution.
  double propagation_gain() const { return gain_; }
  /// K w + c.
  Vector linear_part(const Vector& w) const;
  /// Largest per-block violation of Phi (w - w_hat) in M w_hat.
  double resolvent_residual(const Vector& w, const Vector& w_hat) const;

 private:
  std::vector<Block> blocks_;
  std::vector<Eigen::Index> starts_;
  Matrix phi_, skew_, lower_;
  Vector offset_;
  const GameInstance* game_;
  std::vector<Matrix> weights_;
  InnerSettings inner_;
  std::vector<Eigen::LLT<Matrix>> diag_solvers_;
  double gain_ = 1.0;
};

struct PppaStep {
  Vector next;
  ResolventResult resolvent;
};

/// w_{k+1} = w_k + rho (w_tilde - w_k) with |w_tilde - w_hat| <= nu.
/// Throws PreconditionError unless rho in [1, 2) and InexactnessError if the
/// resolvent cannot certify nu.
PppaStep pppa_step(const PreconditionedOperator& op, const Vector& w, double nu, double rho);

/// Dense stacked data shared by the assembly routines.
struct StackedSystem {
  Matrix Lambda;  ///< blkdiag(A_i), mN x n
  Matrix Vbar;    ///< V (x) I_m, mN x mM
  Vector bbar;    ///< col(b_i)
  Matrix R, H, W, H_inv, W_inv;
};

StackedSystem stack_system(const GameInstance& game, const CommGraph& graph,
                           const AlgoParams& params);

/// Linear part of M^e and M^i on (x, Z, lambda_bar); both share it.
Matrix assemble_skew_M(const GameInstance& game, const CommGraph& graph);
/// Constant part (0, 0, b_bar).
Vector assemble_offset_M(const GameInstance& game, const CommGraph& graph);
/// Linear part of the augmented equality operator on (x, eta, Z, theta).
Matrix assemble_skew_Me_bar(const GameInstance& game, const CommGraph& graph);
/// Constant part (0, b_bar, 0, -b_bar).
Vector assemble_offset_Me_bar(const GameInstance& game, const CommGraph& graph);

struct StepSizeReport {
  bool ok = false;
  /// Equality: lambda_min(R - Lambda' H Lambda), lambda_min(W^-1 - Vbar' H Vbar).
  /// Inequality: lambda_min(Phi^i), lambda_min of the Schur complement
  /// H^-1 - [Lambda Vbar] diag(R, W^-1)^-1 [Lambda Vbar]'.
  double margin_first = 0.0;
  double margin_second = 0.0;
  std::string message;  ///< names the failing condition when !ok
};

StepSizeReport check_step_sizes_equality(const AlgoParams& params, const GameInstance& game,
                                         const CommGraph& graph);
StepSizeReport check_step_sizes_inequality(const AlgoParams& params, const GameInstance& game,
                                           const CommGraph& graph);

/// Phi^e on (x, eta, Z, theta). With validate = true, throws ValidationError
/// when either step-size condition fails.
Matrix assemble_phi_e(const AlgoParams& params, const GameInstance& game, const CommGraph& graph,
                      bool validate = true);
/// Phi^i on (x, Z, lambda_bar).
Matrix assemble_phi_i(const AlgoParams& params, const GameInstance& game, const CommGraph& graph,
                      bool validate = true);

/// Right-hand side of the quadratic-form identity for Phi^e:
///   |H Lambda x + theta - eta|^2_{H^-1} + |H Vbar Z + theta + eta|^2_{H^-1}
///   + |x|^2_{R - Lambda' H Lambda} + |Z|^2_{W^-1 - Vbar' H Vbar}.
double phi_e_quadratic_identity(const AlgoParams& params, const GameInstance& game,
                                const CommGraph& graph, const Vector& w);

struct OperatorResidual {
  double stationarity = 0.0;
  double edge = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0;
  double max() const;
};

/// Zero-residuals of M^e at (x, Z, lambda_bar).
OperatorResidual residual_Me(const GameInstance& game, const CommGraph& graph, const Vector& x,
                             const Vector& Z, const Vector& lambda_bar);
/// Zero-residuals of M^i. Rejects negative multipliers unless told otherwise
/// (relaxed iterates with rho > 1 may dip slightly below zero).
OperatorResidual residual_Mi(const GameInstance& game, const CommGraph& graph, const Vector& x,
                             const Vector& Z, const Vector& lambda_bar,
                             bool require_nonnegative = true);

/// PPPA operators for the two algorithms (H must be diagonal for M^i).
BlockTriangularOperator make_pppa_Mi(const GameInstance& game, const CommGraph& graph,
                                     const AlgoParams& params, const InnerSettings& inner);
BlockTriangularOperator make_pppa_Me_bar(const GameInstance& game, const CommGraph& graph,
                                         const AlgoParams& params, const InnerSettings& inner);

}  // namespace vgne
