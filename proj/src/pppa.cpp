#include "vgne/pppa.hpp"

#include <cmath>
#include <sstream>

#include "vgne/errors.hpp"
#include "vgne/kernels.hpp"

namespace vgne {

LinearOperatorResolvent::LinearOperatorResolvent(Matrix m, Vector c, Matrix phi)
    : m_(std::move(m)), c_(std::move(c)), phi_(std::move(phi)) {
  if (m_.rows() != phi_.rows() || m_.cols() != phi_.cols() || c_.size() != phi_.rows())
    throw StructuralError("linear operator, offset and preconditioner sizes differ");
  if (!is_spd(phi_)) throw ValidationError("preconditioner is not symmetric positive definite");
  lu_.compute(phi_ + m_);
}

ResolventResult LinearOperatorResolvent::resolvent(const Vector& w, double) const {
  ResolventResult r;
  r.point = lu_.solve(phi_ * w - c_);
  r.exact = r.point;
  return r;
}

BlockTriangularOperator::BlockTriangularOperator(std::vector<Block> blocks, Matrix phi,
                                                 Matrix skew, Vector offset,
                                                 const GameInstance* game,
                                                 std::vector<Matrix> subgame_weights,
                                                 InnerSettings inner)
    : blocks_(std::move(blocks)),
      phi_(std::move(phi)),
      skew_(std::move(skew)),
      offset_(std::move(offset)),
      game_(game),
      weights_(std::move(subgame_weights)),
      inner_(inner) {
  if (blocks_.empty()) throw StructuralError("operator needs at least one block");
  Eigen::Index total = 0;
  for (const auto& b : blocks_) {
    starts_.push_back(total);
    total += b.size;
  }
  if (phi_.rows() != total || phi_.cols() != total || skew_.rows() != total ||
      skew_.cols() != total || offset_.size() != total)
    throw StructuralError("block sizes do not match the preconditioner");
  if ((skew_ + skew_.transpose()).cwiseAbs().maxCoeff() != 0.0)
    throw StructuralError("linear part is not skew-symmetric");
  lower_ = phi_ + skew_;
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    for (std::size_t i = j + 1; i < blocks_.size(); ++i) {
      if (lower_.block(starts_[j], starts_[i], blocks_[j].size, blocks_[i].size).cwiseAbs().maxCoeff() != 0.0)
        throw StructuralError("Phi + K is not block lower-triangular");
    }
    if (j > 0 && blocks_[j].kind == BlockKind::Subgame)
      throw StructuralError("only the leading block may be a subgame");
  }

  if (blocks_[0].kind == BlockKind::Subgame) {
    if (game_ == nullptr) throw StructuralError("subgame block needs a game");
    if (static_cast<Eigen::Index>(game_->total_dim()) != blocks_[0].size)
      throw StructuralError("subgame block size differs from the game dimension");
    Matrix weight = block_diagonal(weights_);
    if (weight.rows() != blocks_[0].size ||
        (weight - lower_.topLeftCorner(blocks_[0].size, blocks_[0].size)).cwiseAbs().maxCoeff() != 0.0)
      throw StructuralError("leading diagonal block must equal the subgame proximal weight");
    if (!inner_.lipschitz && !inner_.gamma) inner_ = resolve_inner_settings(inner_, *game_);
  }

  std::vector<double> gains(blocks_.size(), 0.0);
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    Matrix d = lower_.block(starts_[j], starts_[j], blocks_[j].size, blocks_[j].size);
    if (!is_spd(d))
      throw ValidationError("diagonal block " + std::to_string(j + 1) + " of Phi + K is not SPD");
    if (blocks_[j].kind == BlockKind::Orthant && !d.isDiagonal(0.0))
      throw ValidationError("orthant block needs a diagonal weight");
    diag_solvers_.emplace_back(d);
    if (j == 0) {
      gains[0] = 1.0;
      continue;
    }
    double incoming = 0.0;
    for (std::size_t i = 0; i < j; ++i)
      incoming += operator_norm(lower_.block(starts_[j], starts_[i], blocks_[j].size, blocks_[i].size)) * gains[i];
    gains[j] = incoming / min_eigenvalue(d);
  }
  double sq = 0.0;
  for (double g : gains) sq += g * g;
  gain_ = std::sqrt(sq);
}

Vector BlockTriangularOperator::rhs(const Vector& w) const { return phi_ * w - offset_; }

Vector BlockTriangularOperator::linear_part(const Vector& w) const { return skew_ * w + offset_; }

Subgame BlockTriangularOperator::leading_subgame(const Vector& w) const {
  if (blocks_[0].kind != BlockKind::Subgame) throw PreconditionError("leading block is not a subgame");
  const auto n = blocks_[0].size;
  Vector r = rhs(w).head(n);
  Vector anchor = w.head(n);
  Subgame sg{game_, anchor, Vector(n), weights_};
  Vector weighted(n);
  for (std::size_t i = 0; i < game_->num_players(); ++i)
    game_->block(weighted, i).noalias() = weights_[i] * game_->block(anchor, i);
  sg.shift = weighted - r;
  return sg;
}

Vector BlockTriangularOperator::complete(const Vector& w, const Vector& leading) const {
  Vector r = rhs(w);
  Vector out(dim());
  std::size_t first = 0;
  if (blocks_[0].kind == BlockKind::Subgame) {
    if (leading.size() != blocks_[0].size) throw StructuralError("leading block length mismatch");
    out.head(blocks_[0].size) = leading;
    first = 1;
  }
  for (std::size_t j = first; j < blocks_.size(); ++j) {
    Vector rj = r.segment(starts_[j], blocks_[j].size);
    for (std::size_t i = 0; i < j; ++i)
      rj.noalias() -= lower_.block(starts_[j], starts_[i], blocks_[j].size, blocks_[i].size) *
                      out.segment(starts_[i], blocks_[i].size);
    if (blocks_[j].kind == BlockKind::Orthant) {
      Vector d = lower_.block(starts_[j], starts_[j], blocks_[j].size, blocks_[j].size).diagonal();
      out.segment(starts_[j], blocks_[j].size) = rj.cwiseQuotient(d).cwiseMax(0.0);
    } else {
      out.segment(starts_[j], blocks_[j].size) = diag_solvers_[j].solve(rj);
    }
  }
  return out;
}

ResolventResult BlockTriangularOperator::resolvent(const Vector& w, double nu) const {
  if (w.size() != dim()) throw StructuralError("resolvent: iterate length mismatch");
  ResolventResult res;
  if (blocks_[0].kind != BlockKind::Subgame) {
    res.point = complete(w, Vector());
    res.exact = res.point;
    return res;
  }
  double mu = nu > 0.0 ? nu / gain_ : 0.0;
  InnerResult inner = solve_subgame(leading_subgame(w), mu, inner_);
  res.inner = inner.certificate;
  res.point = complete(w, inner.x_tilde);
  if (inner.x_hat) {
    res.exact = complete(w, *inner.x_hat);
    res.bound = (res.point - *res.exact).norm();
  } else {
    res.bound = gain_ * inner.certificate.bound;
  }
  return res;
}

double BlockTriangularOperator::resolvent_residual(const Vector& w, const Vector& w_hat) const {
  Vector v = phi_ * (w - w_hat) - linear_part(w_hat);
  double worst = 0.0;
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    auto vj = v.segment(starts_[j], blocks_[j].size);
    Vector hj = w_hat.segment(starts_[j], blocks_[j].size);
    double r = 0.0;
    switch (blocks_[j].kind) {
      case BlockKind::Subgame: {
        Vector g = smooth_pseudo_gradient(*game_, hj);
        r = (hj - game_->prox(hj - (g - vj), 1.0)).norm();
        break;
      }
      case BlockKind::Linear:
        r = vj.norm();
        break;
      case BlockKind::Orthant:
        r = (hj - (hj + vj).cwiseMax(0.0)).norm();
        break;
    }
    worst = std::max(worst, r);
  }
  return worst;
}

PppaStep pppa_step(const PreconditionedOperator& op, const Vector& w, double nu, double rho) {
  if (!(rho >= 1.0 && rho < 2.0))
    throw PreconditionError("relaxation rho = " + std::to_string(rho) + " must lie in [1, 2)");
  if (!(nu >= 0.0)) throw PreconditionError("inexactness nu must be >= 0");
  PppaStep step;
  step.resolvent = op.resolvent(w, nu);
  if (step.resolvent.bound > nu * (1.0 + 1e-12))
    throw InexactnessError("resolvent certified only " + std::to_string(step.resolvent.bound) +
                               " > nu = " + std::to_string(nu),
                           step.resolvent.bound);
  step.next = w + rho * (step.resolvent.point - w);
  return step;
}

StackedSystem stack_system(const GameInstance& game, const CommGraph& graph,
                           const AlgoParams& params) {
  StackedSystem s;
  s.Lambda = game.stacked_constraints();
  s.Vbar = graph.stacked_incidence(game.coupling_dim());
  s.bbar = game.stacked_rhs();
  s.R = params.R_stacked();
  s.H = params.H_stacked();
  s.W = params.W_stacked();
  s.H_inv = params.H_inverse_stacked();
  s.W_inv = params.W_inverse_stacked();
  return s;
}

namespace {

struct Dims {
  Eigen::Index n, mn, mm;
};

Dims dims_of(const GameInstance& game, const CommGraph& graph) {
  const auto m = static_cast<Eigen::Index>(game.coupling_dim());
  return {static_cast<Eigen::Index>(game.total_dim()),
          m * static_cast<Eigen::Index>(game.num_players()),
          m * static_cast<Eigen::Index>(graph.num_edges())};
}

std::string fmt(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

Matrix assemble_skew_M(const GameInstance& game, const CommGraph& graph) {
  auto [n, mn, mm] = dims_of(game, graph);
  Matrix L = game.stacked_constraints();
  Matrix V = graph.stacked_incidence(game.coupling_dim());
  Matrix k = Matrix::Zero(n + mm + mn, n + mm + mn);
  k.block(0, n + mm, n, mn) = L.transpose();
  k.block(n, n + mm, mm, mn) = V.transpose();
  k.block(n + mm, 0, mn, n) = -L;
  k.block(n + mm, n, mn, mm) = -V;
  return k;
}

Vector assemble_offset_M(const GameInstance& game, const CommGraph& graph) {
  auto [n, mn, mm] = dims_of(game, graph);
  Vector c = Vector::Zero(n + mm + mn);
  c.tail(mn) = game.stacked_rhs();
  return c;
}

Matrix assemble_skew_Me_bar(const GameInstance& game, const CommGraph& graph) {
  auto [n, mn, mm] = dims_of(game, graph);
  Matrix L = game.stacked_constraints();
  Matrix V = graph.stacked_incidence(game.coupling_dim());
  const Eigen::Index ox = 0, oe = n, oz = n + mn, ot = n + mn + mm, total = n + 2 * mn + mm;
  Matrix k = Matrix::Zero(total, total);
  k.block(ox, oe, n, mn) = L.transpose();
  k.block(ox, ot, n, mn) = -L.transpose();
  k.block(oe, ox, mn, n) = -L;
  k.block(oe, oz, mn, mm) = -V;
  k.block(oz, oe, mm, mn) = V.transpose();
  k.block(oz, ot, mm, mn) = -V.transpose();
  k.block(ot, ox, mn, n) = L;
  k.block(ot, oz, mn, mm) = V;
  return k;
}

Vector assemble_offset_Me_bar(const GameInstance& game, const CommGraph& graph) {
  auto [n, mn, mm] = dims_of(game, graph);
  Vector c = Vector::Zero(n + 2 * mn + mm);
  Vector b = game.stacked_rhs();
  c.segment(n, mn) = b;
  c.tail(mn) = -b;
  return c;
}

StepSizeReport check_step_sizes_equality(const AlgoParams& params, const GameInstance& game,
                                         const CommGraph& graph) {
  StackedSystem s = stack_system(game, graph, params);
  StepSizeReport rep;
  Matrix p = s.R - s.Lambda.transpose() * s.H * s.Lambda;
  Matrix q = s.W_inv - s.Vbar.transpose() * s.H * s.Vbar;
  rep.margin_first = min_eigenvalue(0.5 * (p + p.transpose()));
  rep.margin_second = min_eigenvalue(0.5 * (q + q.transpose()));
  rep.ok = rep.margin_first > 0.0 && rep.margin_second > 0.0;
  if (!(rep.margin_first > 0.0))
    rep.message = "R - Lambda' H Lambda not positive definite: min eig " + fmt(rep.margin_first);
  else if (!(rep.margin_second > 0.0))
    rep.message = "W^-1 - Vbar' H Vbar not positive definite: min eig " + fmt(rep.margin_second);
  return rep;
}

Matrix assemble_phi_i(const AlgoParams& params, const GameInstance& game, const CommGraph& graph,
                      bool validate) {
  if (validate) {
    validate_params(params, game, graph);
    StepSizeReport rep = check_step_sizes_inequality(params, game, graph);
    if (!rep.ok) throw ValidationError(rep.message);
  }
  auto [n, mn, mm] = dims_of(game, graph);
  StackedSystem s = stack_system(game, graph, params);
  Matrix phi = Matrix::Zero(n + mm + mn, n + mm + mn);
  phi.block(0, 0, n, n) = s.R;
  phi.block(0, n + mm, n, mn) = -s.Lambda.transpose();
  phi.block(n, n, mm, mm) = s.W_inv;
  phi.block(n, n + mm, mm, mn) = -s.Vbar.transpose();
  phi.block(n + mm, 0, mn, n) = -s.Lambda;
  phi.block(n + mm, n, mn, mm) = -s.Vbar;
  phi.block(n + mm, n + mm, mn, mn) = s.H_inv;
  return phi;
}

StepSizeReport check_step_sizes_inequality(const AlgoParams& params, const GameInstance& game,
                                           const CommGraph& graph) {
  StackedSystem s = stack_system(game, graph, params);
  Matrix phi = assemble_phi_i(params, game, graph, false);
  StepSizeReport rep;
  rep.margin_first = min_eigenvalue(0.5 * (phi + phi.transpose()));
  Matrix r_inv = params.R_stacked().llt().solve(Matrix::Identity(s.R.rows(), s.R.cols()));
  Matrix schur = s.H_inv - s.Lambda * r_inv * s.Lambda.transpose() - s.Vbar * s.W * s.Vbar.transpose();
  rep.margin_second = min_eigenvalue(0.5 * (schur + schur.transpose()));
  rep.ok = rep.margin_first > 0.0;
  if (!rep.ok)
    rep.message = "Phi^i not positive definite: min eig " + fmt(rep.margin_first) +
                  " (Schur complement H^-1 - Lambda R^-1 Lambda' - Vbar W Vbar' min eig " +
                  fmt(rep.margin_second) + ")";
  return rep;
}

Matrix assemble_phi_e(const AlgoParams& params, const GameInstance& game, const CommGraph& graph,
                      bool validate) {
  if (validate) {
    validate_params(params, game, graph);
    StepSizeReport rep = check_step_sizes_equality(params, game, graph);
    if (!rep.ok) throw ValidationError(rep.message);
  }
  auto [n, mn, mm] = dims_of(game, graph);
  StackedSystem s = stack_system(game, graph, params);
  const Eigen::Index ox = 0, oe = n, oz = n + mn, ot = n + mn + mm, total = n + 2 * mn + mm;
  Matrix phi = Matrix::Zero(total, total);
  phi.block(ox, ox, n, n) = s.R;
  phi.block(ox, oe, n, mn) = -s.Lambda.transpose();
  phi.block(ox, ot, n, mn) = s.Lambda.transpose();
  phi.block(oe, ox, mn, n) = -s.Lambda;
  phi.block(oe, oe, mn, mn) = 2.0 * s.H_inv;
  phi.block(oe, oz, mn, mm) = s.Vbar;
  phi.block(oz, oe, mm, mn) = s.Vbar.transpose();
  phi.block(oz, oz, mm, mm) = s.W_inv;
  phi.block(oz, ot, mm, mn) = s.Vbar.transpose();
  phi.block(ot, ox, mn, n) = s.Lambda;
  phi.block(ot, oz, mn, mm) = s.Vbar;
  phi.block(ot, ot, mn, mn) = 2.0 * s.H_inv;
  return phi;
}

double phi_e_quadratic_identity(const AlgoParams& params, const GameInstance& game,
                                const CommGraph& graph, const Vector& w) {
  auto [n, mn, mm] = dims_of(game, graph);
  StackedSystem s = stack_system(game, graph, params);
  Vector x = w.segment(0, n), eta = w.segment(n, mn), z = w.segment(n + mn, mm),
         theta = w.segment(n + mn + mm, mn);
  Vector a = s.H * s.Lambda * x + theta - eta;
  Vector b = s.H * s.Vbar * z + theta + eta;
  return a.dot(s.H_inv * a) + b.dot(s.H_inv * b) +
         x.dot((s.R - s.Lambda.transpose() * s.H * s.Lambda) * x) +
         z.dot((s.W_inv - s.Vbar.transpose() * s.H * s.Vbar) * z);
}

double OperatorResidual::max() const {
  return std::max({stationarity, edge, feasibility, complementarity});
}

namespace {

// x - prox(x - (F(x) + Lambda' lambda_bar)), and Lambda x + Vbar Z - b_bar.
void common_residuals(const GameInstance& game, const CommGraph& graph, const Vector& x,
                      const Vector& Z, const Vector& lambda_bar, OperatorResidual& out,
                      Vector& slack) {
  const std::size_t m = game.coupling_dim();
  const auto n = static_cast<Eigen::Index>(game.total_dim());
  const auto mn = static_cast<Eigen::Index>(m * game.num_players());
  const auto mm = static_cast<Eigen::Index>(m * graph.num_edges());
  if (x.size() != n || Z.size() != mm || lambda_bar.size() != mn)
    throw StructuralError("residual: iterate has the wrong shape");
  Vector price;
  kernels::apply_constraints_transpose(game, lambda_bar, price);
  Vector g = smooth_pseudo_gradient(game, x);
  out.stationarity = (x - game.prox(x - (g + price), 1.0)).norm();
  out.edge = edge_differences(graph, lambda_bar, m).norm();
  Vector lx;
  kernels::apply_constraints(game, x, lx);
  slack = lx + node_aggregate(graph, Z, m) - game.stacked_rhs();
}

}  // namespace

OperatorResidual residual_Me(const GameInstance& game, const CommGraph& graph, const Vector& x,
                             const Vector& Z, const Vector& lambda_bar) {
  if (game.kind() != CouplingKind::Equality)
    throw PreconditionError("residual_Me needs an equality game");
  OperatorResidual r;
  Vector slack;
  common_residuals(game, graph, x, Z, lambda_bar, r, slack);
  r.feasibility = slack.norm();
  return r;
}

OperatorResidual residual_Mi(const GameInstance& game, const CommGraph& graph, const Vector& x,
                             const Vector& Z, const Vector& lambda_bar, bool require_nonnegative) {
  if (game.kind() != CouplingKind::Inequality)
    throw PreconditionError("residual_Mi needs an inequality game");
  if (require_nonnegative && lambda_bar.size() > 0 && lambda_bar.minCoeff() < 0.0)
    throw PreconditionError("residual_Mi needs nonnegative local multipliers");
  OperatorResidual r;
  Vector slack;
  common_residuals(game, graph, x, Z, lambda_bar, r, slack);
  r.feasibility = slack.cwiseMax(0.0).norm();
  r.complementarity = (lambda_bar - (lambda_bar + slack).cwiseMax(0.0)).norm();
  return r;
}

BlockTriangularOperator make_pppa_Mi(const GameInstance& game, const CommGraph& graph,
                                     const AlgoParams& params, const InnerSettings& inner) {
  if (game.kind() != CouplingKind::Inequality)
    throw PreconditionError("M^i operator needs an inequality game");
  if (!has_diagonal_H(params))
    throw ValidationError("the orthant projection needs diagonal H_i");
  auto [n, mn, mm] = dims_of(game, graph);
  return BlockTriangularOperator(
      {{BlockKind::Subgame, n}, {BlockKind::Linear, mm}, {BlockKind::Orthant, mn}},
      assemble_phi_i(params, game, graph, false), assemble_skew_M(game, graph),
      assemble_offset_M(game, graph), &game, params.R, inner);
}

BlockTriangularOperator make_pppa_Me_bar(const GameInstance& game, const CommGraph& graph,
                                         const AlgoParams& params, const InnerSettings& inner) {
  if (game.kind() != CouplingKind::Equality)
    throw PreconditionError("augmented M^e operator needs an equality game");
  auto [n, mn, mm] = dims_of(game, graph);
  return BlockTriangularOperator({{BlockKind::Subgame, n},
                                  {BlockKind::Linear, mn},
                                  {BlockKind::Linear, mm},
                                  {BlockKind::Linear, mn}},
                                 assemble_phi_e(params, game, graph, false),
                                 assemble_skew_Me_bar(game, graph),
                                 assemble_offset_Me_bar(game, graph), &game, params.R, inner);
}

}  // namespace vgne
