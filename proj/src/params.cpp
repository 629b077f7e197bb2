#include "vgne/params.hpp"

#include <cmath>

#include "vgne/errors.hpp"
#include "vgne/rng.hpp"

namespace vgne {

double MuSchedule::at(std::size_t k) const {
  if (kind == Kind::Zero) return 0.0;
  double kk = static_cast<double>(k == 0 ? 1 : k);
  return mu0 / (kk * kk);
}

std::string MuSchedule::describe() const {
  if (kind == Kind::Zero) return "zero";
  return "inverse_square(" + std::to_string(mu0) + ")";
}

Matrix AlgoParams::R_stacked() const { return block_diagonal(R); }
Matrix AlgoParams::H_stacked() const { return block_diagonal(H); }
Matrix AlgoParams::W_stacked() const { return block_diagonal(W); }

namespace {

std::vector<Matrix> inverses(const std::vector<Matrix>& blocks) {
  std::vector<Matrix> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) {
    const Vector d = b.diagonal();
    if (b == Matrix(d.asDiagonal()))
      out.push_back(d.cwiseInverse().asDiagonal());
    else
      out.push_back(b.llt().solve(Matrix::Identity(b.rows(), b.cols())));
  }
  return out;
}

}  // namespace

Matrix AlgoParams::H_inverse_stacked() const { return block_diagonal(inverses(H)); }
Matrix AlgoParams::W_inverse_stacked() const { return block_diagonal(inverses(W)); }

AlgoParams uniform_params(const GameInstance& game, const CommGraph& graph, double r, double h,
                          double w, double rho, MuSchedule mu) {
  AlgoParams p;
  const auto m = static_cast<Eigen::Index>(game.coupling_dim());
  for (std::size_t i = 0; i < game.num_players(); ++i) {
    const auto d = static_cast<Eigen::Index>(game.dim(i));
    p.R.push_back(r * Matrix::Identity(d, d));
    p.H.push_back(h * Matrix::Identity(m, m));
  }
  for (std::size_t l = 0; l < graph.num_edges(); ++l) p.W.push_back(w * Matrix::Identity(m, m));
  p.rho = rho;
  p.mu = mu;
  return p;
}

AlgoParams random_diagonal_params(const GameInstance& game, const CommGraph& graph,
                                  std::uint64_t seed, Range r, Range h, Range w, double rho,
                                  MuSchedule mu) {
  Rng rng(seed);
  AlgoParams p;
  const auto m = static_cast<Eigen::Index>(game.coupling_dim());
  auto draw = [&](Eigen::Index size, Range range) {
    Vector d(size);
    for (Eigen::Index j = 0; j < size; ++j) d[j] = rng.uniform(range.lo, range.hi);
    return Matrix(d.asDiagonal());
  };
  for (std::size_t i = 0; i < game.num_players(); ++i)
    p.R.push_back(draw(static_cast<Eigen::Index>(game.dim(i)), r));
  for (std::size_t i = 0; i < game.num_players(); ++i) p.H.push_back(draw(m, h));
  for (std::size_t l = 0; l < graph.num_edges(); ++l) p.W.push_back(draw(m, w));
  p.rho = rho;
  p.mu = mu;
  return p;
}

void validate_params(const AlgoParams& params, const GameInstance& game, const CommGraph& graph) {
  if (!(params.rho >= 1.0 && params.rho < 2.0))
    throw ValidationError("relaxation rho = " + std::to_string(params.rho) +
                          " must lie in [1, 2)");
  if (params.R.size() != game.num_players() || params.H.size() != game.num_players())
    throw ValidationError("need one R_i and one H_i per player");
  if (params.W.size() != graph.num_edges()) throw ValidationError("need one W_l per edge");
  if (graph.num_nodes() != game.num_players())
    throw ValidationError("graph has " + std::to_string(graph.num_nodes()) + " nodes but game has " +
                          std::to_string(game.num_players()) + " players");
  const auto m = static_cast<Eigen::Index>(game.coupling_dim());
  auto check = [](const Matrix& a, Eigen::Index size, const std::string& name) {
    if (a.rows() != size || a.cols() != size)
      throw ValidationError(name + " must be " + std::to_string(size) + "x" + std::to_string(size));
    if (!is_spd(a)) {
      std::string detail = is_symmetric(a) && a.allFinite()
                               ? " (min eig " + std::to_string(min_eigenvalue(a)) + ")"
                               : " (not symmetric)";
      throw ValidationError(name + " is not symmetric positive definite" + detail);
    }
  };
  for (std::size_t i = 0; i < game.num_players(); ++i) {
    check(params.R[i], static_cast<Eigen::Index>(game.dim(i)), "R_" + std::to_string(i + 1));
    check(params.H[i], m, "H_" + std::to_string(i + 1));
  }
  for (std::size_t l = 0; l < graph.num_edges(); ++l)
    check(params.W[l], m, "W_" + std::to_string(l + 1));
  if (params.mu.kind != MuSchedule::Kind::Zero &&
      !(std::isfinite(params.mu.mu0) && params.mu.mu0 > 0.0))
    throw ValidationError("inexactness schedule needs a finite mu0 > 0");
}

bool has_diagonal_H(const AlgoParams& params) {
  for (const auto& h : params.H)
    if (!h.isDiagonal(0.0)) return false;
  return true;
}

}  // namespace vgne
