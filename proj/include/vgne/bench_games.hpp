#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "vgne/game.hpp"
#include "vgne/graph.hpp"

namespace vgne {

struct QuadraticGameSpec {
  Vector t = Vector::Constant(2, 0.0);
  double delta = 0.0;
  double c = 0.0;
  CouplingKind kind = CouplingKind::Equality;
  double box_halfwidth = 10.0;
};

struct QuadraticGame {
  GameInstance game;
  Vector x_star;
  double lambda_star = 0.0;
};

/// Two scalar players, f_i = 1/2 (x_i - t_i)^2 + delta x_i x_{-i}, coupling
/// x_1 + x_2 (= or <=) c with b_i = c/2, A_i = 1, boxes [-w, w]. The closed
/// form solution is returned alongside. |delta| > 1 is rejected.
QuadraticGame gen_quadratic_testgame(const QuadraticGameSpec& spec);

/// Player i's smooth cost is 1/2 x' Q_i x + q_i' x restricted to its own
/// block: its gradient is rows(Q_i) x + q_i where rows are player i's rows of Q.
struct AffinePlayer {
  Matrix Q_rows;  ///< n_i x n
  Vector q;       ///< n_i
  Matrix A;
  Vector b;
  BoxSet box;
};

GameInstance make_affine_game(std::vector<AffinePlayer> players, std::size_t m, CouplingKind kind,
                              std::string name = "affine");

/// All objectives identically zero.
GameInstance make_zero_game(std::vector<std::size_t> dims, std::vector<Matrix> A,
                            std::vector<Vector> b, std::vector<BoxSet> boxes, CouplingKind kind);

/// Paths {i, i+1, (i+7) mod 16} (0-based links) for the 15 users.
std::vector<std::vector<std::size_t>> rate_control_paths();

/// 15 users, 16 links, inequality coupling, b_i = C/15.
GameInstance gen_rate_control(std::uint64_t seed);

/// Fixed worker -> task pattern (1-based tasks): coordinates 1-2 of
/// worker i go to blue[i], coordinates 3-4 to red[i].
const std::vector<std::size_t>& task_allocation_blue();
const std::vector<std::size_t>& task_allocation_red();

/// 14 workers with 4 outputs, 8 tasks, equality coupling, b_i = C/15.
GameInstance gen_task_allocation(std::uint64_t seed);

/// Communication graphs used with the two benchmark games.
CommGraph rate_control_graph();
CommGraph task_allocation_graph();

/// Generator lookup by name ("rate_control", "task_allocation",
/// "quadratic_equality", "quadratic_inequality").
GameInstance generate_builtin(const std::string& name, std::uint64_t seed);

}  // namespace vgne
