#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "vgne/bench_games.hpp"
#include "vgne/errors.hpp"

using namespace vgne;

namespace {

void check_same_instance(const GameInstance& a, const GameInstance& b, std::uint64_t seed) {
  REQUIRE(a.num_players() == b.num_players());
  for (std::size_t i = 0; i < a.num_players(); ++i) {
    CHECK(a.player(i).A == b.player(i).A);
    CHECK(a.player(i).b == b.player(i).b);
    CHECK(a.player(i).box.upper == b.player(i).box.upper);
  }
  CHECK(a.metadata.dump() == b.metadata.dump());
  CHECK(a.lipschitz_hint == b.lipschitz_hint);
  Rng rng(seed);
  Vector x(a.total_dim());
  for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = rng.uniform(a.lower()[j], a.upper()[j]);
  CHECK(pseudo_subdifferential(a, x) == pseudo_subdifferential(b, x));
}

}  // namespace

TEST_CASE("quadratic test game closed forms") {
  QuadraticGameSpec spec;
  spec.t = (Vector(2) << 2, 1).finished();
  spec.delta = 0.5;
  spec.c = 1;
  auto eq = gen_quadratic_testgame(spec);
  auto want = oracle::quadratic_equality(spec.t, 0.5, 1.0);
  CHECK((eq.x_star - want.x).norm() <= 1e-14);
  CHECK(eq.lambda_star == doctest::Approx(want.lambda).epsilon(1e-14));
  CHECK(eq.x_star[0] == doctest::Approx(1.5));
  CHECK(eq.x_star[1] == doctest::Approx(-0.5));
  CHECK(eq.lambda_star == doctest::Approx(0.75));
  // 1.5 - 2 + 0.5 * (-0.5) + 0.75 = 0
  CHECK(eq.x_star[0] - 2 + 0.5 * eq.x_star[1] + eq.lambda_star == doctest::Approx(0.0).scale(1));

  spec.kind = CouplingKind::Inequality;
  auto in = gen_quadratic_testgame(spec);
  auto wi = oracle::quadratic_inequality(spec.t, 0.5, 1.0);
  CHECK((in.x_star - wi.x).norm() <= 1e-14);
  CHECK(in.lambda_star == doctest::Approx(0.75));

  spec.delta = 0.0;
  spec.c = 3.0;
  auto decoupled = gen_quadratic_testgame(spec);
  CHECK(decoupled.x_star == spec.t);
  CHECK(decoupled.lambda_star == 0.0);

  spec.delta = 1.5;
  CHECK_THROWS_AS(gen_quadratic_testgame(spec), PreconditionError);
}

TEST_CASE("rate control instance") {
  auto a = gen_rate_control(0);
  auto b = gen_rate_control(0);
  check_same_instance(a, b, 1);
  CHECK(a.num_players() == 15);
  CHECK(a.coupling_dim() == 16);
  CHECK(a.kind() == CouplingKind::Inequality);
  CHECK(gen_rate_control(1).metadata.dump() != a.metadata.dump());

  // b_i = C / 15 and A_i marks the user's three links.
  const auto& meta = a.metadata;
  Vector C(16), kappa(16), xi(16), chi(15);
  for (Eigen::Index j = 0; j < 16; ++j) {
    C[j] = meta["C"][static_cast<std::size_t>(j)];
    kappa[j] = meta["kappa"][static_cast<std::size_t>(j)];
    xi[j] = meta["xi"][static_cast<std::size_t>(j)];
  }
  for (Eigen::Index i = 0; i < 15; ++i) chi[i] = meta["chi"][static_cast<std::size_t>(i)];
  auto paths = rate_control_paths();
  for (std::size_t i = 0; i < 15; ++i) {
    CHECK((a.player(i).b - C / 15.0).norm() <= 1e-15);
    CHECK(a.player(i).A.sum() == 3.0);
    for (auto j : paths[i]) CHECK(a.player(i).A(static_cast<Eigen::Index>(j), 0) == 1.0);
  }

  // At x = 0 the delay d_j = kappa_j / (C_j + xi_j) is positive and the
  // gradient is -chi_i + sum over the path of d_j.
  Vector pg = pseudo_subdifferential(a, Vector::Zero(15));
  for (std::size_t i = 0; i < 15; ++i) {
    double want = -chi[static_cast<Eigen::Index>(i)];
    for (auto j : paths[i]) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double d = kappa[jj] / (C[jj] + xi[jj]);
      CHECK(d > 0.0);
      want += d;
    }
    CHECK(pg[static_cast<Eigen::Index>(i)] == doctest::Approx(want).epsilon(1e-13));
  }
}

TEST_CASE("task allocation instance") {
  auto a = gen_task_allocation(0);
  auto b = gen_task_allocation(0);
  check_same_instance(a, b, 2);
  CHECK(a.num_players() == 14);
  CHECK(a.coupling_dim() == 8);
  CHECK(a.kind() == CouplingKind::Equality);

  const auto& blue = task_allocation_blue();
  const auto& red = task_allocation_red();
  for (std::size_t i = 0; i < 14; ++i) {
    const Matrix& A = a.player(i).A;
    for (Eigen::Index c = 0; c < A.cols(); ++c) {
      int nonzero = 0;
      for (Eigen::Index r = 0; r < A.rows(); ++r) {
        if (A(r, c) != 0.0) {
          ++nonzero;
          CHECK(A(r, c) >= 0.5);
          CHECK(A(r, c) <= 1.0);
          const auto task = static_cast<std::size_t>(r + 1);
          CHECK(task == (c < 2 ? blue[i] : red[i]));
        }
      }
      CHECK(nonzero == 1);
    }
  }

  // Smooth part against central differences of the cost, at interior points
  // away from the kink at 0.
  Rng rng(6);
  for (int s = 0; s < 10; ++s) {
    Vector x(a.total_dim());
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = rng.uniform(0.1, 0.9 * a.upper()[j]);
    Vector g = smooth_pseudo_gradient(a, x);
    for (std::size_t i = 0; i < 14; ++i) {
      for (Eigen::Index c = 0; c < 4; ++c) {
        const auto j = static_cast<Eigen::Index>(a.offset(i)) + c;
        double fd = oracle::central_difference(a.player(i).cost, x, j, 1e-6);
        CHECK(std::abs(g[j] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
    // Full objective including the nonsmooth term, away from its kinks.
    Vector full = pseudo_subdifferential(a, x);
    for (std::size_t i = 0; i < 14; ++i) {
      auto f = [&](const Vector& y) { return player_objective(a, i, y); };
      const auto j = static_cast<Eigen::Index>(a.offset(i));
      double fd = oracle::central_difference(f, x, j, 1e-6);
      CHECK(std::abs(full[j] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("benchmark graphs and builtin lookup") {
  CHECK(rate_control_graph().num_nodes() == 15);
  CHECK(task_allocation_graph().num_nodes() == 14);
  CHECK(generate_builtin("quadratic_inequality", 0).kind() == CouplingKind::Inequality);
  CHECK_THROWS(generate_builtin("no_such_game", 0));
}
