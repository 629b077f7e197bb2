#include <doctest.h>

#include <string>

#include "vgne/bench_games.hpp"
#include "vgne/errors.hpp"
#include "vgne/params.hpp"

using namespace vgne;

namespace {

QuadraticGame toy() {
  QuadraticGameSpec spec;
  spec.t = Vector(2);
  spec.t << 2, 1;
  spec.delta = 0.5;
  spec.c = 1;
  return gen_quadratic_testgame(spec);
}

}  // namespace

TEST_CASE("inverse-square schedule") {
  auto mu = MuSchedule::inverse_square(2.0);
  CHECK(mu.at(1) == 2.0);
  CHECK(mu.at(4) == 2.0 / 16.0);
  CHECK(mu.at(0) == mu.at(1));
  CHECK(MuSchedule::zero().at(7) == 0.0);
}

TEST_CASE("uniform parameters have the right shapes") {
  auto q = toy();
  auto g = path_graph(2);
  auto p = uniform_params(q.game, g, 10, 0.5, 0.5, 1.1);
  REQUIRE(p.R.size() == 2);
  REQUIRE(p.H.size() == 2);
  REQUIRE(p.W.size() == 1);
  CHECK(p.R_stacked() == 10.0 * Matrix::Identity(2, 2));
  CHECK(p.H_inverse_stacked() == 2.0 * Matrix::Identity(2, 2));
  CHECK(p.W_inverse_stacked()(0, 0) == 2.0);
  CHECK_NOTHROW(validate_params(p, q.game, g));
  CHECK(has_diagonal_H(p));
}

TEST_CASE("rho outside [1, 2) is rejected") {
  auto q = toy();
  auto g = path_graph(2);
  auto p = uniform_params(q.game, g, 10, 0.5, 0.5, 2.1);
  CHECK_THROWS_WITH_AS(validate_params(p, q.game, g), doctest::Contains("[1, 2)"), ValidationError);
  p.rho = 0.9;
  CHECK_THROWS_AS(validate_params(p, q.game, g), ValidationError);
  p.rho = 1.0;
  CHECK_NOTHROW(validate_params(p, q.game, g));
}

TEST_CASE("non-SPD blocks are rejected by name") {
  auto q = toy();
  auto g = path_graph(2);
  auto p = uniform_params(q.game, g, 10, 0.5, 0.5, 1.1);
  p.H[1](0, 0) = -0.5;
  CHECK_THROWS_WITH_AS(validate_params(p, q.game, g), doctest::Contains("H_2"), ValidationError);

  p = uniform_params(q.game, g, 10, 0.5, 0.5, 1.1);
  p.W[0](0, 0) = 0.0;
  CHECK_THROWS_WITH_AS(validate_params(p, q.game, g), doctest::Contains("W_1"), ValidationError);

  p = uniform_params(q.game, g, 10, 0.5, 0.5, 1.1);
  p.R[0] = Matrix::Ones(2, 2);
  CHECK_THROWS_AS(validate_params(p, q.game, g), ValidationError);
}

TEST_CASE("random diagonal parameters") {
  auto game = gen_task_allocation(0);
  auto g = task_allocation_graph();
  auto a = random_diagonal_params(game, g, 3, {4, 8}, {0.2, 0.4}, {0.2, 0.4}, 1.1);
  auto b = random_diagonal_params(game, g, 3, {4, 8}, {0.2, 0.4}, {0.2, 0.4}, 1.1);
  for (std::size_t i = 0; i < a.R.size(); ++i) {
    CHECK(a.R[i] == b.R[i]);
    const Vector d = a.R[i].diagonal();
    CHECK(a.R[i] == Matrix(d.asDiagonal()));
    CHECK(d.minCoeff() >= 4.0);
    CHECK(d.maxCoeff() < 8.0);
  }
  for (const auto& H : a.H) {
    CHECK(H.diagonal().minCoeff() >= 0.2);
    CHECK(H.diagonal().maxCoeff() < 0.4);
  }
  CHECK(a.W.size() == g.num_edges());
  CHECK_NOTHROW(validate_params(a, game, g));
}
