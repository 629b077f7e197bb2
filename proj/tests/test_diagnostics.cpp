#include <doctest.h>

#include <vector>

#include "oracles.hpp"
#include "vgne/bench_games.hpp"
#include "vgne/diagnostics.hpp"
#include "vgne/errors.hpp"

using namespace vgne;

namespace {

const Vector kT = (Vector(2) << 2, 1).finished();

QuadraticGame toy(CouplingKind kind, double c = 1.0) {
  QuadraticGameSpec spec;
  spec.t = kT;
  spec.delta = 0.5;
  spec.c = c;
  spec.kind = kind;
  return gen_quadratic_testgame(spec);
}

}  // namespace

TEST_CASE("equality KKT residuals") {
  auto q = toy(CouplingKind::Equality);
  auto sol = oracle::quadratic_equality(kT, 0.5, 1.0);
  Vector lam = Vector::Constant(1, sol.lambda);
  auto r = kkt_residual_equality(q.game, sol.x, lam);
  CHECK(r.stationarity <= 1e-10);
  CHECK(r.feasibility <= 1e-10);
  CHECK(r.is_variational);
  REQUIRE(r.stationarity_per_player.size() == 2);

  Vector moved = sol.x;
  moved[0] += 0.1;
  auto bad = kkt_residual_equality(q.game, moved, lam);
  CHECK(bad.stationarity > 0.01);
  CHECK_FALSE(bad.is_variational);

  // Free NE (2, 0) is feasible for c = 2, so lambda = 0 certifies it.
  auto q2 = toy(CouplingKind::Equality, 2.0);
  auto free = kkt_residual_equality(q2.game, (Vector(2) << 2, 0).finished(), Vector::Zero(1));
  CHECK(free.stationarity <= 1e-12);
  CHECK(free.feasibility <= 1e-12);
  CHECK(free.is_variational);
}

TEST_CASE("inequality KKT residuals") {
  auto q = toy(CouplingKind::Inequality);
  auto sol = oracle::quadratic_inequality(kT, 0.5, 1.0);
  auto r = kkt_residual_inequality(q.game, sol.x, Vector::Constant(1, sol.lambda));
  CHECK(r.stationarity <= 1e-10);
  CHECK(r.feasibility <= 1e-10);
  CHECK(r.complementarity <= 1e-10);

  Vector inside(2);
  inside << -1, 0.5;
  auto slack = kkt_residual_inequality(q.game, inside, Vector::Zero(1));
  CHECK(slack.feasibility == 0.0);
  CHECK(slack.complementarity == 0.0);

  Vector outside(2);
  outside << 1, 1;
  auto viol = kkt_residual_inequality(q.game, outside, Vector::Zero(1));
  CHECK(viol.feasibility == doctest::Approx(1.0));
  CHECK(viol.complementarity > 0.0);

  CHECK_THROWS_AS(kkt_residual_inequality(q.game, inside, Vector::Constant(1, -1.0)), PreconditionError);
}

TEST_CASE("local-multiplier KKT report") {
  auto q = toy(CouplingKind::Equality);
  auto sol = oracle::quadratic_equality(kT, 0.5, 1.0);
  Vector lam_bar(2);
  lam_bar << sol.lambda - 0.1, sol.lambda + 0.1;
  auto r = kkt_residual_local(q.game, sol.x, lam_bar);
  CHECK(r.stationarity <= 1e-10);
  CHECK(r.consensus == doctest::Approx(0.1));
}

TEST_CASE("consensus error") {
  Vector same = Vector::Constant(6, 1.5);
  CHECK(consensus_error(same, 2) == 0.0);
  Vector two(2);
  two << 0, 1;
  CHECK(consensus_error(two, 1) == 0.5);
  Rng rng(1);
  Vector v = oracle::random_vector(rng, 12);
  Vector shifted = v;
  for (Eigen::Index i = 0; i < 4; ++i) shifted.segment(3 * i, 3) += Vector::Constant(3, 2.5);
  CHECK(consensus_error(shifted, 3) == doctest::Approx(consensus_error(v, 3)).epsilon(1e-12));
  CHECK(mean_multiplier(two, 1)[0] == 0.5);
}

TEST_CASE("coupling violation") {
  auto eq = toy(CouplingKind::Equality);
  auto in = toy(CouplingKind::Inequality);
  Vector x(2);
  x << 0.2, 0.3;
  CHECK(coupling_violation(eq.game, x) == doctest::Approx(0.5));
  CHECK(coupling_violation(in.game, x) == 0.0);
  x << 1.0, 0.5;
  CHECK(coupling_violation(in.game, x) == doctest::Approx(0.5));
  CHECK(max_coupling_violation(in.game, x) == doctest::Approx(0.5));
}

TEST_CASE("Fejer check") {
  Matrix phi = Matrix::Identity(2, 2);
  Vector star = Vector::Zero(2);
  std::vector<Vector> shrinking;
  for (int k = 0; k < 10; ++k) shrinking.push_back(Vector::Constant(2, 1.0 / (k + 1)));
  auto ok = fejer_check(shrinking, phi, star);
  CHECK(ok.monotone);
  CHECK(ok.distances.size() == 10);

  auto bumped = shrinking;
  bumped[5] *= 3.0;
  auto bad = fejer_check(bumped, phi, star);
  CHECK_FALSE(bad.monotone);
  CHECK(bad.worst_violation > 0.0);

  std::vector<Vector> constant(5, star);
  CHECK(fejer_check(constant, phi, star).worst_violation == 0.0);
}
