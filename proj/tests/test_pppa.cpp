#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "vgne/bench_games.hpp"
#include "vgne/errors.hpp"
#include "vgne/pppa.hpp"

using namespace vgne;

namespace {

QuadraticGame toy(CouplingKind kind = CouplingKind::Equality) {
  QuadraticGameSpec spec;
  spec.t = Vector(2);
  spec.t << 2, 1;
  spec.delta = 0.5;
  spec.c = 1;
  spec.kind = kind;
  return gen_quadratic_testgame(spec);
}

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

// Toy graph data written out by hand: Lambda = I_2, Vbar = (-1, 1)', b = (0.5, 0.5).
const Matrix kLambda = Matrix::Identity(2, 2);
const Matrix kVbar = (Matrix(2, 1) << -1, 1).finished();
const Vector kBbar = Vector::Constant(2, 0.5);

}  // namespace

TEST_CASE("pppa_step on scalar linear operators") {
  Vector w = Vector::Constant(1, 4.0);
  SUBCASE("zero operator") {
    LinearOperatorResolvent op(scalar(0), Vector::Zero(1), scalar(3));
    CHECK(pppa_step(op, w, 0.0, 1.5).next[0] == doctest::Approx(4.0).epsilon(1e-15));
  }
  SUBCASE("identity, Phi = 1, rho = 1") {
    LinearOperatorResolvent op(scalar(1), Vector::Zero(1), scalar(1));
    CHECK(pppa_step(op, w, 0.0, 1.0).next[0] == doctest::Approx(2.0).epsilon(1e-15));
  }
  SUBCASE("M = 3, Phi = 2, rho = 1.5") {
    LinearOperatorResolvent op(scalar(3), Vector::Zero(1), scalar(2));
    auto s = pppa_step(op, w, 0.0, 1.5);
    CHECK(s.resolvent.point[0] == doctest::Approx(1.6).epsilon(1e-14));
    CHECK(s.next[0] == doctest::Approx(0.4).epsilon(1e-14));
  }
  SUBCASE("rho outside [1, 2)") {
    LinearOperatorResolvent op(scalar(1), Vector::Zero(1), scalar(1));
    CHECK_THROWS_AS(pppa_step(op, w, 0.0, 2.0), PreconditionError);
    CHECK_THROWS_AS(pppa_step(op, w, 0.0, 0.5), PreconditionError);
  }
}

TEST_CASE("Phi^e on the two-node toy") {
  auto q = toy();
  auto g = path_graph(2);
  auto p = uniform_params(q.game, g, 10, 0.5, 0.5, 1.1);
  auto rep = check_step_sizes_equality(p, q.game, g);
  CHECK(rep.ok);
  // R - Lambda' H Lambda = 10 - 0.5; W^-1 - Vbar' H Vbar = 2 - 2 * 0.5
  CHECK(rep.margin_first == doctest::Approx(9.5).epsilon(1e-12));
  CHECK(rep.margin_second == doctest::Approx(1.0).epsilon(1e-12));

  Matrix phi = assemble_phi_e(p, q.game, g);
  CHECK(phi == phi.transpose());
  CHECK(is_spd(phi));

  auto small_r = uniform_params(q.game, g, 0.4, 0.5, 0.5, 1.1);
  auto bad = check_step_sizes_equality(small_r, q.game, g);
  CHECK_FALSE(bad.ok);
  CHECK(bad.margin_first == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK_THROWS_WITH_AS(assemble_phi_e(small_r, q.game, g),
                       doctest::Contains("R - Lambda' H Lambda not positive definite"),
                       ValidationError);
}

TEST_CASE("Phi^e quadratic form identity") {
  auto game = gen_task_allocation(0);
  auto g = task_allocation_graph();
  auto p = random_diagonal_params(game, g, 1, {4, 8}, {0.2, 0.4}, {0.2, 0.4}, 1.1);
  Matrix phi = assemble_phi_e(p, game, g);
  CHECK(phi == phi.transpose());
  Rng rng(4);
  for (int s = 0; s < 20; ++s) {
    Vector w = oracle::random_vector(rng, phi.rows());
    const double lhs = w.dot(phi * w);
    CHECK(phi_e_quadratic_identity(p, game, g, w) == doctest::Approx(lhs).epsilon(1e-10));
  }
}

TEST_CASE("Phi^i on the two-node toy") {
  auto q = toy(CouplingKind::Inequality);
  auto g = path_graph(2);
  auto p = uniform_params(q.game, g, 10, 0.5, 0.5, 1.1);
  auto rep = check_step_sizes_inequality(p, q.game, g);
  CHECK(rep.ok);

  // Independent eigenvalue oracle on the hand-built Phi^i.
  Matrix phi(5, 5);
  phi.setZero();
  phi.block(0, 0, 2, 2) = 10.0 * Matrix::Identity(2, 2);
  phi.block(2, 2, 1, 1) = scalar(2.0);
  phi.block(3, 3, 2, 2) = 2.0 * Matrix::Identity(2, 2);
  phi.block(0, 3, 2, 2) = -kLambda.transpose();
  phi.block(3, 0, 2, 2) = -kLambda;
  phi.block(2, 3, 1, 2) = -kVbar.transpose();
  phi.block(3, 2, 2, 1) = -kVbar;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(phi);
  CHECK(rep.margin_first == doctest::Approx(eig.eigenvalues().minCoeff()).epsilon(1e-10));
  CHECK(rep.margin_first > 0.0);
  Matrix assembled = assemble_phi_i(p, q.game, g);
  CHECK((assembled - phi).norm() == 0.0);

  auto big_h = uniform_params(q.game, g, 10, 50.0, 0.5, 1.1);
  auto bad = check_step_sizes_inequality(big_h, q.game, g);
  CHECK_FALSE(bad.ok);
  CHECK(bad.message.find("Phi^i not positive definite") != std::string::npos);
  CHECK_THROWS_AS(assemble_phi_i(big_h, q.game, g), ValidationError);
}

TEST_CASE("equality margins grow when H shrinks") {
  auto q = toy();
  auto g = path_graph(2);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto p = random_diagonal_params(q.game, g, seed, {4, 8}, {0.2, 0.4}, {0.2, 0.4}, 1.1);
    auto rep = check_step_sizes_equality(p, q.game, g);
    CHECK(rep.ok);
    for (auto& H : p.H) H *= 0.5;
    auto half = check_step_sizes_equality(p, q.game, g);
    CHECK(half.margin_first > rep.margin_first);
    CHECK(half.margin_second > rep.margin_second);
  }
}

TEST_CASE("assembled linear parts are exactly skew-symmetric") {
  for (auto name : {"quadratic_equality", "task_allocation", "rate_control"}) {
    auto game = generate_builtin(name, 0);
    auto g = path_graph(game.num_players());
    Matrix K = assemble_skew_M(game, g);
    CHECK((K + K.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Matrix Kb = assemble_skew_Me_bar(game, g);
    CHECK((Kb + Kb.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("residual_Me at the oracle KKT point") {
  auto q = toy();
  auto g = path_graph(2);
  auto sol = oracle::quadratic_equality((Vector(2) << 2, 1).finished(), 0.5, 1.0);
  // Vbar Z = b - Lambda x*
  Vector Z = kVbar.colPivHouseholderQr().solve(kBbar - kLambda * sol.x);
  CHECK((kVbar * Z - (kBbar - kLambda * sol.x)).norm() <= 1e-14);
  Vector lam = Vector::Constant(2, sol.lambda);
  auto r = residual_Me(q.game, g, sol.x, Z, lam);
  CHECK(r.max() <= 1e-10);

  Vector split = lam;
  split[0] += 0.1;
  CHECK(residual_Me(q.game, g, sol.x, Z, split).edge > 0.0);

  Rng rng(8);
  for (int s = 0; s < 10; ++s) {
    Vector x = oracle::random_vector(rng, 2, -3, 3);
    Vector z = oracle::random_vector(rng, 1);
    auto rr = residual_Me(q.game, g, x, z, lam);
    CHECK(rr.feasibility == doctest::Approx((kLambda * x + kVbar * z - kBbar).norm()).epsilon(1e-12));
  }
}

TEST_CASE("residual_Mi") {
  auto q = toy(CouplingKind::Inequality);
  auto g = path_graph(2);
  auto sol = oracle::quadratic_inequality((Vector(2) << 2, 1).finished(), 0.5, 1.0);
  CHECK(sol.lambda == doctest::Approx(0.75));
  Vector Z = kVbar.colPivHouseholderQr().solve(kBbar - kLambda * sol.x);
  auto r = residual_Mi(q.game, g, sol.x, Z, Vector::Constant(2, sol.lambda));
  CHECK(r.max() <= 1e-10);

  // Strictly feasible, inactive constraint, zero multipliers.
  Vector x(2);
  x << -1, -1;
  auto rr = residual_Mi(q.game, g, x, Vector::Zero(1), Vector::Zero(2));
  CHECK(rr.complementarity == 0.0);
  CHECK(rr.feasibility == 0.0);

  CHECK_THROWS_AS(residual_Mi(q.game, g, x, Vector::Zero(1), Vector::Constant(2, -0.1)),
                  PreconditionError);
}

TEST_CASE("augmented resolvent matches a dense affine solve") {
  // The quadratic game is affine inside its box, so the resolvent of the
  // augmented operator is one linear solve when x_hat stays interior.
  auto q = toy();
  auto g = path_graph(2);
  auto p = uniform_params(q.game, g, 10, 0.5, 0.5, 1.1);
  auto op = make_pppa_Me_bar(q.game, g, p, {});
  Matrix J(2, 2);
  J << 1, 0.5, 0.5, 1;
  const Vector t = (Vector(2) << 2, 1).finished();

  // Hand-built K and c on (x, eta, Z, theta).
  Matrix K = Matrix::Zero(7, 7);
  K.block(0, 2, 2, 2) = kLambda.transpose();
  K.block(0, 5, 2, 2) = -kLambda.transpose();
  K.block(2, 0, 2, 2) = -kLambda;
  K.block(2, 4, 2, 1) = -kVbar;
  K.block(4, 2, 1, 2) = kVbar.transpose();
  K.block(4, 5, 1, 2) = -kVbar.transpose();
  K.block(5, 0, 2, 2) = kLambda;
  K.block(5, 4, 2, 1) = kVbar;
  Vector c = Vector::Zero(7);
  c.segment(2, 2) = kBbar;
  c.segment(5, 2) = -kBbar;
  Matrix F = Matrix::Zero(7, 7);
  F.block(0, 0, 2, 2) = J;
  Vector f = Vector::Zero(7);
  f.head(2) = -t;

  CHECK((op.skew() - K).norm() == 0.0);
  Rng rng(12);
  for (int s = 0; s < 20; ++s) {
    Vector w = oracle::random_vector(rng, 7, -2, 2);
    Vector want = (op.phi() + K + F).fullPivLu().solve(op.phi() * w - c - f);
    REQUIRE(want.head(2).cwiseAbs().maxCoeff() < 10.0);
    auto res = op.resolvent(w, 0.0);
    CHECK((res.point - want).norm() <= 1e-10);
    CHECK(op.resolvent_residual(w, res.point) <= 1e-10);
  }
  CHECK(op.propagation_gain() >= 1.0);
}

TEST_CASE("block operator rejects a non-triangular Phi + K") {
  Matrix phi = Matrix::Identity(2, 2);
  Matrix K(2, 2);
  K << 0, 1, -1, 0;
  // Phi + K has a nonzero upper block.
  CHECK_THROWS_AS(BlockTriangularOperator({{BlockKind::Linear, 1}, {BlockKind::Linear, 1}}, phi, K,
                                          Vector::Zero(2)),
                  StructuralError);
  Matrix Ka(2, 2);
  Ka << 0, 1, 1, 0;
  CHECK_THROWS_AS(BlockTriangularOperator({{BlockKind::Linear, 1}, {BlockKind::Linear, 1}}, phi, Ka,
                                          Vector::Zero(2)),
                  StructuralError);
}
