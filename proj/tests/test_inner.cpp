#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "vgne/admm.hpp"
#include "vgne/bench_games.hpp"
#include "vgne/errors.hpp"
#include "vgne/inner.hpp"

using namespace vgne;

namespace {

const Vector kT = (Vector(2) << 2, 1).finished();

QuadraticGame toy(CouplingKind kind = CouplingKind::Equality) {
  QuadraticGameSpec spec;
  spec.t = kT;
  spec.delta = 0.5;
  spec.c = 1;
  spec.kind = kind;
  return gen_quadratic_testgame(spec);
}

// (I + delta J + R) x = R x0 + t - c
Vector first_subgame_oracle(double r, const Vector& x0, const Vector& c) {
  Matrix M(2, 2);
  M << 1 + r, 0.5, 0.5, 1 + r;
  return M.fullPivLu().solve(r * x0 + kT - c);
}

void audit_strong_monotonicity(const Subgame& sg, const GameInstance& game, std::uint64_t seed) {
  Rng rng(seed);
  const double sigma = sg.min_weight_eigenvalue();
  for (int s = 0; s < 100; ++s) {
    Vector x(game.total_dim()), y(game.total_dim());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      x[j] = rng.uniform(game.lower()[j], game.upper()[j]);
      y[j] = rng.uniform(game.lower()[j], game.upper()[j]);
    }
    const double ip = (x - y).dot(sg.smooth_operator(x) - sg.smooth_operator(y));
    CHECK(ip >= sigma * (x - y).squaredNorm() - 1e-9);
  }
}

}  // namespace

TEST_CASE("equality subgame shift at k = 0") {
  auto q = toy();
  auto g = path_graph(2);
  auto p = uniform_params(q.game, g, 10, 0.5, 0.5, 1.1);
  auto sg = build_subgame_equality(q.game, g, p, Vector::Zero(2), Vector::Zero(2), Vector::Zero(1));
  // A_i' [0 + 0.5 (0 + 0 - 0.5)]
  CHECK(sg.shift[0] == -0.25);
  CHECK(sg.shift[1] == -0.25);
  audit_strong_monotonicity(sg, q.game, 1);
}

TEST_CASE("locally feasible anchor gives a zero shift") {
  auto q = toy();
  auto g = path_graph(2);
  auto p = uniform_params(q.game, g, 10, 0.5, 0.5, 1.1);
  Vector x = Vector::Constant(2, 0.5);  // A_i x_i = b_i
  auto sg = build_subgame_equality(q.game, g, p, x, Vector::Zero(2), Vector::Zero(1));
  CHECK(sg.shift.isZero(0.0));
  CHECK(sg.anchor == x);
}

TEST_CASE("inequality subgame shift") {
  auto q = toy(CouplingKind::Inequality);
  auto p = uniform_params(q.game, path_graph(2), 10, 0.5, 0.5, 1.1);
  CHECK(build_subgame_inequality(q.game, p, Vector::Zero(2), Vector::Zero(2)).shift.isZero(0.0));

  // m = 3, A_1 = e_1
  std::vector<Matrix> A(2, Matrix::Zero(3, 1));
  A[0](0, 0) = 1.0;
  A[1](2, 0) = 1.0;
  auto zg = make_zero_game({1, 1}, A, {Vector::Zero(3), Vector::Zero(3)},
                           {BoxSet(Vector::Constant(1, -1), Vector::Constant(1, 1)),
                            BoxSet(Vector::Constant(1, -1), Vector::Constant(1, 1))},
                           CouplingKind::Inequality);
  auto zp = uniform_params(zg, path_graph(2), 1, 1, 1, 1);
  Vector lam = Vector::Zero(6);
  lam[0] = 1.0;
  auto sg = build_subgame_inequality(zg, zp, Vector::Zero(2), lam);
  CHECK(sg.shift[0] == 1.0);
  CHECK(sg.shift[1] == 0.0);

  auto rc = gen_rate_control(0);
  auto rp = uniform_params(rc, rate_control_graph(), 10, 0.5, 0.5, 1.1);
  Vector x = 0.5 * (rc.lower() + rc.upper());
  audit_strong_monotonicity(build_subgame_inequality(rc, rp, x, Vector::Ones(16 * 15)), rc, 2);
}

TEST_CASE("affine subgame with an interior fixed point") {
  // Zero game, R = I, anchor a: the subgame operator is x - a.
  std::vector<Matrix> A(2, Matrix::Ones(1, 2));
  BoxSet box(Vector::Constant(2, -5), Vector::Constant(2, 5));
  auto zg = make_zero_game({2, 2}, A, {Vector::Zero(1), Vector::Zero(1)}, {box, box},
                           CouplingKind::Equality);
  Subgame sg{&zg, (Vector(4) << 1, -2, 0.5, 3).finished(), Vector::Zero(4),
             {Matrix::Identity(2, 2), Matrix::Identity(2, 2)}};
  for (auto mode : {CertificateMode::Oracle, CertificateMode::Residual}) {
    InnerSettings s;
    s.mode = mode;
    s.lipschitz = 0.0;
    for (double mu : {0.0, 1e-3, 1e-8}) {
      if (mode == CertificateMode::Residual && mu == 0.0) {
        CHECK_THROWS_AS(solve_subgame(sg, mu, s), PreconditionError);
        continue;
      }
      auto res = solve_subgame(sg, mu, s);
      CHECK((res.x_tilde - sg.anchor).norm() <= std::max(mu, 1e-14));
      CHECK(res.certificate.bound <= mu + 1e-14);
    }
  }
}

TEST_CASE("first ADMM subgame of the quadratic game") {
  auto q = toy();
  auto g = path_graph(2);
  auto p = uniform_params(q.game, g, 10, 0.5, 0.5, 1.1);
  auto sg = build_subgame_equality(q.game, g, p, Vector::Zero(2), Vector::Zero(2), Vector::Zero(1));
  Vector want = first_subgame_oracle(10.0, Vector::Zero(2), sg.shift);

  InnerSettings grad;
  grad.lipschitz = 1.5;
  InnerSettings br = grad;
  br.method = InnerMethod::BestResponse;
  InnerSettings resid = grad;
  resid.mode = CertificateMode::Residual;
  for (const auto& s : {grad, br, resid}) {
    for (double mu : {0.0, 1e-4, 1e-9}) {
      if (s.mode == CertificateMode::Residual && mu == 0.0) continue;
      auto res = solve_subgame(sg, mu, s);
      CHECK((res.x_tilde - want).norm() <= mu + 1e-13);
      CHECK(res.certificate.bound <= mu + 1e-13);
    }
  }
}

TEST_CASE("inverse-square inner tolerances are certified along an ADMM run") {
  auto q = toy();
  auto g = path_graph(2);
  auto p = uniform_params(q.game, g, 10, 0.5, 0.5, 1.1, MuSchedule::inverse_square());
  InnerSettings s = resolve_inner_settings({}, q.game);
  auto state = initial_state(q.game, g, 0);
  for (std::size_t k = 1; k <= 50; ++k) {
    auto sg = build_subgame_equality(q.game, g, p, state.x, state.lambda_bar, state.Z);
    Vector exact = first_subgame_oracle(10.0, state.x, sg.shift);
    auto step = admm_iterate(q.game, g, p, state, s);
    const double mu = 1.0 / static_cast<double>(k * k);
    CHECK(step.mu == doctest::Approx(mu));
    CHECK(step.inner.certificate.bound <= mu);
    CHECK((step.x_tilde - exact).norm() <= mu);
    state = step.next;
  }
}

TEST_CASE("iteration cap raises InexactnessError") {
  auto game = gen_rate_control(0);
  auto p = uniform_params(game, rate_control_graph(), 10, 0.5, 0.5, 1.1);
  auto sg = build_subgame_inequality(game, p, Vector::Zero(15), Vector::Ones(16 * 15));
  InnerSettings s = resolve_inner_settings({}, game);
  s.mode = CertificateMode::Residual;
  s.max_iterations = 2;
  CHECK_THROWS_AS(solve_subgame(sg, 1e-12, s), InexactnessError);
}

TEST_CASE("serial and parallel inner solves agree bitwise") {
  auto game = gen_task_allocation(0);
  auto g = task_allocation_graph();
  auto p = random_diagonal_params(game, g, 0, {4, 8}, {0.2, 0.4}, {0.2, 0.4}, 1.1);
  auto x = 0.5 * (game.lower() + game.upper());
  auto sg = build_subgame_equality(game, g, p, x, Vector::Ones(8 * 14), Vector::Zero(8 * 13));
  InnerSettings s = resolve_inner_settings({}, game);
  s.exec = kernels::Exec::Serial;
  auto a = solve_subgame(sg, 1e-6, s);
  s.exec = kernels::Exec::Parallel;
  auto b = solve_subgame(sg, 1e-6, s);
  CHECK(a.x_tilde == b.x_tilde);
  CHECK(a.certificate.iterations == b.certificate.iterations);
  // natural residual at the exact point is at rounding level
  REQUIRE(a.x_hat.has_value());
  CHECK(subgame_natural_residual(sg, *a.x_hat, inner_step(sg, s)) <= 1e-12);
}

TEST_CASE("resolved settings carry a Lipschitz estimate") {
  auto q = toy();
  auto s = resolve_inner_settings({}, q.game);
  REQUIRE(s.lipschitz.has_value());
  CHECK(*s.lipschitz == doctest::Approx(1.5));
  InnerSettings given;
  given.lipschitz = 7.0;
  CHECK(*resolve_inner_settings(given, q.game).lipschitz == 7.0);
}
