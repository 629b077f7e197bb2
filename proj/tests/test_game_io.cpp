#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "vgne/bench_games.hpp"
#include "vgne/errors.hpp"
#include "vgne/game_io.hpp"

using namespace vgne;
using nlohmann::json;

namespace {

void check_same_problem(const GameInstance& a, const GameInstance& b) {
  REQUIRE(a.num_players() == b.num_players());
  CHECK(a.kind() == b.kind());
  CHECK(a.coupling_dim() == b.coupling_dim());
  for (std::size_t i = 0; i < a.num_players(); ++i) {
    CHECK(a.player(i).A == b.player(i).A);
    CHECK(a.player(i).b == b.player(i).b);
    CHECK(a.player(i).box.lower == b.player(i).box.lower);
    CHECK(a.player(i).box.upper == b.player(i).box.upper);
  }
  Rng rng(17);
  for (int s = 0; s < 5; ++s) {
    Vector x(a.total_dim());
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = rng.uniform(a.lower()[j], a.upper()[j]);
    CHECK((smooth_pseudo_gradient(a, x) - smooth_pseudo_gradient(b, x)).norm() <= 1e-14);
  }
}

}  // namespace

TEST_CASE("quadratic game round trip") {
  QuadraticGameSpec spec;
  spec.t = (Vector(2) << 2, 1).finished();
  spec.delta = 0.5;
  spec.c = 1;
  auto q = gen_quadratic_testgame(spec);
  json doc = game_to_json(q.game);
  CHECK(doc["format"] == "vgne-game/1");
  CHECK(doc["kind"] == "equality");
  auto back = game_from_json(doc);
  check_same_problem(q.game, back);
  CHECK(game_to_json(back).dump() == doc.dump());
}

TEST_CASE("builtin generators are stored by seed") {
  auto game = gen_task_allocation(0);
  json doc = game_to_json(game);
  CHECK(doc["objective"]["type"] == "builtin");
  auto back = game_from_json(doc);
  check_same_problem(game, back);

  json tampered = doc;
  tampered["players"][0]["b"][0] = 123.0;
  CHECK_THROWS_AS(game_from_json(tampered), ValidationError);
}

TEST_CASE("zero game round trip through a file") {
  std::vector<Matrix> A(2, Matrix::Ones(1, 1));
  BoxSet box(Vector::Constant(1, -1), Vector::Constant(1, 1));
  auto zg = make_zero_game({1, 1}, A, {Vector::Zero(1), Vector::Ones(1)}, {box, box},
                           CouplingKind::Inequality);
  auto dir = std::filesystem::temp_directory_path() / "vgne_test_game_io";
  std::filesystem::create_directories(dir);
  save_game(zg, dir / "zero.json");
  auto back = load_game(dir / "zero.json");
  check_same_problem(zg, back);
  std::filesystem::remove_all(dir);
}

TEST_CASE("malformed documents") {
  CHECK_THROWS_AS(game_from_json(json::object()), IoError);
  CHECK_THROWS_AS(game_from_json(json{{"format", "something-else"}}), IoError);
  CHECK_THROWS_AS(load_game("/nonexistent/path/game.json"), IoError);

  // A hand-built game has no serialisable objective.
  PlayerSpec p;
  p.dim = 1;
  p.gradient = [](const Vector&, Eigen::Ref<Vector> out) { out.setZero(); };
  p.A = Matrix::Ones(1, 1);
  p.b = Vector::Zero(1);
  p.box = BoxSet(Vector::Constant(1, -1), Vector::Constant(1, 1));
  GameInstance g({p, p}, 1, CouplingKind::Equality);
  CHECK_THROWS_AS(game_to_json(g), IoError);
}
