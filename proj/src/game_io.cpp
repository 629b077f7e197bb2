#include "vgne/game_io.hpp"

#include <fstream>

#include "vgne/bench_games.hpp"
#include "vgne/errors.hpp"

namespace vgne {

namespace {

using nlohmann::json;

json vec_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index j = 0; j < v.size(); ++j) out.push_back(v[j]);
  return out;
}

json mat_json(const Matrix& a) {
  json out = json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) out.push_back(vec_json(a.row(r).transpose()));
  return out;
}

Vector json_vec(const json& j, const char* what) {
  if (!j.is_array()) throw IoError(std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = j[k].get<double>();
  return v;
}

Matrix json_mat(const json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw IoError(std::string(what) + " must have " + std::to_string(rows) + " rows");
  Matrix a(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw IoError(std::string(what) + " row " + std::to_string(r) + " must have " +
                    std::to_string(cols) + " entries");
    for (Eigen::Index c = 0; c < cols; ++c) a(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return a;
}

bool is_builtin_name(const std::string& name) {
  return name == "rate_control" || name == "task_allocation" || name == "quadratic_equality" ||
         name == "quadratic_inequality";
}

}  // namespace

json game_to_json(const GameInstance& game) {
  json doc;
  doc["format"] = "vgne-game/1";
  doc["name"] = game.name();
  doc["kind"] = std::string(to_string(game.kind()));
  doc["coupling_dim"] = game.coupling_dim();
  json players = json::array();
  for (std::size_t i = 0; i < game.num_players(); ++i) {
    const auto& p = game.player(i);
    players.push_back({{"dim", p.dim},
                       {"A", mat_json(p.A)},
                       {"b", vec_json(p.b)},
                       {"box", {{"lower", vec_json(p.box.lower)}, {"upper", vec_json(p.box.upper)}}}});
  }
  doc["players"] = players;
  const json& meta = game.metadata;
  if (meta.contains("objective")) {
    doc["objective"] = meta["objective"];
    if (meta.contains("generator")) {
      json echo = meta;
      echo.erase("objective");
      doc["generator"] = echo;
    }
  } else if (meta.contains("generator") && meta["generator"].is_string() &&
             is_builtin_name(meta["generator"].get<std::string>())) {
    doc["objective"] = {{"type", "builtin"},
                        {"generator", meta["generator"]},
                        {"seed", meta.value("seed", std::uint64_t{0})}};
    doc["generator"] = meta;
  } else {
    throw IoError("game '" + game.name() + "' has no serialisable objective");
  }
  if (game.lipschitz_hint) doc["lipschitz_hint"] = *game.lipschitz_hint;
  return doc;
}

GameInstance game_from_json(const json& doc) {
  try {
    if (!doc.is_object() || doc.value("format", std::string()) != "vgne-game/1")
      throw IoError("not a vgne-game/1 document");
    const std::string kind_text = doc.at("kind").get<std::string>();
    CouplingKind kind = coupling_kind_from_string(kind_text);
    const auto m = doc.at("coupling_dim").get<std::size_t>();
    const json& players = doc.at("players");
    if (!players.is_array() || players.empty()) throw IoError("players must be a nonempty array");
    std::vector<std::size_t> dims;
    std::vector<Matrix> As;
    std::vector<Vector> bs;
    std::vector<BoxSet> boxes;
    for (const json& p : players) {
      const auto d = p.at("dim").get<std::size_t>();
      dims.push_back(d);
      As.push_back(json_mat(p.at("A"), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d), "A"));
      bs.push_back(json_vec(p.at("b"), "b"));
      boxes.emplace_back(json_vec(p.at("box").at("lower"), "box.lower"),
                         json_vec(p.at("box").at("upper"), "box.upper"));
    }
    const json& obj = doc.at("objective");
    const std::string type = obj.at("type").get<std::string>();
    // Restores the stored hint and generator echo so a reload serialises
    // to the same document.
    auto finish = [&](GameInstance game) {
      if (doc.contains("lipschitz_hint")) game.lipschitz_hint = doc["lipschitz_hint"].get<double>();
      if (doc.contains("generator") && doc["generator"].is_object()) {
        json meta = doc["generator"];
        meta["objective"] = game.metadata["objective"];
        game.metadata = std::move(meta);
      }
      return game;
    };
    if (type == "zero") return finish(make_zero_game(dims, As, bs, boxes, kind));
    if (type == "affine") {
      const json& qs = obj.at("players");
      if (qs.size() != dims.size()) throw IoError("affine objective needs one entry per player");
      std::size_t n = 0;
      for (auto d : dims) n += d;
      std::vector<AffinePlayer> aps;
      for (std::size_t i = 0; i < dims.size(); ++i) {
        const auto d = static_cast<Eigen::Index>(dims[i]);
        aps.push_back({json_mat(qs[i].at("Q"), d, static_cast<Eigen::Index>(n), "Q"),
                       json_vec(qs[i].at("q"), "q"), As[i], bs[i], boxes[i]});
      }
      return finish(make_affine_game(std::move(aps), m, kind, doc.value("name", std::string("affine"))));
    }
    if (type == "builtin") {
      const std::string gen = obj.at("generator").get<std::string>();
      GameInstance game = generate_builtin(gen, obj.value("seed", std::uint64_t{0}));
      if (game.kind() != kind || game.coupling_dim() != m || game.num_players() != dims.size())
        throw ValidationError("instance file does not match builtin '" + gen + "'");
      for (std::size_t i = 0; i < dims.size(); ++i) {
        const auto& p = game.player(i);
        if (p.dim != dims[i] || p.A != As[i] || p.b != bs[i] || p.box.lower != boxes[i].lower ||
            p.box.upper != boxes[i].upper)
          throw ValidationError("instance file data for player " + std::to_string(i + 1) +
                                " differs from regenerated builtin '" + gen + "'");
      }
      return game;
    }
    throw IoError("unknown objective type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed game file: ") + e.what());
  }
}

void save_game(const GameInstance& game, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << game_to_json(game).dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

GameInstance load_game(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
  return game_from_json(doc);
}

}  // namespace vgne
