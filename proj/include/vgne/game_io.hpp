#pragma once

#include <filesystem>

#include <json.hpp>

#include "vgne/game.hpp"

namespace vgne {

/// Instance file schema ("vgne-game/1"):
///   name, kind ("equality" | "inequality"), coupling_dim,
///   players: [{dim, A (row-major rows), b, box: {lower, upper}}],
///   objective: {type: "affine", players: [{Q, q}]} | {type: "zero"} |
///              {type: "builtin", generator, seed},
///   generator: parameter echo (informational).
/// Throws IoError when the game carries no serialisable objective.
nlohmann::json game_to_json(const GameInstance& game);

/// Builtin objectives are regenerated from (generator, seed) and checked
/// against the stored A, b and boxes (ValidationError on mismatch).
GameInstance game_from_json(const nlohmann::json& doc);

void save_game(const GameInstance& game, const std::filesystem::path& path);
GameInstance load_game(const std::filesystem::path& path);

}  // namespace vgne
