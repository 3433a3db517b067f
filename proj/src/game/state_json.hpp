#pragma once

// Snapshot (de)serialization of service records. Internal to flowclass_game.

#include <json.hpp>

#include "flowclass/game/types.hpp"

namespace flowclass::game::detail {

std::int64_t to_millis(Timestamp t);
Timestamp from_millis(std::int64_t ms);

nlohmann::json save_game(const Game& game);
Game load_game(const nlohmann::json& doc);

nlohmann::json save_session(const Session& session);
Session load_session(const nlohmann::json& doc);

/// Analysis is not stored; callers recompute it from the owning game.
nlohmann::json save_answer(const Answer& answer);
Answer load_answer(const nlohmann::json& doc);

GamePhase parse_game_phase(std::string_view text);
SessionPhase parse_session_phase(std::string_view text);

}  // namespace flowclass::game::detail
