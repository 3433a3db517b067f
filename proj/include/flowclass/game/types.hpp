#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowclass/grading/analysis.hpp"
#include "flowclass/graph/diagram.hpp"

namespace flowclass::game {

using graph::Diagram;
using graph::NodePath;

/// UTC wall-clock instant at millisecond resolution.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// "2026-10-17T09:15:02.250Z"
std::string format_utc(Timestamp t);

enum class AdvanceMode { professor_triggered, individual };
enum class GamePhase { created, phase1_open, phase2_open, closed };
enum class SessionPhase { phase1, waiting, phase2, done };

std::string_view to_string(AdvanceMode v) noexcept;
std::string_view to_string(GamePhase v) noexcept;
std::string_view to_string(SessionPhase v) noexcept;
AdvanceMode parse_advance_mode(std::string_view text);

struct Game {
  std::string game_id;
  int game_number = 0;
  std::string code;  // stored as authored; compared per ServiceOptions
  Diagram reference_diagram;
  std::vector<NodePath> reference_paths;
  long reference_cc = 0;
  AdvanceMode advance_mode = AdvanceMode::professor_triggered;
  GamePhase phase = GamePhase::created;
  Timestamp created_at{};
};

struct Session {
  std::string token;
  std::string student_id;
  std::string game_id;
  SessionPhase phase = SessionPhase::phase1;
  bool diagram_submitted = false;
  Timestamp joined_at{};
};

struct DiagramRevision {
  Timestamp submitted_at{};
  Diagram diagram;
};

struct Answer {
  std::string answer_id;
  std::string student_id;
  std::string game_id;
  int game_number = 0;
  Timestamp created_at{};
  std::optional<Timestamp> submitted_at_diagram;
  std::optional<Timestamp> submitted_at_paths;
  std::optional<Diagram> diagram;
  std::optional<std::vector<NodePath>> paths;
  std::optional<grading::AnalysisReport> analysis;
  std::vector<DiagramRevision> history;  // superseded diagram submissions, oldest first
  bool resubmitted = false;
  bool diagram_missing = false;  // reached phase 2 without a phase-1 diagram

  bool complete() const noexcept { return paths.has_value(); }
};

struct GameListing {
  int game_number = 0;
  GamePhase phase = GamePhase::created;
};

struct GameRef {
  std::string game_id;
  int game_number = 0;
  long reference_cc = 0;
};

struct JoinResult {
  std::string session_token;
  int game_number = 0;
  SessionPhase session_phase = SessionPhase::phase1;
  bool resumed = false;
};

struct SessionState {
  std::string student_id;
  std::string game_id;
  int game_number = 0;
  SessionPhase session_phase = SessionPhase::phase1;
  GamePhase game_phase = GamePhase::created;
  AdvanceMode advance_mode = AdvanceMode::professor_triggered;
  bool diagram_submitted = false;
};

struct Preview {
  std::string student_id;
  Diagram diagram;
};

struct MonitorSnapshot {
  std::string game_id;
  int game_number = 0;
  GamePhase phase = GamePhase::created;
  std::size_t players_count = 0;
  std::size_t diagrams_submitted = 0;
  std::size_t paths_submitted = 0;
  std::vector<Preview> previews;
};

enum class EventType { phase_advanced, game_opened, game_closed, monitor_update };
std::string_view to_string(EventType v) noexcept;

/// Notification emitted after a mutation commits. Student recipients are
/// named by session token; `to_professor` routes a copy to the dashboard.
struct ServiceEvent {
  EventType type = EventType::monitor_update;
  std::string game_id;
  nlohmann::json payload;
  std::vector<std::string> session_tokens;
  bool to_professor = false;
};

// JSON views used on the wire and in exports.
nlohmann::json encode_listing(const GameListing& listing);
nlohmann::json encode_game_summary(const Game& game);
nlohmann::json encode_answer_summary(const Answer& answer);
nlohmann::json encode_answer(const Answer& answer);
nlohmann::json encode_monitor(const MonitorSnapshot& snapshot, bool with_previews = true);
nlohmann::json encode_session_state(const SessionState& state);

}  // namespace flowclass::game
