#include "state_json.hpp"

#include "flowclass/graph/codec.hpp"

namespace flowclass::game {

using nlohmann::json;

std::string_view to_string(AdvanceMode v) noexcept {
  return v == AdvanceMode::professor_triggered ? "professor_triggered" : "individual";
}

std::string_view to_string(GamePhase v) noexcept {
  switch (v) {
    case GamePhase::created: return "created";
    case GamePhase::phase1_open: return "phase1_open";
    case GamePhase::phase2_open: return "phase2_open";
    case GamePhase::closed: return "closed";
  }
  return "created";
}

std::string_view to_string(SessionPhase v) noexcept {
  switch (v) {
    case SessionPhase::phase1: return "phase1";
    case SessionPhase::waiting: return "waiting";
    case SessionPhase::phase2: return "phase2";
    case SessionPhase::done: return "done";
  }
  return "phase1";
}

std::string_view to_string(EventType v) noexcept {
  switch (v) {
    case EventType::phase_advanced: return "phase_advanced";
    case EventType::game_opened: return "game_opened";
    case EventType::game_closed: return "game_closed";
    case EventType::monitor_update: return "monitor_update";
  }
  return "monitor_update";
}

AdvanceMode parse_advance_mode(std::string_view text) {
  if (text == "professor_triggered") return AdvanceMode::professor_triggered;
  if (text == "individual") return AdvanceMode::individual;
  throw Error(ErrorCode::invalid_argument, "unknown advance mode '" + std::string(text) + "'",
              {{"location", "/advance_mode"}});
}

namespace {

json optional_time(const std::optional<Timestamp>& t) {
  return t ? json(format_utc(*t)) : json(nullptr);
}

}  // namespace

json encode_listing(const GameListing& listing) {
  return {{"game_number", listing.game_number}, {"phase", to_string(listing.phase)}};
}

json encode_game_summary(const Game& game) {
  return {{"game_id", game.game_id},
          {"game_number", game.game_number},
          {"code", game.code},
          {"phase", to_string(game.phase)},
          {"advance_mode", to_string(game.advance_mode)},
          {"reference_cc", game.reference_cc},
          {"reference_diagram", graph::encode_diagram(game.reference_diagram)},
          {"reference_paths", graph::encode_paths(game.reference_paths)},
          {"created_at", format_utc(game.created_at)}};
}

json encode_answer_summary(const Answer& answer) {
  return {{"answer_id", answer.answer_id},
          {"student_id", answer.student_id},
          {"game_id", answer.game_id},
          {"game_number", answer.game_number},
          {"played_at", format_utc(answer.created_at)},
          {"submitted_at_diagram", optional_time(answer.submitted_at_diagram)},
          {"submitted_at_paths", optional_time(answer.submitted_at_paths)},
          {"complete", answer.complete()},
          {"resubmitted", answer.resubmitted},
          {"diagram_missing", answer.diagram_missing}};
}

json encode_answer(const Answer& answer) {
  json out = encode_answer_summary(answer);
  out["diagram"] = answer.diagram ? graph::encode_diagram(*answer.diagram) : json(nullptr);
  out["paths"] = answer.paths ? graph::encode_paths(*answer.paths) : json(nullptr);
  out["analysis"] = answer.analysis ? grading::encode_report(*answer.analysis) : json(nullptr);
  json history = json::array();
  for (const auto& rev : answer.history) {
    history.push_back({{"submitted_at", format_utc(rev.submitted_at)},
                       {"diagram", graph::encode_diagram(rev.diagram)}});
  }
  out["history"] = std::move(history);
  return out;
}

json encode_monitor(const MonitorSnapshot& snapshot, bool with_previews) {
  json out = {{"game_id", snapshot.game_id},
              {"game_number", snapshot.game_number},
              {"phase", to_string(snapshot.phase)},
              {"players_count", snapshot.players_count},
              {"diagrams_submitted", snapshot.diagrams_submitted},
              {"paths_submitted", snapshot.paths_submitted}};
  if (with_previews) {
    json previews = json::array();
    for (const auto& p : snapshot.previews) {
      previews.push_back({{"student_id", p.student_id}, {"diagram", graph::encode_diagram(p.diagram)}});
    }
    out["previews"] = std::move(previews);
  }
  return out;
}

json encode_session_state(const SessionState& state) {
  return {{"student_id", state.student_id},
          {"game_id", state.game_id},
          {"game_number", state.game_number},
          {"session_phase", to_string(state.session_phase)},
          {"game_phase", to_string(state.game_phase)},
          {"advance_mode", to_string(state.advance_mode)},
          {"diagram_submitted", state.diagram_submitted}};
}

namespace detail {

std::int64_t to_millis(Timestamp t) { return t.time_since_epoch().count(); }

Timestamp from_millis(std::int64_t ms) { return Timestamp{std::chrono::milliseconds{ms}}; }

GamePhase parse_game_phase(std::string_view text) {
  for (GamePhase p : {GamePhase::created, GamePhase::phase1_open, GamePhase::phase2_open,
                      GamePhase::closed}) {
    if (to_string(p) == text) return p;
  }
  throw Error(ErrorCode::decode_error, "unknown game phase '" + std::string(text) + "'");
}

SessionPhase parse_session_phase(std::string_view text) {
  for (SessionPhase p : {SessionPhase::phase1, SessionPhase::waiting, SessionPhase::phase2,
                         SessionPhase::done}) {
    if (to_string(p) == text) return p;
  }
  throw Error(ErrorCode::decode_error, "unknown session phase '" + std::string(text) + "'");
}

json save_game(const Game& game) {
  return {{"game_id", game.game_id},
          {"game_number", game.game_number},
          {"code", game.code},
          {"reference_diagram", graph::encode_diagram(game.reference_diagram)},
          {"reference_paths", graph::encode_paths(game.reference_paths)},
          {"reference_cc", game.reference_cc},
          {"advance_mode", to_string(game.advance_mode)},
          {"phase", to_string(game.phase)},
          {"created_at", to_millis(game.created_at)}};
}

Game load_game(const json& doc) {
  Game g;
  g.game_id = doc.at("game_id").get<std::string>();
  g.game_number = doc.at("game_number").get<int>();
  g.code = doc.at("code").get<std::string>();
  g.reference_diagram = graph::decode_diagram(doc.at("reference_diagram"));
  g.reference_paths = graph::decode_paths(doc.at("reference_paths"));
  g.reference_cc = doc.at("reference_cc").get<long>();
  g.advance_mode = parse_advance_mode(doc.at("advance_mode").get<std::string>());
  g.phase = parse_game_phase(doc.at("phase").get<std::string>());
  g.created_at = from_millis(doc.at("created_at").get<std::int64_t>());
  return g;
}

json save_session(const Session& s) {
  return {{"token", s.token},
          {"student_id", s.student_id},
          {"game_id", s.game_id},
          {"phase", to_string(s.phase)},
          {"diagram_submitted", s.diagram_submitted},
          {"joined_at", to_millis(s.joined_at)}};
}

Session load_session(const json& doc) {
  Session s;
  s.token = doc.at("token").get<std::string>();
  s.student_id = doc.at("student_id").get<std::string>();
  s.game_id = doc.at("game_id").get<std::string>();
  s.phase = parse_session_phase(doc.at("phase").get<std::string>());
  s.diagram_submitted = doc.at("diagram_submitted").get<bool>();
  s.joined_at = from_millis(doc.at("joined_at").get<std::int64_t>());
  return s;
}

json save_answer(const Answer& a) {
  json history = json::array();
  for (const auto& rev : a.history) {
    history.push_back({{"at", to_millis(rev.submitted_at)}, {"diagram", graph::encode_diagram(rev.diagram)}});
  }
  auto opt_ms = [](const std::optional<Timestamp>& t) { return t ? json(to_millis(*t)) : json(nullptr); };
  return {{"answer_id", a.answer_id},
          {"student_id", a.student_id},
          {"game_id", a.game_id},
          {"game_number", a.game_number},
          {"created_at", to_millis(a.created_at)},
          {"submitted_at_diagram", opt_ms(a.submitted_at_diagram)},
          {"submitted_at_paths", opt_ms(a.submitted_at_paths)},
          {"diagram", a.diagram ? graph::encode_diagram(*a.diagram) : json(nullptr)},
          {"paths", a.paths ? graph::encode_paths(*a.paths) : json(nullptr)},
          {"history", std::move(history)},
          {"resubmitted", a.resubmitted},
          {"diagram_missing", a.diagram_missing}};
}

Answer load_answer(const json& doc) {
  Answer a;
  a.answer_id = doc.at("answer_id").get<std::string>();
  a.student_id = doc.at("student_id").get<std::string>();
  a.game_id = doc.at("game_id").get<std::string>();
  a.game_number = doc.at("game_number").get<int>();
  a.created_at = from_millis(doc.at("created_at").get<std::int64_t>());
  if (!doc.at("submitted_at_diagram").is_null()) {
    a.submitted_at_diagram = from_millis(doc.at("submitted_at_diagram").get<std::int64_t>());
  }
  if (!doc.at("submitted_at_paths").is_null()) {
    a.submitted_at_paths = from_millis(doc.at("submitted_at_paths").get<std::int64_t>());
  }
  if (!doc.at("diagram").is_null()) a.diagram = graph::decode_diagram(doc.at("diagram"));
  if (!doc.at("paths").is_null()) a.paths = graph::decode_paths(doc.at("paths"));
  for (const auto& rev : doc.at("history")) {
    a.history.push_back({from_millis(rev.at("at").get<std::int64_t>()), graph::decode_diagram(rev.at("diagram"))});
  }
  a.resubmitted = doc.at("resubmitted").get<bool>();
  a.diagram_missing = doc.at("diagram_missing").get<bool>();
  return a;
}

}  // namespace detail

}  // namespace flowclass::game
