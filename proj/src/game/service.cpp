#include "flowclass/game/service.hpp"

#include <algorithm>
#include <cctype>
#include <memory>
#include <random>

#include "flowclass/graph/codec.hpp"
#include "state_json.hpp"

namespace flowclass::game {

using nlohmann::json;
using detail::from_millis;
using detail::to_millis;

namespace {

Timestamp system_now() {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

GameService::TokenSource random_tokens() {
  auto engine = std::make_shared<std::mt19937_64>(std::random_device{}());
  return [engine] {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string token;
    for (int word = 0; word < 2; ++word) {
      std::uint64_t bits = (*engine)();
      for (int i = 0; i < 16; ++i, bits >>= 4) token += kHex[bits & 0xF];
    }
    return token;
  };
}

bool printable_token(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](unsigned char c) { return std::isgraph(c) != 0; });
}

[[noreturn]] void wrong_state(const Game& game, std::string_view operation) {
  throw Error(ErrorCode::wrong_state,
              std::string(operation) + " is not allowed while game " + game.game_id + " is " +
                  std::string(to_string(game.phase)),
              {{"game_id", game.game_id}, {"phase", to_string(game.phase)}});
}

[[noreturn]] void out_of_order(const Session& session, std::string_view operation) {
  throw Error(ErrorCode::order_violation,
              std::string(operation) + " is not allowed in session phase " +
                  std::string(to_string(session.phase)),
              {{"session_phase", to_string(session.phase)}});
}

}  // namespace

std::string generate_code(std::size_t length) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  std::random_device device;
  std::uniform_int_distribution<std::size_t> pick(0, sizeof kAlphabet - 2);
  std::string code;
  for (std::size_t i = 0; i < length; ++i) code += kAlphabet[pick(device)];
  return code;
}

GameService::GameService(ServiceOptions options, Clock clock, TokenSource tokens)
    : options_(options),
      clock_(clock ? std::move(clock) : Clock(system_now)),
      tokens_(tokens ? std::move(tokens) : random_tokens()) {}

void GameService::set_journal(Journal journal) {
  std::lock_guard lock(mutex_);
  journal_ = std::move(journal);
}

void GameService::set_listener(Listener listener) {
  std::lock_guard lock(mutex_);
  listener_ = std::move(listener);
}

Timestamp GameService::now_locked() { return std::max(clock_(), state_.last_time); }

void GameService::commit(json mutation) {
  mutation["seq"] = state_.sequence + 1;
  if (journal_) journal_(mutation);
  std::vector<ServiceEvent> events;
  apply_locked(mutation, &events);
  notify(events);
}

void GameService::notify(const std::vector<ServiceEvent>& events) const {
  if (!listener_) return;
  for (const auto& event : events) listener_(event);
}

bool GameService::code_matches(std::string_view stored, std::string_view offered) const {
  if (stored.size() != offered.size()) return false;
  if (!options_.case_insensitive_codes) return stored == offered;
  for (std::size_t i = 0; i < stored.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(stored[i])) !=
        std::toupper(static_cast<unsigned char>(offered[i]))) {
      return false;
    }
  }
  return true;
}

Game& GameService::game_locked(std::string_view game_id) {
  return const_cast<Game&>(std::as_const(*this).game_locked(game_id));
}

const Game& GameService::game_locked(std::string_view game_id) const {
  auto it = std::find_if(state_.games.begin(), state_.games.end(),
                         [&](const Game& g) { return g.game_id == game_id; });
  if (it == state_.games.end()) {
    throw Error(ErrorCode::not_found, "no game '" + std::string(game_id) + "'",
                {{"game_id", game_id}});
  }
  return *it;
}

Session& GameService::session_locked(std::string_view token) {
  return const_cast<Session&>(std::as_const(*this).session_locked(token));
}

const Session& GameService::session_locked(std::string_view token) const {
  auto it = state_.sessions.find(token);
  if (it == state_.sessions.end()) throw Error(ErrorCode::unauthorized, "unknown session token");
  return it->second;
}

std::vector<std::string> GameService::tokens_for_locked(std::string_view game_id) const {
  std::vector<std::pair<Timestamp, std::string>> joined;
  for (const auto& [token, s] : state_.sessions) {
    if (s.game_id == game_id) joined.emplace_back(s.joined_at, token);
  }
  std::sort(joined.begin(), joined.end());
  std::vector<std::string> out;
  for (auto& [_, token] : joined) out.push_back(std::move(token));
  return out;
}

MonitorSnapshot GameService::monitor_locked(const Game& game) const {
  MonitorSnapshot snap;
  snap.game_id = game.game_id;
  snap.game_number = game.game_number;
  snap.phase = game.phase;
  for (const auto& [_, s] : state_.sessions) {
    if (s.game_id != game.game_id) continue;
    ++snap.players_count;
    if (s.diagram_submitted) ++snap.diagrams_submitted;
    if (s.phase == SessionPhase::done) ++snap.paths_submitted;
  }
  for (const Answer& a : state_.answers) {
    if (a.game_id == game.game_id && a.diagram) snap.previews.push_back({a.student_id, *a.diagram});
  }
  return snap;
}

ServiceEvent GameService::monitor_event_locked(const Game& game) const {
  return {EventType::monitor_update, game.game_id, encode_monitor(monitor_locked(game), false), {}, true};
}

// ---------------------------------------------------------------------------
// Professor operations

GameRef GameService::create_game(Diagram reference_diagram, std::vector<NodePath> reference_paths,
                                 std::string code, AdvanceMode mode) {
  if (code.size() < kMinCodeLength || code.size() > kMaxCodeLength || !printable_token(code)) {
    throw Error(ErrorCode::invalid_argument, "game code must be 4-12 visible characters",
                {{"location", "/code"}});
  }
  const graph::GraphMetrics m = graph::metrics(reference_diagram);
  if (m.n == 0 || !m.connected) {
    throw Error(ErrorCode::invalid_reference, "reference diagram must be a connected graph",
                {{"location", "/reference_diagram"}, {"n", m.n}, {"connected", m.connected}});
  }
  for (std::size_t i = 0; i < reference_paths.size(); ++i) {
    const auto verdict = graph::validate_path(reference_diagram, reference_paths[i]);
    if (!verdict.valid) {
      throw Error(ErrorCode::invalid_reference,
                  "reference path " + reference_paths[i].to_string() + " has no edge " +
                      std::to_string(verdict.missing_pair->first) + "->" +
                      std::to_string(verdict.missing_pair->second),
                  {{"location", "/reference_paths/" + std::to_string(i)},
                   {"path", reference_paths[i].to_string()},
                   {"failure", graph::to_string(verdict.failure)},
                   {"failure_position", *verdict.failure_position},
                   {"missing_pair", {verdict.missing_pair->first, verdict.missing_pair->second}}});
    }
  }
  if (static_cast<long>(reference_paths.size()) != *m.cc_structural) {
    throw Error(ErrorCode::invalid_reference,
                "reference lists " + std::to_string(reference_paths.size()) +
                    " paths but the diagram's cyclomatic complexity is " +
                    std::to_string(*m.cc_structural),
                {{"location", "/reference_paths"},
                 {"path_count", reference_paths.size()},
                 {"cc", *m.cc_structural}});
  }

  std::lock_guard lock(mutex_);
  const std::string game_id = "g" + std::to_string(state_.next_game);
  const int number = static_cast<int>(state_.next_game);
  commit({{"type", "game_created"},
          {"at", to_millis(now_locked())},
          {"game_id", game_id},
          {"game_number", number},
          {"code", code},
          {"advance_mode", to_string(mode)},
          {"reference_diagram", graph::encode_diagram(reference_diagram)},
          {"reference_paths", graph::encode_paths(reference_paths)}});
  return {game_id, number, *m.cc_structural};
}

GamePhase GameService::open_game(std::string_view game_id) {
  std::lock_guard lock(mutex_);
  const Game& game = game_locked(game_id);
  if (game.phase != GamePhase::created) wrong_state(game, "open");
  const std::string id = game.game_id;
  commit({{"type", "game_opened"}, {"at", to_millis(now_locked())}, {"game_id", id}});
  return game_locked(id).phase;
}

GamePhase GameService::advance_game(std::string_view game_id) {
  std::lock_guard lock(mutex_);
  const Game& game = game_locked(game_id);
  if (game.phase != GamePhase::phase1_open) wrong_state(game, "advance");
  const std::string id = game.game_id;
  commit({{"type", "game_advanced"}, {"at", to_millis(now_locked())}, {"game_id", id}});
  return game_locked(id).phase;
}

GamePhase GameService::close_game(std::string_view game_id) {
  std::lock_guard lock(mutex_);
  const Game& game = game_locked(game_id);
  if (game.phase != GamePhase::phase2_open) wrong_state(game, "close");
  const std::string id = game.game_id;
  commit({{"type", "game_closed"}, {"at", to_millis(now_locked())}, {"game_id", id}});
  return game_locked(id).phase;
}

MonitorSnapshot GameService::monitor(std::string_view game_id) const {
  std::lock_guard lock(mutex_);
  return monitor_locked(game_locked(game_id));
}

std::vector<Answer> GameService::list_answers(std::optional<std::string_view> game_id) const {
  std::lock_guard lock(mutex_);
  std::vector<Answer> out;
  for (const Answer& a : state_.answers) {
    if (!game_id || a.game_id == *game_id) out.push_back(a);
  }
  return out;
}

Answer GameService::get_answer(std::string_view answer_id) const {
  std::lock_guard lock(mutex_);
  for (const Answer& a : state_.answers) {
    if (a.answer_id == answer_id) return a;
  }
  throw Error(ErrorCode::not_found, "no answer '" + std::string(answer_id) + "'",
              {{"answer_id", answer_id}});
}

void GameService::delete_answer(std::string_view answer_id) {
  std::lock_guard lock(mutex_);
  const bool exists = std::any_of(state_.answers.begin(), state_.answers.end(),
                                  [&](const Answer& a) { return a.answer_id == answer_id; });
  if (!exists) {
    throw Error(ErrorCode::not_found, "no answer '" + std::string(answer_id) + "'",
                {{"answer_id", answer_id}});
  }
  commit({{"type", "answer_deleted"}, {"at", to_millis(now_locked())}, {"answer_id", answer_id}});
}

std::vector<Game> GameService::games() const {
  std::lock_guard lock(mutex_);
  return state_.games;
}

// ---------------------------------------------------------------------------
// Student operations

std::vector<GameListing> GameService::list_games(std::string_view code) const {
  std::lock_guard lock(mutex_);
  std::vector<GameListing> out;
  for (const Game& g : state_.games) {
    const bool playable = g.phase == GamePhase::phase1_open || g.phase == GamePhase::phase2_open;
    if (playable && code_matches(g.code, code)) out.push_back({g.game_number, g.phase});
  }
  return out;
}

JoinResult GameService::join(std::string_view code, std::string_view student_id, int game_number) {
  std::lock_guard lock(mutex_);
  auto it = std::find_if(state_.games.begin(), state_.games.end(), [&](const Game& g) {
    return g.game_number == game_number && code_matches(g.code, code);
  });
  // Same answer for "no such game" and "wrong code": the code is the lock.
  if (it == state_.games.end()) throw Error(ErrorCode::access_denied, "code does not unlock that game");
  const Game& game = *it;
  if (game.phase != GamePhase::phase1_open && game.phase != GamePhase::phase2_open) {
    throw Error(ErrorCode::unavailable, "game " + std::to_string(game_number) + " is not being played",
                {{"phase", to_string(game.phase)}});
  }
  if (student_id.empty() || student_id.size() > kMaxStudentIdLength || !printable_token(student_id)) {
    throw Error(ErrorCode::invalid_argument, "student id must be 1-32 visible characters",
                {{"location", "/student_id"}});
  }
  for (const auto& [token, s] : state_.sessions) {
    if (s.game_id == game.game_id && s.student_id == student_id) {
      return {token, game.game_number, s.phase, true};
    }
  }
  std::string token = tokens_();
  while (state_.sessions.contains(token)) token = tokens_();
  const int number = game.game_number;
  commit({{"type", "session_joined"},
          {"at", to_millis(now_locked())},
          {"token", token},
          {"student_id", student_id},
          {"game_id", game.game_id}});
  return {token, number, state_.sessions.at(token).phase, false};
}

SessionPhase GameService::submit_diagram(std::string_view session_token, Diagram diagram) {
  std::lock_guard lock(mutex_);
  const Session& session = session_locked(session_token);
  const Game& game = game_locked(session.game_id);
  if (game.phase == GamePhase::closed) throw Error(ErrorCode::unavailable, "game is closed");
  if (session.phase != SessionPhase::phase1 && session.phase != SessionPhase::waiting) {
    out_of_order(session, "diagram submission");
  }
  if (game.advance_mode == AdvanceMode::professor_triggered && game.phase != GamePhase::phase1_open) {
    throw Error(ErrorCode::order_violation, "phase 1 has ended for this game",
                {{"game_phase", to_string(game.phase)}});
  }
  commit({{"type", "diagram_submitted"},
          {"at", to_millis(now_locked())},
          {"token", session.token},
          {"diagram", graph::encode_diagram(diagram)}});
  return session_locked(session_token).phase;
}

SessionPhase GameService::submit_paths(std::string_view session_token, std::vector<NodePath> paths) {
  std::lock_guard lock(mutex_);
  const Session& session = session_locked(session_token);
  const Game& game = game_locked(session.game_id);
  if (game.phase == GamePhase::closed) throw Error(ErrorCode::unavailable, "game is closed");
  if (session.phase != SessionPhase::phase2) out_of_order(session, "path submission");
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (paths[i].size() < 2) {
      throw Error(ErrorCode::malformed_path, "a path needs at least two nodes",
                  {{"location", "/paths/" + std::to_string(i)}});
    }
  }
  commit({{"type", "paths_submitted"},
          {"at", to_millis(now_locked())},
          {"token", session.token},
          {"paths", graph::encode_paths(paths)}});
  return session_locked(session_token).phase;
}

Diagram GameService::phase2_payload(std::string_view session_token) const {
  std::lock_guard lock(mutex_);
  const Session& session = session_locked(session_token);
  if (session.phase != SessionPhase::phase2 && session.phase != SessionPhase::done) {
    out_of_order(session, "phase 2 payload");
  }
  return game_locked(session.game_id).reference_diagram;
}

SessionState GameService::session_state(std::string_view session_token) const {
  std::lock_guard lock(mutex_);
  const Session& s = session_locked(session_token);
  const Game& g = game_locked(s.game_id);
  return {s.student_id, g.game_id, g.game_number, s.phase, g.phase, g.advance_mode, s.diagram_submitted};
}

// ---------------------------------------------------------------------------
// Mutation application

void GameService::apply(const json& mutation) {
  std::lock_guard lock(mutex_);
  apply_locked(mutation, nullptr);
}

std::uint64_t GameService::last_sequence() const {
  std::lock_guard lock(mutex_);
  return state_.sequence;
}

void GameService::apply_locked(const json& m, std::vector<ServiceEvent>* events) {
  const auto seq = m.at("seq").get<std::uint64_t>();
  if (seq != state_.sequence + 1) {
    throw Error(ErrorCode::storage_failure,
                "mutation " + std::to_string(seq) + " does not follow " + std::to_string(state_.sequence));
  }
  const std::string type = m.at("type").get<std::string>();
  const Timestamp at = from_millis(m.at("at").get<std::int64_t>());
  auto emit = [&](ServiceEvent e) {
    if (events) events->push_back(std::move(e));
  };

  // Stage the change on a copy so a malformed record leaves state untouched.
  State next = state_;
  if (type == "game_created") {
    Game g;
    g.game_id = m.at("game_id").get<std::string>();
    g.game_number = m.at("game_number").get<int>();
    g.code = m.at("code").get<std::string>();
    g.advance_mode = parse_advance_mode(m.at("advance_mode").get<std::string>());
    g.reference_diagram = graph::decode_diagram(m.at("reference_diagram"));
    g.reference_paths = graph::decode_paths(m.at("reference_paths"));
    g.reference_cc = graph::metrics(g.reference_diagram).cc_structural.value_or(0);
    g.created_at = at;
    next.next_game = std::max<std::uint64_t>(next.next_game, g.game_number + 1);
    next.games.push_back(std::move(g));
  } else if (type == "game_opened" || type == "game_advanced" || type == "game_closed") {
    const std::string game_id = m.at("game_id").get<std::string>();
    auto it = std::find_if(next.games.begin(), next.games.end(),
                           [&](const Game& g) { return g.game_id == game_id; });
    if (it == next.games.end()) throw Error(ErrorCode::storage_failure, "mutation names unknown game");
    Game& g = *it;
    if (type == "game_opened") {
      g.phase = GamePhase::phase1_open;
      emit({EventType::game_opened, g.game_id, {{"game_number", g.game_number}}, {}, true});
    } else if (type == "game_advanced") {
      g.phase = GamePhase::phase2_open;
      for (auto& [_, s] : next.sessions) {
        if (s.game_id == g.game_id &&
            (s.phase == SessionPhase::phase1 || s.phase == SessionPhase::waiting)) {
          s.phase = SessionPhase::phase2;
        }
      }
    } else {
      g.phase = GamePhase::closed;
    }
  } else if (type == "session_joined") {
    Session s;
    s.token = m.at("token").get<std::string>();
    s.student_id = m.at("student_id").get<std::string>();
    s.game_id = m.at("game_id").get<std::string>();
    s.joined_at = at;
    auto git = std::find_if(next.games.begin(), next.games.end(),
                            [&](const Game& g) { return g.game_id == s.game_id; });
    if (git == next.games.end()) throw Error(ErrorCode::storage_failure, "mutation names unknown game");
    // Late joiners land straight in phase 2 once the professor has advanced.
    s.phase = git->advance_mode == AdvanceMode::professor_triggered && git->phase == GamePhase::phase2_open
                  ? SessionPhase::phase2
                  : SessionPhase::phase1;
    next.sessions.emplace(s.token, s);
  } else if (type == "diagram_submitted" || type == "paths_submitted") {
    auto sit = next.sessions.find(m.at("token").get<std::string>());
    if (sit == next.sessions.end()) throw Error(ErrorCode::storage_failure, "mutation names unknown session");
    Session& s = sit->second;
    auto git = std::find_if(next.games.begin(), next.games.end(),
                            [&](const Game& g) { return g.game_id == s.game_id; });
    if (git == next.games.end()) throw Error(ErrorCode::storage_failure, "mutation names unknown game");
    const Game& g = *git;
    auto ait = std::find_if(next.answers.begin(), next.answers.end(), [&](const Answer& a) {
      return a.student_id == s.student_id && a.game_id == s.game_id;
    });
    if (ait == next.answers.end()) {
      Answer a;
      a.answer_id = "a" + std::to_string(next.next_answer++);
      a.student_id = s.student_id;
      a.game_id = g.game_id;
      a.game_number = g.game_number;
      a.created_at = at;
      next.answers.push_back(std::move(a));
      ait = std::prev(next.answers.end());
    }
    Answer& a = *ait;
    if (type == "diagram_submitted") {
      if (a.diagram) {
        a.history.push_back({*a.submitted_at_diagram, std::move(*a.diagram)});
        a.resubmitted = true;
      }
      a.diagram = graph::decode_diagram(m.at("diagram"));
      a.submitted_at_diagram = at;
      s.diagram_submitted = true;
      s.phase = g.advance_mode == AdvanceMode::individual ? SessionPhase::phase2 : SessionPhase::waiting;
    } else {
      a.paths = graph::decode_paths(m.at("paths"));
      a.submitted_at_paths = at;
      a.diagram_missing = !a.diagram.has_value();
      const Diagram submitted = a.diagram ? *a.diagram : Diagram(g.reference_diagram.extent());
      a.analysis = grading::analyze_answer(submitted, *a.paths, g.reference_diagram, g.reference_cc);
      s.phase = SessionPhase::done;
    }
  } else if (type == "answer_deleted") {
    const std::string id = m.at("answer_id").get<std::string>();
    auto ait = std::find_if(next.answers.begin(), next.answers.end(),
                            [&](const Answer& a) { return a.answer_id == id; });
    if (ait == next.answers.end()) throw Error(ErrorCode::storage_failure, "mutation names unknown answer");
    next.answers.erase(ait);
  } else {
    throw Error(ErrorCode::storage_failure, "unknown mutation type '" + type + "'");
  }

  next.sequence = seq;
  next.last_time = std::max(next.last_time, at);
  state_ = std::move(next);

  if (!events) return;
  // Events are derived from the committed state.
  if (type == "game_advanced" || type == "game_closed") {
    const Game& g = game_locked(m.at("game_id").get<std::string>());
    json payload = {{"game_number", g.game_number}, {"phase", to_string(g.phase)}};
    if (type == "game_advanced") payload["reference_diagram"] = graph::encode_diagram(g.reference_diagram);
    emit({type == "game_advanced" ? EventType::phase_advanced : EventType::game_closed, g.game_id,
          std::move(payload), tokens_for_locked(g.game_id), true});
    emit(monitor_event_locked(g));
  } else if (type == "session_joined" || type == "diagram_submitted" || type == "paths_submitted") {
    const Session& s = session_locked(m.at("token").get<std::string>());
    emit(monitor_event_locked(game_locked(s.game_id)));
  } else if (type == "answer_deleted") {
    // The dashboard's answer list changed; counters are session-based and stay put.
    for (const Game& g : state_.games) {
      if (g.phase != GamePhase::created) emit(monitor_event_locked(g));
    }
  }
}

// ---------------------------------------------------------------------------
// Snapshots

json GameService::snapshot() const {
  std::lock_guard lock(mutex_);
  json games = json::array();
  for (const Game& g : state_.games) games.push_back(detail::save_game(g));
  json sessions = json::array();
  for (const auto& [_, s] : state_.sessions) sessions.push_back(detail::save_session(s));
  json answers = json::array();
  for (const Answer& a : state_.answers) answers.push_back(detail::save_answer(a));
  return {{"format", 1},
          {"sequence", state_.sequence},
          {"next_game", state_.next_game},
          {"next_answer", state_.next_answer},
          {"last_time", to_millis(state_.last_time)},
          {"games", std::move(games)},
          {"sessions", std::move(sessions)},
          {"answers", std::move(answers)}};
}

void GameService::load_snapshot(const json& doc) {
  State next;
  next.sequence = doc.at("sequence").get<std::uint64_t>();
  next.next_game = doc.at("next_game").get<std::uint64_t>();
  next.next_answer = doc.at("next_answer").get<std::uint64_t>();
  next.last_time = from_millis(doc.at("last_time").get<std::int64_t>());
  for (const auto& g : doc.at("games")) next.games.push_back(detail::load_game(g));
  for (const auto& s : doc.at("sessions")) {
    Session session = detail::load_session(s);
    next.sessions.emplace(session.token, std::move(session));
  }
  for (const auto& a : doc.at("answers")) {
    Answer answer = detail::load_answer(a);
    if (answer.paths) {
      auto git = std::find_if(next.games.begin(), next.games.end(),
                              [&](const Game& g) { return g.game_id == answer.game_id; });
      if (git == next.games.end()) throw Error(ErrorCode::storage_failure, "answer names unknown game");
      const Diagram submitted = answer.diagram ? *answer.diagram : Diagram(git->reference_diagram.extent());
      answer.analysis = grading::analyze_answer(submitted, *answer.paths, git->reference_diagram,
                                                git->reference_cc);
    }
    next.answers.push_back(std::move(answer));
  }
  std::lock_guard lock(mutex_);
  state_ = std::move(next);
}

}  // namespace flowclass::game
