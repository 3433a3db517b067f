#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flowclass/game/types.hpp"

namespace flowclass::game {

struct ServiceOptions {
  bool case_insensitive_codes = true;
};

inline constexpr std::size_t kMinCodeLength = 4;
inline constexpr std::size_t kMaxCodeLength = 12;
inline constexpr std::size_t kMaxStudentIdLength = 32;

/// Random code of `length` characters from [A-Z0-9].
std::string generate_code(std::size_t length = 6);

/// Owns every game, session and answer. Each public operation is
/// linearizable: it validates under one lock, hands the resulting mutation
/// record to the journal, and only then applies it. A journal failure leaves
/// the state untouched. Restoring replays the same mutation records through
/// apply(), so live play and recovery share one code path.
class GameService {
 public:
  using Clock = std::function<Timestamp()>;
  using TokenSource = std::function<std::string()>;
  using Journal = std::function<void(const nlohmann::json& mutation)>;
  using Listener = std::function<void(const ServiceEvent& event)>;

  explicit GameService(ServiceOptions options = {}, Clock clock = {}, TokenSource tokens = {});

  GameService(const GameService&) = delete;
  GameService& operator=(const GameService&) = delete;

  void set_journal(Journal journal);
  void set_listener(Listener listener);

  // Professor operations.
  GameRef create_game(Diagram reference_diagram, std::vector<NodePath> reference_paths,
                      std::string code, AdvanceMode mode);
  GamePhase open_game(std::string_view game_id);
  GamePhase advance_game(std::string_view game_id);
  GamePhase close_game(std::string_view game_id);
  MonitorSnapshot monitor(std::string_view game_id) const;
  std::vector<Answer> list_answers(std::optional<std::string_view> game_id = std::nullopt) const;
  Answer get_answer(std::string_view answer_id) const;
  void delete_answer(std::string_view answer_id);
  std::vector<Game> games() const;

  // Student operations.
  std::vector<GameListing> list_games(std::string_view code) const;
  JoinResult join(std::string_view code, std::string_view student_id, int game_number);
  SessionPhase submit_diagram(std::string_view session_token, Diagram diagram);
  SessionPhase submit_paths(std::string_view session_token, std::vector<NodePath> paths);
  Diagram phase2_payload(std::string_view session_token) const;
  SessionState session_state(std::string_view session_token) const;

  // Persistence.
  void apply(const nlohmann::json& mutation);
  nlohmann::json snapshot() const;
  void load_snapshot(const nlohmann::json& snapshot);
  std::uint64_t last_sequence() const;

 private:
  struct State {
    std::vector<Game> games;  // creation order
    std::map<std::string, Session, std::less<>> sessions;
    std::vector<Answer> answers;  // chronological
    std::uint64_t sequence = 0;
    std::uint64_t next_game = 1;
    std::uint64_t next_answer = 1;
    Timestamp last_time{};
  };

  void commit(nlohmann::json mutation);
  void apply_locked(const nlohmann::json& mutation, std::vector<ServiceEvent>* events);
  void notify(const std::vector<ServiceEvent>& events) const;
  Timestamp now_locked();

  Game& game_locked(std::string_view game_id);
  const Game& game_locked(std::string_view game_id) const;
  Session& session_locked(std::string_view token);
  const Session& session_locked(std::string_view token) const;
  bool code_matches(std::string_view stored, std::string_view offered) const;
  MonitorSnapshot monitor_locked(const Game& game) const;
  std::vector<std::string> tokens_for_locked(std::string_view game_id) const;
  ServiceEvent monitor_event_locked(const Game& game) const;

  ServiceOptions options_;
  Clock clock_;
  TokenSource tokens_;
  Journal journal_;
  Listener listener_;

  mutable std::mutex mutex_;
  State state_;
};

}  // namespace flowclass::game
