#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowclass/game/types.hpp"

namespace flowclass::gateway {

struct EventMessage {
  game::EventType type = game::EventType::monitor_update;
  std::string game_id;
  nlohmann::json payload;
  std::uint64_t sequence_number = 0;
};

/// SSE frame: "id: <epoch>-<seq>\nevent: <type>\ndata: <json>\n\n".
std::string format_sse(const EventMessage& message, const std::string& epoch);

/// Per-subscriber outboxes with monotone sequence numbers.
///
/// Subscribers are named by key ("session:<token>", "professor"). Publishing
/// never blocks on readers: each outbox keeps at most `buffer_limit` recent
/// messages and older ones are dropped. A reader whose cursor fell behind the
/// retained window is told to resync from the snapshot endpoints instead.
class EventHub {
 public:
  explicit EventHub(std::string epoch, std::size_t buffer_limit = 256);

  void publish(const std::string& key, game::EventType type, const std::string& game_id,
               const nlohmann::json& payload);

  struct Batch {
    std::vector<EventMessage> messages;
    bool gap = false;       // messages after `after` were dropped before delivery
    bool closed = false;    // hub is shutting down
  };

  /// Messages for `key` with sequence > after, waiting up to `timeout` for
  /// the first one to arrive.
  Batch wait(const std::string& key, std::uint64_t after, std::chrono::milliseconds timeout);

  std::uint64_t latest_sequence(const std::string& key) const;
  const std::string& epoch() const noexcept { return epoch_; }

  void shutdown();

 private:
  struct Outbox {
    std::deque<EventMessage> buffer;
    std::uint64_t next_sequence = 1;
  };

  std::string epoch_;
  std::size_t buffer_limit_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::map<std::string, Outbox, std::less<>> outboxes_;
  bool closed_ = false;
};

std::string session_key(const std::string& token);
inline const std::string kProfessorKey = "professor";

}  // namespace flowclass::gateway
