#include "flowclass/gateway/event_hub.hpp"

namespace flowclass::gateway {

std::string session_key(const std::string& token) { return "session:" + token; }

std::string format_sse(const EventMessage& message, const std::string& epoch) {
  const nlohmann::json data = {{"type", game::to_string(message.type)},
                               {"game_id", message.game_id},
                               {"sequence_number", message.sequence_number},
                               {"epoch", epoch},
                               {"payload", message.payload}};
  std::string frame = "id: " + epoch + "-" + std::to_string(message.sequence_number) + "\n";
  frame += "event: " + std::string(game::to_string(message.type)) + "\n";
  frame += "data: " + data.dump() + "\n\n";
  return frame;
}

EventHub::EventHub(std::string epoch, std::size_t buffer_limit)
    : epoch_(std::move(epoch)), buffer_limit_(buffer_limit == 0 ? 1 : buffer_limit) {}

void EventHub::publish(const std::string& key, game::EventType type, const std::string& game_id,
                       const nlohmann::json& payload) {
  {
    std::lock_guard lock(mutex_);
    Outbox& box = outboxes_[key];
    box.buffer.push_back({type, game_id, payload, box.next_sequence++});
    while (box.buffer.size() > buffer_limit_) box.buffer.pop_front();
  }
  cv_.notify_all();
}

EventHub::Batch EventHub::wait(const std::string& key, std::uint64_t after,
                               std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  auto ready = [&] {
    if (closed_) return true;
    auto it = outboxes_.find(key);
    return it != outboxes_.end() && it->second.next_sequence > after + 1;
  };
  cv_.wait_for(lock, timeout, ready);

  Batch batch;
  batch.closed = closed_;
  auto it = outboxes_.find(key);
  if (it == outboxes_.end()) return batch;
  const Outbox& box = it->second;
  if (!box.buffer.empty() && box.buffer.front().sequence_number > after + 1) batch.gap = true;
  for (const auto& message : box.buffer) {
    if (message.sequence_number > after) batch.messages.push_back(message);
  }
  return batch;
}

std::uint64_t EventHub::latest_sequence(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = outboxes_.find(key);
  return it == outboxes_.end() ? 0 : it->second.next_sequence - 1;
}

void EventHub::shutdown() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  cv_.notify_all();
}

}  // namespace flowclass::gateway
