#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "flowclass/game/service.hpp"

namespace flowclass::gateway {

/// Where restore stopped reading the log, when it did not reach the end.
struct Truncation {
  std::size_t line = 0;         // 1-based line of the first rejected entry
  std::uint64_t byte_offset = 0;  // log size kept after truncation
  std::string reason;
};

struct RestoreReport {
  std::uint64_t snapshot_sequence = 0;  // 0 when no usable snapshot was found
  std::size_t replayed = 0;
  std::uint64_t last_sequence = 0;
  std::optional<Truncation> truncation;
  bool snapshot_rejected = false;
};

/// Durable home of the service state inside data_dir:
///   log.jsonl      append-only, one mutation record per line, fsync'd
///   snapshot.json  full state as of some log sequence, replaced atomically
/// The log is never rewritten except to cut a corrupt tail during restore, so
/// replaying it alone always reproduces the state a snapshot captures.
class Store {
 public:
  struct Options {
    std::filesystem::path data_dir;
    std::size_t snapshot_every = 200;  // mutations between snapshots; 0 disables
  };

  /// Fails with storage_failure unless data_dir exists and is writable.
  explicit Store(Options options);
  ~Store();

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  /// Loads the latest snapshot, replays newer log entries and cuts any
  /// corrupt tail so later appends start on a clean line.
  RestoreReport restore(game::GameService& service, bool use_snapshot = true);

  /// Writes one record and fsyncs before returning.
  void append(const nlohmann::json& mutation);

  /// Snapshots the service if enough mutations accumulated since the last one.
  void maybe_snapshot(const game::GameService& service);
  void write_snapshot(const game::GameService& service);

  /// Wires the service journal to append().
  void attach(game::GameService& service);

  const std::filesystem::path& log_path() const noexcept { return log_path_; }
  const std::filesystem::path& snapshot_path() const noexcept { return snapshot_path_; }

 private:
  Options options_;
  std::filesystem::path log_path_;
  std::filesystem::path snapshot_path_;
  int log_fd_ = -1;
  std::mutex log_mutex_;
  std::mutex snapshot_mutex_;
  std::atomic<std::uint64_t> appended_since_snapshot_{0};
};

}  // namespace flowclass::gateway
