#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "flowclass/game/service.hpp"
#include "flowclass/gateway/store.hpp"

namespace flowclass::gateway {

struct ServerConfig {
  std::string host = "0.0.0.0";
  int listen_port = 8080;  // 0 binds an ephemeral port
  std::filesystem::path data_dir;
  std::string professor_secret;
  std::size_t max_body_bytes = 1 << 20;
  bool case_insensitive_codes = true;
  std::size_t snapshot_every = 200;
  std::size_t worker_threads = 128;
  std::size_t event_buffer_limit = 256;
  std::optional<std::filesystem::path> web_root;  // static files for the web client
};

/// HTTP front end: JSON routes from Api plus two server-sent-event streams
/// (/api/student/events, /api/professor/events). Construction restores state
/// from data_dir; start() binds the port.
class Server {
 public:
  /// Throws Error(storage_failure / invalid_argument) when the config is unusable.
  explicit Server(ServerConfig config);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and serves on a background thread; returns the bound port.
  /// Throws Error(unavailable) if the port cannot be bound.
  int start();

  /// Ends event streams, stops accepting and joins the listener thread.
  void stop();

  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();

  int port() const noexcept;
  const std::string& epoch() const noexcept;
  const RestoreReport& restore_report() const noexcept;
  game::GameService& service() noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace flowclass::gateway
