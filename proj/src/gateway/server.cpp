#include "flowclass/gateway/server.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <condition_variable>
#include <random>
#include <thread>

#include <httplib.h>

#include "flowclass/gateway/api.hpp"
#include "flowclass/gateway/event_hub.hpp"

namespace flowclass::gateway {

using nlohmann::json;
using namespace std::chrono_literals;

namespace {

std::string make_epoch() {
  std::mt19937_64 rng(std::random_device{}() ^
                      static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count()));
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  std::uint64_t bits = rng();
  for (int i = 0; i < 12; ++i, bits >>= 4) out += kHex[bits & 0xF];
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

ApiRequest to_api(const httplib::Request& req) {
  ApiRequest out;
  out.method = req.method;
  out.path = req.path;
  for (const auto& [k, v] : req.headers) out.headers.emplace(lower(k), v);
  for (const auto& [k, v] : req.params) out.query.emplace(k, v);
  out.body = req.body;
  return out;
}

void write_api(httplib::Response& res, const ApiResponse& api) {
  res.status = api.status;
  res.set_content(api.body, "application/json");
}

/// Parses "<epoch>-<seq>" from Last-Event-ID (or the last_event_id query).
std::pair<std::string, std::uint64_t> resume_point(const httplib::Request& req) {
  std::string id = req.get_header_value("Last-Event-ID");
  if (id.empty() && req.has_param("last_event_id")) id = req.get_param_value("last_event_id");
  const auto dash = id.rfind('-');
  if (dash == std::string::npos) return {"", 0};
  try {
    return {id.substr(0, dash), std::stoull(id.substr(dash + 1))};
  } catch (const std::exception&) {
    return {"", 0};
  }
}

}  // namespace

struct Server::Impl {
  ServerConfig config;
  game::GameService service;
  Store store;
  EventHub hub;
  Api api;
  RestoreReport restore;
  httplib::Server http;
  std::thread listener;
  std::atomic<bool> stopping{false};
  int bound_port = 0;

  explicit Impl(ServerConfig cfg)
      : config(std::move(cfg)),
        service(game::ServiceOptions{config.case_insensitive_codes}),
        store(Store::Options{config.data_dir, config.snapshot_every}),
        hub(make_epoch(), config.event_buffer_limit),
        api(service, hub, config.professor_secret, &store) {
    restore = store.restore(service);
    store.attach(service);
    route_events(service, hub);
    configure();
  }

  void stream(httplib::Response& res, const std::string& key, const httplib::Request& req) {
    auto [epoch, seq] = resume_point(req);
    struct Cursor {
      std::uint64_t after = 0;
      bool greeted = false;
      bool epoch_changed = false;
      std::chrono::steady_clock::time_point last_write = std::chrono::steady_clock::now();
    };
    auto cursor = std::make_shared<Cursor>();
    if (!epoch.empty() && epoch == hub.epoch()) {
      cursor->after = seq;
    } else if (!epoch.empty()) {
      cursor->epoch_changed = true;
    }
    res.set_header("Cache-Control", "no-cache");
    res.set_header("X-Accel-Buffering", "no");
    res.set_chunked_content_provider(
        "text/event-stream", [this, key, cursor](std::size_t, httplib::DataSink& sink) {
          auto send = [&](const std::string& text) {
            cursor->last_write = std::chrono::steady_clock::now();
            return sink.write(text.data(), text.size());
          };
          if (!cursor->greeted) {
            cursor->greeted = true;
            std::string hello = "retry: 1000\n: epoch " + hub.epoch() + "\n\n";
            if (cursor->epoch_changed) {
              hello += "event: resync\ndata: " +
                       json{{"epoch", hub.epoch()}, {"reason", "epoch_changed"}}.dump() + "\n\n";
            }
            if (!send(hello)) return false;
          }
          if (stopping) {
            sink.done();
            return true;
          }
          auto batch = hub.wait(key, cursor->after, 250ms);
          if (batch.closed || stopping) {
            sink.done();
            return true;
          }
          if (batch.gap) {
            const std::string frame = "event: resync\ndata: " +
                                      json{{"epoch", hub.epoch()}, {"reason", "gap"}}.dump() + "\n\n";
            if (!send(frame)) return false;
          }
          for (const auto& message : batch.messages) {
            if (!send(format_sse(message, hub.epoch()))) return false;
            cursor->after = message.sequence_number;
          }
          if (std::chrono::steady_clock::now() - cursor->last_write > 10s) {
            if (!send(": ping\n\n")) return false;
          }
          return sink.is_writable();
        });
  }

  void configure() {
    const std::size_t threads = std::max<std::size_t>(config.worker_threads, 4);
    http.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    http.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    http.set_payload_max_length(config.max_body_bytes);
    http.set_keep_alive_timeout(2);
    http.set_read_timeout(10, 0);

    http.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      const auto length = req.get_header_value_u64("Content-Length");
      if (length > config.max_body_bytes) {
        write_api(res, error_response(Error(ErrorCode::payload_too_large,
                                            "request body exceeds " + std::to_string(config.max_body_bytes) + " bytes",
                                            {{"limit", config.max_body_bytes}})));
        res.set_header("Connection", "close");
        return httplib::Server::HandlerResponse::Handled;
      }
      return httplib::Server::HandlerResponse::Unhandled;
    });
    http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
      const ErrorCode code = res.status == 413 ? ErrorCode::payload_too_large
                             : res.status == 404 ? ErrorCode::not_found
                                                 : ErrorCode::decode_error;
      write_api(res, error_response(Error(code, httplib::status_message(res.status))));
      return httplib::Server::HandlerResponse::Handled;
    });

    http.Get("/api/student/events", [this](const httplib::Request& req, httplib::Response& res) {
      const ApiRequest ar = to_api(req);
      try {
        stream(res, session_key(api.session_token(ar)), req);
      } catch (const Error& e) {
        write_api(res, error_response(e));
      }
    });
    http.Get("/api/professor/events", [this](const httplib::Request& req, httplib::Response& res) {
      if (!api.professor_authorized(to_api(req))) {
        write_api(res, error_response(Error(ErrorCode::unauthorized, "professor credential required")));
        return;
      }
      stream(res, kProfessorKey, req);
    });

    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
      write_api(res, api.handle(to_api(req)));
    };
    http.Get("/api/.*", forward);
    http.Post("/api/.*", forward);
    http.Delete("/api/.*", forward);

    if (config.web_root && !http.set_mount_point("/", config.web_root->string())) {
      throw Error(ErrorCode::invalid_argument, "web root '" + config.web_root->string() + "' is not a directory");
    }
  }
};

Server::Server(ServerConfig config) {
  if (config.professor_secret.empty()) {
    throw Error(ErrorCode::invalid_argument, "a professor secret is required");
  }
  impl_ = std::make_unique<Impl>(std::move(config));
}

Server::~Server() { stop(); }

int Server::start() {
  Impl& s = *impl_;
  const int port = s.config.listen_port == 0 ? s.http.bind_to_any_port(s.config.host)
                                             : (s.http.bind_to_port(s.config.host, s.config.listen_port)
                                                    ? s.config.listen_port
                                                    : -1);
  if (port < 0) {
    throw Error(ErrorCode::unavailable,
                "cannot bind " + s.config.host + ":" + std::to_string(s.config.listen_port),
                {{"port", s.config.listen_port}});
  }
  s.bound_port = port;
  s.listener = std::thread([&s] { s.http.listen_after_bind(); });
  s.http.wait_until_ready();
  return port;
}

void Server::stop() {
  if (!impl_) return;
  Impl& s = *impl_;
  s.stopping = true;
  s.hub.shutdown();
  s.http.stop();
  if (s.listener.joinable()) s.listener.join();
}

void Server::wait() {
  if (impl_->listener.joinable()) impl_->listener.join();
}

int Server::port() const noexcept { return impl_->bound_port; }
const std::string& Server::epoch() const noexcept { return impl_->hub.epoch(); }
const RestoreReport& Server::restore_report() const noexcept { return impl_->restore; }
game::GameService& Server::service() noexcept { return impl_->service; }

}  // namespace flowclass::gateway
