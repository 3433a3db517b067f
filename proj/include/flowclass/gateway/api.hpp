#pragma once

#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "flowclass/game/service.hpp"
#include "flowclass/gateway/event_hub.hpp"
#include "flowclass/gateway/store.hpp"

namespace flowclass::gateway {

/// Transport-neutral request. Header names are lower-case.
struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> headers;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string body;
};

int http_status(ErrorCode code) noexcept;

/// {"error":{"code":...,"message":...,"details":...}}
ApiResponse error_response(const Error& error);

/// Forwards service events into per-subscriber hub outboxes.
void route_events(game::GameService& service, EventHub& hub);

/// Request/response face of the game service. Every route and document is
/// listed in PROTOCOL.md. Event streams are served by Server, which uses
/// the authentication helpers below.
class Api {
 public:
  Api(game::GameService& service, EventHub& hub, std::string professor_secret,
      Store* store = nullptr);

  ApiResponse handle(const ApiRequest& request);

  /// Professor credential: "Authorization: Bearer <secret>", or the `secret`
  /// query parameter for clients that cannot set headers.
  bool professor_authorized(const ApiRequest& request) const;

  /// Session token from "X-Session-Token" or the `token` query parameter.
  /// Throws unauthorized if absent or unknown.
  std::string session_token(const ApiRequest& request) const;

 private:
  ApiResponse route(const ApiRequest& request);
  ApiResponse student_route(const ApiRequest& request, const std::string& rest);
  ApiResponse professor_route(const ApiRequest& request, const std::string& rest);
  void after_mutation();

  game::GameService& service_;
  EventHub& hub_;
  std::string professor_secret_;
  Store* store_;
};

}  // namespace flowclass::gateway
