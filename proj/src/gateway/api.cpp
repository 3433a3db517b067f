#include "flowclass/gateway/api.hpp"

#include <initializer_list>

#include "flowclass/graph/codec.hpp"

namespace flowclass::gateway {

using nlohmann::json;

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::out_of_bounds:
    case ErrorCode::invalid_edge:
    case ErrorCode::duplicate_edge:
    case ErrorCode::malformed_path:
    case ErrorCode::decode_error: return 400;
    case ErrorCode::unauthorized: return 401;
    case ErrorCode::access_denied: return 403;
    case ErrorCode::not_found: return 404;
    case ErrorCode::wrong_state:
    case ErrorCode::order_violation: return 409;
    case ErrorCode::unavailable: return 410;
    case ErrorCode::payload_too_large: return 413;
    case ErrorCode::invalid_reference: return 422;
    case ErrorCode::storage_failure: return 500;
  }
  return 500;
}

ApiResponse error_response(const Error& error) {
  json body = {{"code", to_string(error.code())}, {"message", error.what()}};
  if (!error.details().is_null()) body["details"] = error.details();
  return {http_status(error.code()), json{{"error", std::move(body)}}.dump()};
}

void route_events(game::GameService& service, EventHub& hub) {
  service.set_listener([&hub](const game::ServiceEvent& event) {
    for (const auto& token : event.session_tokens) {
      hub.publish(session_key(token), event.type, event.game_id, event.payload);
    }
    if (event.to_professor) hub.publish(kProfessorKey, event.type, event.game_id, event.payload);
  });
}

namespace {

ApiResponse ok(const json& body, int status = 200) { return {status, body.dump()}; }

json parse_body(const ApiRequest& request, std::initializer_list<std::string_view> allowed) {
  json doc = json::parse(request.body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::decode_error, "request body must be a JSON object", {{"location", ""}});
  }
  for (const auto& [key, _] : doc.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || key == a;
    if (!known) {
      throw Error(ErrorCode::decode_error, "unknown field '" + key + "'", {{"location", "/" + key}});
    }
  }
  return doc;
}

const json& field(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    throw Error(ErrorCode::decode_error, std::string("missing field '") + key + "'",
                {{"location", std::string("/") + key}});
  }
  return *it;
}

std::string string_field(const json& doc, const char* key) {
  const json& v = field(doc, key);
  if (!v.is_string()) {
    throw Error(ErrorCode::decode_error, std::string("field '") + key + "' must be a string",
                {{"location", std::string("/") + key}});
  }
  return v.get<std::string>();
}

int int_field(const json& doc, const char* key) {
  const json& v = field(doc, key);
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::decode_error, std::string("field '") + key + "' must be an integer",
                {{"location", std::string("/") + key}});
  }
  return v.get<int>();
}

/// Re-roots codec locations under the enclosing request field.
template <typename Fn>
auto nested(const char* key, Fn&& decode) {
  try {
    return decode();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::decode_error && e.code() != ErrorCode::malformed_path) throw;
    json details = e.details();
    const std::string inner = details.value("location", "");
    details["location"] = std::string("/") + key + inner;
    throw Error(e.code(), e.what(), details);
  }
}

std::vector<std::string> split(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos < path.size()) {
    std::size_t slash = path.find('/', pos);
    if (slash == std::string::npos) slash = path.size();
    if (slash > pos) parts.push_back(path.substr(pos, slash - pos));
    pos = slash + 1;
  }
  return parts;
}

bool constant_time_equal(std::string_view a, std::string_view b) {
  unsigned char diff = a.size() == b.size() ? 0 : 1;
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char x = i < a.size() ? static_cast<unsigned char>(a[i]) : 0;
    const unsigned char y = i < b.size() ? static_cast<unsigned char>(b[i]) : 0;
    diff |= static_cast<unsigned char>(x ^ y);
  }
  return diff == 0;
}

ApiResponse route_not_found(const ApiRequest& request) {
  return error_response(Error(ErrorCode::not_found, "no route " + request.method + " " + request.path,
                              {{"route", request.path}}));
}

}  // namespace

Api::Api(game::GameService& service, EventHub& hub, std::string professor_secret, Store* store)
    : service_(service), hub_(hub), professor_secret_(std::move(professor_secret)), store_(store) {}

bool Api::professor_authorized(const ApiRequest& request) const {
  std::string offered;
  if (auto it = request.headers.find("authorization"); it != request.headers.end()) {
    static constexpr std::string_view kBearer = "Bearer ";
    if (it->second.compare(0, kBearer.size(), kBearer) == 0) offered = it->second.substr(kBearer.size());
  } else if (auto q = request.query.find("secret"); q != request.query.end()) {
    offered = q->second;
  }
  return !professor_secret_.empty() && constant_time_equal(offered, professor_secret_);
}

std::string Api::session_token(const ApiRequest& request) const {
  std::string token;
  if (auto it = request.headers.find("x-session-token"); it != request.headers.end()) {
    token = it->second;
  } else if (auto q = request.query.find("token"); q != request.query.end()) {
    token = q->second;
  }
  if (token.empty()) throw Error(ErrorCode::unauthorized, "session token required");
  service_.session_state(token);  // throws unauthorized when unknown
  return token;
}

void Api::after_mutation() {
  if (store_) store_->maybe_snapshot(service_);
}

ApiResponse Api::handle(const ApiRequest& request) {
  try {
    return route(request);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const json::exception& e) {
    return error_response(Error(ErrorCode::decode_error, e.what(), {{"location", ""}}));
  } catch (const std::exception& e) {
    return {500, json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump()};
  }
}

ApiResponse Api::route(const ApiRequest& request) {
  static constexpr std::string_view kStudent = "/api/student/";
  static constexpr std::string_view kProfessor = "/api/professor/";
  if (request.path == "/api/health" && request.method == "GET") {
    return ok({{"status", "ok"}, {"epoch", hub_.epoch()}});
  }
  if (request.path.rfind(kStudent, 0) == 0) {
    return student_route(request, request.path.substr(kStudent.size()));
  }
  if (request.path.rfind(kProfessor, 0) == 0) {
    if (!professor_authorized(request)) {
      throw Error(ErrorCode::unauthorized, "professor credential required");
    }
    return professor_route(request, request.path.substr(kProfessor.size()));
  }
  return route_not_found(request);
}

ApiResponse Api::student_route(const ApiRequest& request, const std::string& rest) {
  const std::string& method = request.method;

  if (method == "POST" && rest == "games") {
    const json body = parse_body(request, {"code"});
    json games = json::array();
    for (const auto& listing : service_.list_games(string_field(body, "code"))) {
      games.push_back(game::encode_listing(listing));
    }
    return ok({{"games", std::move(games)}});
  }
  if (method == "POST" && rest == "join") {
    const json body = parse_body(request, {"code", "student_id", "game_number"});
    const auto joined = service_.join(string_field(body, "code"), string_field(body, "student_id"),
                                      int_field(body, "game_number"));
    if (!joined.resumed) after_mutation();
    return ok({{"session_token", joined.session_token},
               {"game_number", joined.game_number},
               {"session_phase", game::to_string(joined.session_phase)},
               {"resumed", joined.resumed}});
  }
  if (method == "POST" && rest == "diagram") {
    const std::string token = session_token(request);
    const json body = parse_body(request, {"diagram"});
    auto diagram = nested("diagram", [&] { return graph::decode_diagram(field(body, "diagram")); });
    const auto phase = service_.submit_diagram(token, std::move(diagram));
    after_mutation();
    return ok({{"accepted", true}, {"session_phase", game::to_string(phase)}});
  }
  if (method == "POST" && rest == "paths") {
    const std::string token = session_token(request);
    const json body = parse_body(request, {"paths"});
    auto paths = nested("paths", [&] { return graph::decode_paths(field(body, "paths")); });
    const auto phase = service_.submit_paths(token, std::move(paths));
    after_mutation();
    return ok({{"accepted", true},
               {"done", phase == game::SessionPhase::done},
               {"session_phase", game::to_string(phase)}});
  }
  if (method == "GET" && rest == "phase2") {
    const std::string token = session_token(request);
    const auto state = service_.session_state(token);
    return ok({{"game_number", state.game_number},
               {"reference_diagram", graph::encode_diagram(service_.phase2_payload(token))}});
  }
  if (method == "GET" && rest == "state") {
    const std::string token = session_token(request);
    json body = game::encode_session_state(service_.session_state(token));
    body["epoch"] = hub_.epoch();
    body["latest_event"] = hub_.latest_sequence(session_key(token));
    return ok(body);
  }
  return route_not_found(request);
}

ApiResponse Api::professor_route(const ApiRequest& request, const std::string& rest) {
  const std::string& method = request.method;
  const auto parts = split(rest);

  if (parts.size() == 1 && parts[0] == "games") {
    if (method == "POST") {
      const json body = parse_body(request, {"reference_diagram", "reference_paths", "code", "advance_mode"});
      auto diagram = nested("reference_diagram",
                            [&] { return graph::decode_diagram(field(body, "reference_diagram")); });
      auto paths = nested("reference_paths",
                          [&] { return graph::decode_paths(field(body, "reference_paths")); });
      const auto mode = game::parse_advance_mode(string_field(body, "advance_mode"));
      const auto ref = service_.create_game(std::move(diagram), std::move(paths), string_field(body, "code"), mode);
      after_mutation();
      return ok({{"game_id", ref.game_id},
                 {"game_number", ref.game_number},
                 {"reference_cc", ref.reference_cc},
                 {"phase", "created"}},
                201);
    }
    if (method == "GET") {
      json games = json::array();
      for (const auto& g : service_.games()) games.push_back(game::encode_game_summary(g));
      return ok({{"games", std::move(games)}});
    }
  }
  if (parts.size() == 3 && parts[0] == "games" && method == "POST") {
    game::GamePhase phase;
    if (parts[2] == "open") {
      phase = service_.open_game(parts[1]);
    } else if (parts[2] == "advance") {
      phase = service_.advance_game(parts[1]);
    } else if (parts[2] == "close") {
      phase = service_.close_game(parts[1]);
    } else {
      return route_not_found(request);
    }
    after_mutation();
    return ok({{"game_id", parts[1]}, {"phase", game::to_string(phase)}});
  }
  if (parts.size() == 3 && parts[0] == "games" && parts[2] == "monitor" && method == "GET") {
    return ok(game::encode_monitor(service_.monitor(parts[1])));
  }
  if (parts.size() == 1 && parts[0] == "answers" && method == "GET") {
    std::optional<std::string_view> filter;
    if (auto q = request.query.find("game_id"); q != request.query.end()) filter = q->second;
    json answers = json::array();
    for (const auto& a : service_.list_answers(filter)) answers.push_back(game::encode_answer_summary(a));
    return ok({{"answers", std::move(answers)}});
  }
  if (parts.size() == 2 && parts[0] == "answers") {
    if (method == "GET") return ok(game::encode_answer(service_.get_answer(parts[1])));
    if (method == "DELETE") {
      service_.delete_answer(parts[1]);
      after_mutation();
      return ok({{"deleted", parts[1]}});
    }
  }
  if (parts.size() == 1 && parts[0] == "poll" && method == "GET") {
    json monitors = json::array();
    for (const auto& g : service_.games()) {
      if (auto q = request.query.find("game_id"); q != request.query.end() && q->second != g.game_id) continue;
      monitors.push_back(game::encode_monitor(service_.monitor(g.game_id), false));
    }
    return ok({{"epoch", hub_.epoch()},
               {"latest_event", hub_.latest_sequence(kProfessorKey)},
               {"monitors", std::move(monitors)}});
  }
  if (parts.size() == 1 && parts[0] == "code" && method == "GET") {
    return ok({{"code", game::generate_code()}});
  }
  return route_not_found(request);
}

}  // namespace flowclass::gateway
