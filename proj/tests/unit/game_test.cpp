#include <doctest.h>

#include "flowclass/game/service.hpp"
#include "flowclass/graph/codec.hpp"
#include "support/lifecycle.hpp"
#include "support/support.hpp"

using namespace flowclass;
using namespace flowclass::game;
using graph::NodePath;
using nlohmann::json;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::invalid_argument;
}

struct Fixture {
  GameService service{{}, testing::stepping_clock(), testing::counting_tokens()};
  std::vector<ServiceEvent> events;

  Fixture() {
    service.set_listener([this](const ServiceEvent& e) { events.push_back(e); });
  }

  std::string create(AdvanceMode mode = AdvanceMode::professor_triggered, std::string code = "QX7R2M") {
    return service.create_game(testing::worked_reference(), testing::worked_basis(), std::move(code), mode).game_id;
  }
  std::string open(AdvanceMode mode = AdvanceMode::professor_triggered, std::string code = "QX7R2M") {
    const auto id = create(mode, code);
    service.open_game(id);
    return id;
  }
  int number(const std::string& id) {
    for (const auto& g : service.games()) {
      if (g.game_id == id) return g.game_number;
    }
    return 0;
  }
  std::string join(const std::string& id, const std::string& student, const std::string& code = "QX7R2M") {
    return service.join(code, student, number(id)).session_token;
  }
};

}  // namespace

TEST_CASE("create_game") {
  Fixture f;
  const auto ref = f.service.create_game(testing::worked_reference(), testing::worked_basis(), "QX7R2M",
                                         AdvanceMode::professor_triggered);
  CHECK(ref.reference_cc == 3);
  CHECK(ref.game_number == 1);
  CHECK(f.service.games().at(0).phase == GamePhase::created);
  CHECK(f.create() == "g2");
  CHECK(f.number("g2") == 2);

  auto too_many = testing::worked_basis();
  too_many.push_back(NodePath{1, 2, 3, 4, 6, 8, 2, 3, 5, 6, 8, 2, 7});
  CHECK(code_of([&] {
          f.service.create_game(testing::worked_reference(), too_many, "QX7R2M", AdvanceMode::individual);
        }) == ErrorCode::invalid_reference);

  CHECK(code_of([&] {
          f.service.create_game(testing::diagram_from_edges(1, {}), {}, "QX7R2M", AdvanceMode::individual);
        }) == ErrorCode::invalid_reference);

  auto wrong = testing::worked_basis();
  wrong[1] = NodePath{1, 2, 8};
  try {
    f.service.create_game(testing::worked_reference(), wrong, "QX7R2M", AdvanceMode::individual);
    FAIL("accepted an invalid reference path");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_reference);
    CHECK(e.details()["path"] == "1-2-8");
    CHECK(e.details()["missing_pair"] == json::array({2, 8}));
    CHECK(e.details()["location"] == "/reference_paths/1");
  }

  CHECK(code_of([&] {
          f.service.create_game(testing::diagram_from_edges(4, {{1, 2}, {3, 4}}), {NodePath{1, 2}, NodePath{3, 4}},
                                "QX7R2M", AdvanceMode::individual);
        }) == ErrorCode::invalid_reference);
  CHECK(code_of([&] { f.create(AdvanceMode::individual, "ABC"); }) == ErrorCode::invalid_argument);
  CHECK(code_of([&] { f.create(AdvanceMode::individual, "ABCDEFGHIJKLM"); }) == ErrorCode::invalid_argument);
  CHECK(code_of([&] { f.create(AdvanceMode::individual, "AB CD"); }) == ErrorCode::invalid_argument);
  CHECK(f.service.games().size() == 2);
}

TEST_CASE("generate_code") {
  for (int i = 0; i < 50; ++i) {
    const auto code = generate_code();
    CHECK(code.size() == 6);
    CHECK(std::all_of(code.begin(), code.end(), [](char c) { return std::isupper(c) || std::isdigit(c); }));
  }
}

TEST_CASE("open, advance and close follow the phase order") {
  Fixture f;
  const auto id = f.create();
  CHECK(code_of([&] { f.service.advance_game(id); }) == ErrorCode::wrong_state);
  CHECK(f.service.open_game(id) == GamePhase::phase1_open);
  CHECK(code_of([&] { f.service.open_game(id); }) == ErrorCode::wrong_state);
  CHECK(code_of([&] { f.service.close_game(id); }) == ErrorCode::wrong_state);
  CHECK(f.service.advance_game(id) == GamePhase::phase2_open);
  CHECK(code_of([&] { f.service.advance_game(id); }) == ErrorCode::wrong_state);
  CHECK(code_of([&] { f.service.open_game(id); }) == ErrorCode::wrong_state);
  CHECK(f.service.close_game(id) == GamePhase::closed);
  CHECK(code_of([&] { f.service.close_game(id); }) == ErrorCode::wrong_state);
  CHECK(code_of([&] { f.service.open_game("g404"); }) == ErrorCode::not_found);
  CHECK(code_of([&] { f.service.monitor("g404"); }) == ErrorCode::not_found);
}

TEST_CASE("list_games is gated by the code") {
  Fixture f;
  const auto a = f.open();
  const auto b = f.open(AdvanceMode::individual);
  f.create();  // never opened
  f.open(AdvanceMode::individual, "OTHER1");

  auto listed = f.service.list_games("QX7R2M");
  REQUIRE(listed.size() == 2);
  CHECK(listed[0].game_number == f.number(a));
  CHECK(listed[1].game_number == f.number(b));
  CHECK(f.service.list_games("qx7r2m").size() == 2);
  CHECK(f.service.list_games("WRONG1").empty());

  f.service.advance_game(a);
  f.service.close_game(a);
  f.service.advance_game(b);
  f.service.close_game(b);
  CHECK(f.service.list_games("QX7R2M").empty());
}

TEST_CASE("case-sensitive codes when configured") {
  GameService service(ServiceOptions{false}, testing::stepping_clock(), testing::counting_tokens());
  const auto id = service.create_game(testing::worked_reference(), testing::worked_basis(), "QX7R2M",
                                      AdvanceMode::individual).game_id;
  service.open_game(id);
  CHECK(service.list_games("qx7r2m").empty());
  CHECK(code_of([&] { service.join("qx7r2m", "236138", 1); }) == ErrorCode::access_denied);
  CHECK(service.list_games("QX7R2M").size() == 1);
}

TEST_CASE("join") {
  Fixture f;
  const auto id = f.open();
  const auto first = f.service.join("QX7R2M", "236138", 1);
  CHECK_FALSE(first.resumed);
  CHECK(first.session_phase == SessionPhase::phase1);
  CHECK(f.service.monitor(id).players_count == 1);

  const auto again = f.service.join("qx7r2m", "236138", 1);
  CHECK(again.resumed);
  CHECK(again.session_token == first.session_token);
  CHECK(f.service.monitor(id).players_count == 1);

  CHECK(code_of([&] { f.service.join("WRONG1", "236139", 1); }) == ErrorCode::access_denied);
  CHECK(code_of([&] { f.service.join("QX7R2M", "236139", 7); }) == ErrorCode::access_denied);
  CHECK(code_of([&] { f.service.join("QX7R2M", "", 1); }) == ErrorCode::invalid_argument);
  CHECK(code_of([&] { f.service.join("QX7R2M", "2361 38", 1); }) == ErrorCode::invalid_argument);

  const auto created = f.create();
  CHECK(code_of([&] { f.service.join("QX7R2M", "236139", f.number(created)); }) == ErrorCode::unavailable);
  f.service.advance_game(id);
  f.service.close_game(id);
  CHECK(code_of([&] { f.service.join("QX7R2M", "236139", 1); }) == ErrorCode::unavailable);
}

TEST_CASE("late joiners start in phase 2 once the professor has advanced") {
  Fixture f;
  const auto id = f.open();
  f.service.advance_game(id);
  const auto late = f.service.join("QX7R2M", "236150", 1);
  CHECK(late.session_phase == SessionPhase::phase2);
  CHECK(code_of([&] { f.service.submit_diagram(late.session_token, testing::worked_reference()); }) ==
        ErrorCode::order_violation);
  CHECK(f.service.submit_paths(late.session_token, testing::worked_basis()) == SessionPhase::done);
  CHECK(f.service.list_answers().at(0).diagram_missing);
}

TEST_CASE("submit_diagram") {
  Fixture f;
  SUBCASE("individual mode moves straight to phase 2") {
    const auto id = f.open(AdvanceMode::individual);
    const auto token = f.join(id, "236138");
    CHECK(f.service.submit_diagram(token, testing::worked_reference()) == SessionPhase::phase2);
    CHECK(f.service.phase2_payload(token) == testing::worked_reference());
  }
  SUBCASE("professor-triggered mode waits") {
    const auto id = f.open();
    const auto token = f.join(id, "236138");
    CHECK(f.service.submit_diagram(token, testing::worked_reference()) == SessionPhase::waiting);
    CHECK(code_of([&] { f.service.phase2_payload(token); }) == ErrorCode::order_violation);
    CHECK(code_of([&] { f.service.submit_paths(token, testing::worked_basis()); }) == ErrorCode::order_violation);
    f.service.advance_game(id);
    CHECK(f.service.session_state(token).session_phase == SessionPhase::phase2);
  }
  SUBCASE("diagrams after the advance are refused") {
    const auto id = f.open();
    const auto token = f.join(id, "236138");
    f.service.advance_game(id);
    CHECK(code_of([&] { f.service.submit_diagram(token, testing::worked_reference()); }) ==
          ErrorCode::order_violation);
  }
  SUBCASE("resubmission keeps history and flags the answer") {
    const auto id = f.open();
    const auto token = f.join(id, "236138");
    const Diagram draft = testing::diagram_from_edges(2, {{1, 2}});
    f.service.submit_diagram(token, draft);
    f.service.submit_diagram(token, testing::worked_reference());
    const auto answers = f.service.list_answers();
    REQUIRE(answers.size() == 1);
    CHECK(answers[0].resubmitted);
    REQUIRE(answers[0].history.size() == 1);
    CHECK(answers[0].history[0].diagram == draft);
    CHECK(*answers[0].diagram == testing::worked_reference());
    CHECK(f.service.monitor(id).diagrams_submitted == 1);
  }
  SUBCASE("unknown token") {
    CHECK(code_of([&] { f.service.submit_diagram("nope", Diagram{}); }) == ErrorCode::unauthorized);
  }
}

TEST_CASE("advance moves every session, including those without a diagram") {
  Fixture f;
  const auto id = f.open();
  const auto drew = f.join(id, "236138");
  const auto idle = f.join(id, "236139");
  f.service.submit_diagram(drew, testing::worked_reference());
  f.service.advance_game(id);
  CHECK(f.service.session_state(drew).session_phase == SessionPhase::phase2);
  CHECK(f.service.session_state(idle).session_phase == SessionPhase::phase2);

  f.service.submit_paths(idle, testing::worked_basis());
  const auto answers = f.service.list_answers();
  REQUIRE(answers.size() == 2);
  CHECK_FALSE(answers[0].diagram_missing);
  CHECK(answers[1].diagram_missing);
  CHECK(answers[1].analysis->overall_diagram == grading::DiagramVerdict::incorrect);
  CHECK(answers[1].analysis->overall_paths == grading::PathsVerdict::correct);
}

TEST_CASE("submit_paths attaches the analysis") {
  Fixture f;
  const auto id = f.open(AdvanceMode::individual);
  const auto good = f.join(id, "236137");
  const auto worked = f.join(id, "236138");
  const json answer_doc = testing::worked_answer();
  f.service.submit_diagram(good, testing::worked_reference());
  f.service.submit_diagram(worked, graph::decode_diagram(answer_doc["diagram"]));

  CHECK(f.service.submit_paths(good, testing::worked_basis()) == SessionPhase::done);
  CHECK(f.service.submit_paths(worked, graph::decode_paths(answer_doc["paths"])) == SessionPhase::done);
  CHECK(code_of([&] { f.service.submit_paths(good, testing::worked_basis()); }) == ErrorCode::order_violation);

  const auto answers = f.service.list_answers(id);
  REQUIRE(answers.size() == 2);
  CHECK(answers[0].analysis->overall_paths == grading::PathsVerdict::correct);
  const auto& report = *answers[1].analysis;
  CHECK(report.path_count_check == grading::PathCountCheck::exceeds_cc);
  CHECK(report.overall_paths == grading::PathsVerdict::incorrect);
  CHECK(encode_answer(answers[1])["analysis"] ==
        testing::read_json(testing::fixture("worked_example/expected_report.json")));

  const auto fetched = f.service.get_answer(answers[1].answer_id);
  CHECK(fetched.student_id == "236138");
  CHECK(code_of([&] { f.service.get_answer("a99"); }) == ErrorCode::not_found);
}

TEST_CASE("monitor") {
  Fixture f;
  const auto id = f.open();
  auto empty = f.service.monitor(id);
  CHECK(empty.players_count == 0);
  CHECK(empty.diagrams_submitted == 0);
  CHECK(empty.paths_submitted == 0);
  CHECK(empty.previews.empty());

  std::vector<std::string> tokens;
  for (int i = 0; i < 5; ++i) tokens.push_back(f.join(id, "2361" + std::to_string(40 + i)));
  for (int i = 0; i < 3; ++i) f.service.submit_diagram(tokens[i], testing::worked_reference());
  const auto snap = f.service.monitor(id);
  CHECK(snap.players_count == 5);
  CHECK(snap.diagrams_submitted == 3);
  CHECK(snap.paths_submitted == 0);
  REQUIRE(snap.previews.size() == 3);
  CHECK(snap.previews[0].student_id == "236140");

  const json wire = encode_monitor(snap, false);
  CHECK(wire["players_count"] == 5);
  CHECK_FALSE(wire.contains("previews"));
  CHECK(encode_monitor(snap, true)["previews"].size() == 3);
}

TEST_CASE("answers list and delete") {
  Fixture f;
  const auto id = f.open(AdvanceMode::individual);
  const auto token = f.join(id, "236138");
  f.service.submit_diagram(token, testing::worked_reference());
  f.service.submit_paths(token, testing::worked_basis());

  const auto answers = f.service.list_answers();
  REQUIRE(answers.size() == 1);
  const json summary = encode_answer_summary(answers[0]);
  CHECK(summary["student_id"] == "236138");
  CHECK(summary["game_number"] == 1);
  CHECK(summary["played_at"] == "2026-03-02T09:00:03.000Z");
  CHECK(summary["submitted_at_paths"] == "2026-03-02T09:00:04.000Z");
  CHECK(summary["complete"] == true);

  f.service.delete_answer(answers[0].answer_id);
  CHECK(f.service.list_answers().empty());
  CHECK(code_of([&] { f.service.delete_answer(answers[0].answer_id); }) == ErrorCode::not_found);
  CHECK(f.service.monitor(id).paths_submitted == 1);
}

TEST_CASE("close_game ends play") {
  Fixture f;
  const auto id = f.open(AdvanceMode::individual);
  const auto token = f.join(id, "236138");
  f.service.advance_game(id);
  f.service.close_game(id);
  CHECK(code_of([&] { f.service.submit_diagram(token, testing::worked_reference()); }) == ErrorCode::unavailable);
  CHECK(code_of([&] { f.service.submit_paths(token, testing::worked_basis()); }) == ErrorCode::unavailable);
  CHECK(f.service.list_games("QX7R2M").empty());
  CHECK(f.service.session_state(token).game_phase == GamePhase::closed);
}

TEST_CASE("events") {
  Fixture f;
  const auto id = f.open();
  const auto a = f.join(id, "236138");
  const auto b = f.join(id, "236139");
  f.service.submit_diagram(a, testing::worked_reference());
  f.events.clear();

  f.service.advance_game(id);
  REQUIRE(f.events.size() == 2);
  const auto& advanced = f.events[0];
  CHECK(advanced.type == EventType::phase_advanced);
  CHECK(advanced.session_tokens == std::vector<std::string>{a, b});
  CHECK(advanced.payload["reference_diagram"] == graph::encode_diagram(testing::worked_reference()));
  CHECK(advanced.to_professor);
  CHECK(f.events[1].type == EventType::monitor_update);

  f.events.clear();
  f.service.submit_paths(b, testing::worked_basis());
  REQUIRE(f.events.size() == 1);
  CHECK(f.events[0].type == EventType::monitor_update);
  CHECK(f.events[0].payload["paths_submitted"] == 1);
  CHECK(f.events[0].session_tokens.empty());

  f.events.clear();
  f.service.close_game(id);
  CHECK(f.events.at(0).type == EventType::game_closed);
  CHECK(f.events.at(0).session_tokens.size() == 2);

  // Rejected operations emit nothing.
  f.events.clear();
  CHECK_THROWS(f.service.close_game(id));
  CHECK(f.events.empty());
}

TEST_CASE("a failing journal leaves the state untouched") {
  Fixture f;
  const auto id = f.open();
  f.service.set_journal([](const json&) { throw Error(ErrorCode::storage_failure, "disk full"); });
  const json before = f.service.snapshot();
  CHECK(code_of([&] { f.service.join("QX7R2M", "236138", 1); }) == ErrorCode::storage_failure);
  CHECK(code_of([&] { f.service.advance_game(id); }) == ErrorCode::storage_failure);
  CHECK(f.service.snapshot() == before);
}

TEST_CASE("snapshot and replay reproduce the state") {
  std::vector<json> journal;
  Fixture f;
  f.service.set_journal([&](const json& m) { journal.push_back(m); });
  const auto id = f.open(AdvanceMode::individual);
  const auto token = f.join(id, "236138");
  f.service.submit_diagram(token, testing::worked_reference());
  f.service.submit_paths(token, testing::worked_basis());

  GameService from_log;
  for (const auto& m : journal) from_log.apply(m);
  CHECK(from_log.snapshot() == f.service.snapshot());

  GameService from_snapshot;
  from_snapshot.load_snapshot(f.service.snapshot());
  CHECK(from_snapshot.snapshot() == f.service.snapshot());
  CHECK(from_snapshot.list_answers().at(0).analysis == f.service.list_answers().at(0).analysis);
  CHECK(from_snapshot.last_sequence() == journal.size());

  json gap = journal.back();
  gap["seq"] = 99;
  CHECK(code_of([&] { from_log.apply(gap); }) == ErrorCode::storage_failure);
}

TEST_CASE("lifecycle fuzz against the reference model") {
  const auto stats = testing::run_lifecycle_fuzz(1, 1000, 40);
  for (const auto& v : stats.violations) MESSAGE(v);
  CHECK(stats.violations.empty());
  CHECK(stats.accepted > 1000);
  CHECK(stats.rejected > 1000);
}
