#include <doctest.h>

#include <fstream>

#include "flowclass/gateway/batch_grade.hpp"
#include "support/support.hpp"

using namespace flowclass;
using namespace flowclass::gateway;
using nlohmann::json;
namespace fs = std::filesystem;

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

const fs::path kReference = testing::fixture("worked_example/reference.json");

}  // namespace

TEST_CASE("worked example directory") {
  const json out = batch_grade(testing::fixture("worked_example/answers"), kReference);
  CHECK(out["reference_cc"] == 3);
  CHECK(out["failures"].empty());
  REQUIRE(out["reports"].size() == 1);
  const json& entry = out["reports"][0];
  CHECK(entry["file"] == "236138.json");
  CHECK(entry["student_id"] == "236138");
  CHECK(entry["diagram_missing"] == false);
  CHECK(entry["report"] == testing::read_json(testing::fixture("worked_example/expected_report.json")));
}

TEST_CASE("mixed directory: reports, failures and skipped files") {
  const json out = batch_grade(testing::fixture("mixed_answers"), kReference);
  REQUIRE(out["reports"].size() == 2);
  CHECK(out["reports"][0]["file"] == "236138.json");
  CHECK(out["reports"][1]["file"] == "236141.json");

  const json& no_diagram = out["reports"][1];
  CHECK(no_diagram["diagram_missing"] == true);
  CHECK(no_diagram["report"]["overall_diagram"] == "incorrect");
  CHECK(no_diagram["report"]["overall_paths"] == "correct");

  REQUIRE(out["failures"].size() == 2);
  CHECK(out["failures"][0]["file"] == "236140.json");
  CHECK(out["failures"][0]["error"]["code"] == "decode_error");
  CHECK(out["failures"][1]["file"] == "236142.json");
  CHECK(out["failures"][1]["error"]["code"] == "malformed_path");
  CHECK(out["failures"][1]["error"]["details"]["location"] == "/paths/0");
}

TEST_CASE("output is deterministic") {
  CHECK(batch_grade(testing::fixture("mixed_answers"), kReference).dump() ==
        batch_grade(testing::fixture("mixed_answers"), kReference).dump());
}

TEST_CASE("empty and missing directories") {
  testing::TempDir dir;
  const json out = batch_grade(dir.path(), kReference);
  CHECK(out["reports"].empty());
  CHECK(out["failures"].empty());
  CHECK(code_of([&] { batch_grade(dir.path() / "absent", kReference); }) == ErrorCode::not_found);
}

TEST_CASE("unusable references") {
  testing::TempDir dir;
  CHECK(code_of([&] { batch_grade(dir.path(), dir.path() / "none.json"); }) == ErrorCode::not_found);

  const fs::path single = dir.path() / "single.json";
  std::ofstream(single) << R"({"canvas":{"w":4,"h":4},"nodes":[],"edges":[]})";
  CHECK(code_of([&] { batch_grade(dir.path(), single); }) == ErrorCode::invalid_reference);

  const fs::path broken = dir.path() / "broken.json";
  std::ofstream(broken) << "{";
  CHECK(code_of([&] { batch_grade(dir.path(), broken); }) == ErrorCode::decode_error);
}

TEST_CASE("a bad diagram is located under /diagram") {
  testing::TempDir dir;
  json answer = testing::worked_answer();
  answer["diagram"]["edges"][0]["to"] = "nowhere";
  std::ofstream(dir.path() / "a.json") << answer.dump();
  const json out = batch_grade(dir.path(), kReference);
  REQUIRE(out["failures"].size() == 1);
  CHECK(out["failures"][0]["error"]["details"]["location"].get<std::string>().starts_with("/diagram"));
}
