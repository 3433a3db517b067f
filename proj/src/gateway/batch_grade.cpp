#include "flowclass/gateway/batch_grade.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <vector>

#include "flowclass/error.hpp"
#include "flowclass/grading/analysis.hpp"
#include "flowclass/graph/codec.hpp"

namespace flowclass::gateway {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::not_found, "cannot read " + file.string(), {{"file", file.string()}});
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

json error_json(const Error& e) {
  json out = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
  if (!e.details().is_null()) out["details"] = e.details();
  return out;
}

}  // namespace

json batch_grade(const fs::path& answers_dir, const fs::path& reference_file) {
  const graph::Diagram reference = graph::decode_diagram_text(slurp(reference_file));
  const auto m = graph::metrics(reference);
  if (!m.cc_structural || *m.cc_structural < 1 || !m.connected) {
    throw Error(ErrorCode::invalid_reference, "reference diagram must be connected with CC >= 1",
                {{"file", reference_file.string()}});
  }
  if (!fs::is_directory(answers_dir)) {
    throw Error(ErrorCode::not_found, answers_dir.string() + " is not a directory",
                {{"dir", answers_dir.string()}});
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(answers_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  json reports = json::array(), failures = json::array();
  for (const auto& file : files) {
    const std::string name = file.filename().string();
    try {
      const json doc = json::parse(slurp(file), nullptr, false);
      if (doc.is_discarded() || !doc.is_object()) {
        throw Error(ErrorCode::decode_error, "answer file is not a JSON object", {{"location", ""}});
      }
      if (!doc.contains("paths")) throw Error(ErrorCode::decode_error, "missing paths", {{"location", "/paths"}});
      const auto paths = graph::decode_paths(doc.at("paths"), "/paths");
      const json diagram_doc = doc.value("diagram", json());
      graph::Diagram submitted(reference.extent());
      if (!diagram_doc.is_null()) {
        try {
          submitted = graph::decode_diagram(diagram_doc);
        } catch (const Error& e) {
          json details = e.details();
          if (details.is_object() && details.contains("location")) {
            details["location"] = "/diagram" + details["location"].get<std::string>();
          }
          throw Error(e.code(), e.what(), details);
        }
      }
      const auto report = grading::analyze_answer(submitted, paths, reference, *m.cc_structural);
      json entry = {{"file", name}, {"report", grading::encode_report(report)}};
      entry["student_id"] = doc.contains("student_id") ? doc["student_id"] : json();
      entry["diagram_missing"] = diagram_doc.is_null();
      reports.push_back(std::move(entry));
    } catch (const Error& e) {
      failures.push_back({{"file", name}, {"error", error_json(e)}});
    }
  }
  return {{"reference_cc", *m.cc_structural}, {"reports", reports}, {"failures", failures}};
}

}  // namespace flowclass::gateway
