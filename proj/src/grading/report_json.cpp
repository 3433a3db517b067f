#include "flowclass/graph/codec.hpp"
#include "flowclass/grading/analysis.hpp"

namespace flowclass::grading {

using nlohmann::json;

std::string_view to_string(StructureMatch v) noexcept {
  switch (v) {
    case StructureMatch::label_exact_match: return "label_exact_match";
    case StructureMatch::isomorphic_match: return "isomorphic_match";
    case StructureMatch::mismatch: return "mismatch";
    case StructureMatch::reference_absent: return "reference_absent";
  }
  return "mismatch";
}

std::string_view to_string(PathCountCheck v) noexcept {
  switch (v) {
    case PathCountCheck::equals_cc: return "equals_cc";
    case PathCountCheck::below_cc: return "below_cc";
    case PathCountCheck::exceeds_cc: return "exceeds_cc";
  }
  return "equals_cc";
}

std::string_view to_string(DiagramVerdict v) noexcept {
  switch (v) {
    case DiagramVerdict::correct: return "correct";
    case DiagramVerdict::suspect: return "suspect";
    case DiagramVerdict::incorrect: return "incorrect";
  }
  return "incorrect";
}

std::string_view to_string(PathsVerdict v) noexcept {
  return v == PathsVerdict::correct ? "correct" : "incorrect";
}

std::string_view to_string(Isomorphism v) noexcept {
  switch (v) {
    case Isomorphism::isomorphic: return "isomorphic";
    case Isomorphism::not_isomorphic: return "not_isomorphic";
    case Isomorphism::skipped_too_large: return "skipped_too_large";
  }
  return "not_isomorphic";
}

json encode_equivalence(const Equivalence& eq) {
  json out = {{"label_exact", eq.label_exact}, {"isomorphism", to_string(eq.isomorphism)}};
  if (eq.isomorphism == Isomorphism::skipped_too_large) {
    out["isomorphic"] = nullptr;
  } else {
    out["isomorphic"] = eq.isomorphic();
  }
  return out;
}

json encode_report(const AnalysisReport& report) {
  json paths = json::array();
  for (const PathReport& pr : report.path_reports) {
    json p = {{"path", graph::encode_path(pr.path)},
              {"verdict", pr.verdict.valid ? "valid" : "invalid"},
              {"introduces_new_edge", pr.introduces_new_edge}};
    if (!pr.verdict.valid) {
      p["failure"] = graph::to_string(pr.verdict.failure);
      p["failure_position"] = *pr.verdict.failure_position;
      p["missing_pair"] = {pr.verdict.missing_pair->first, pr.verdict.missing_pair->second};
    }
    paths.push_back(std::move(p));
  }
  return {{"metrics", graph::encode_metrics(report.metrics)},
          {"cc_consistent", report.cc_consistent},
          {"structure", to_string(report.structure)},
          {"isomorphism_skipped", report.isomorphism_skipped},
          {"paths_checked_on", report.paths_checked_on_reference ? "reference" : "submitted"},
          {"independence_rule", "each path adds an edge unused by the paths listed before it"},
          {"path_reports", std::move(paths)},
          {"path_count", report.path_reports.size()},
          {"reference_cc", report.reference_cc},
          {"path_count_check", to_string(report.path_count_check)},
          {"overall_diagram", to_string(report.overall_diagram)},
          {"overall_paths", to_string(report.overall_paths)}};
}

}  // namespace flowclass::grading
