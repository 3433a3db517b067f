#include <set>

#include "flowclass/grading/analysis.hpp"

namespace flowclass::grading {

std::vector<bool> independence_flags(std::span<const NodePath> paths, const Diagram& diagram) {
  std::vector<bool> flags;
  flags.reserve(paths.size());
  std::set<std::pair<int, int>> covered;
  const graph::PathChecker checker(diagram);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (!checker.check(paths[i]).valid) {
      throw Error(ErrorCode::invalid_argument,
                  "path " + paths[i].to_string() + " is not valid; validate before checking independence",
                  {{"index", i}});
    }
    bool fresh = false;
    for (const auto& hop : graph::path_hops(paths[i])) fresh = covered.insert(hop).second || fresh;
    flags.push_back(fresh);
  }
  return flags;
}

AnalysisReport analyze_answer(const Diagram& submitted, std::span<const NodePath> paths,
                              const std::optional<Diagram>& reference, long reference_cc) {
  if (reference_cc < 1) {
    throw Error(ErrorCode::invalid_argument, "reference CC must be at least 1",
                {{"reference_cc", reference_cc}});
  }
  AnalysisReport report;
  report.metrics = graph::metrics(submitted);
  report.reference_cc = reference_cc;
  report.cc_consistent = report.metrics.cc_structural &&
                         *report.metrics.cc_structural == static_cast<long>(report.metrics.cc_declared);

  if (reference) {
    const Equivalence eq = graphs_equivalent(submitted, *reference);
    report.isomorphism_skipped = eq.isomorphism == Isomorphism::skipped_too_large;
    report.structure = eq.label_exact   ? StructureMatch::label_exact_match
                       : eq.isomorphic() ? StructureMatch::isomorphic_match
                                         : StructureMatch::mismatch;
  }

  const Diagram& target = reference ? *reference : submitted;
  report.paths_checked_on_reference = reference.has_value();

  // Independence is judged over the valid paths only, in listed order.
  const graph::PathChecker checker(target);
  std::set<std::pair<int, int>> covered;
  bool all_valid = true;
  bool all_new = true;
  for (const NodePath& path : paths) {
    PathReport pr{path, checker.check(path), false};
    if (pr.verdict.valid) {
      for (const auto& hop : graph::path_hops(path)) {
        pr.introduces_new_edge = covered.insert(hop).second || pr.introduces_new_edge;
      }
    }
    all_valid = all_valid && pr.verdict.valid;
    all_new = all_new && pr.introduces_new_edge;
    report.path_reports.push_back(std::move(pr));
  }

  const auto count = static_cast<long>(paths.size());
  report.path_count_check = count == reference_cc  ? PathCountCheck::equals_cc
                            : count < reference_cc ? PathCountCheck::below_cc
                                                   : PathCountCheck::exceeds_cc;
  report.overall_paths = all_valid && all_new && report.path_count_check == PathCountCheck::equals_cc
                             ? PathsVerdict::correct
                             : PathsVerdict::incorrect;

  const bool metrics_fine = report.cc_consistent && report.metrics.connected &&
                            *report.metrics.cc_structural == reference_cc;
  if (!metrics_fine) {
    report.overall_diagram = DiagramVerdict::incorrect;
  } else if (report.structure == StructureMatch::mismatch) {
    report.overall_diagram = DiagramVerdict::suspect;
  } else {
    report.overall_diagram = DiagramVerdict::correct;
  }
  return report;
}

}  // namespace flowclass::grading
