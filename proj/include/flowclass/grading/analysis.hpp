#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "flowclass/graph/diagram.hpp"

namespace flowclass::grading {

using graph::Diagram;
using graph::GraphMetrics;
using graph::NodePath;

/// Brute-force isomorphism is attempted up to this many process nodes.
inline constexpr std::size_t kMaxIsomorphismNodes = 12;

enum class Isomorphism { isomorphic, not_isomorphic, skipped_too_large };

struct Equivalence {
  bool label_exact = false;
  Isomorphism isomorphism = Isomorphism::not_isomorphic;

  bool isomorphic() const noexcept { return isomorphism == Isomorphism::isomorphic; }
};

/// Compares the directed edge structure over process numbers; star nodes are
/// ignored. label_exact requires equal process counts and identical edge sets.
Equivalence graphs_equivalent(const Diagram& a, const Diagram& b);

/// Flag i is true iff path i walks at least one directed edge that none of
/// paths 0..i-1 walked. Every path must already be edge-valid on `diagram`;
/// an invalid path raises Error(invalid_argument).
std::vector<bool> independence_flags(std::span<const NodePath> paths, const Diagram& diagram);

enum class StructureMatch { label_exact_match, isomorphic_match, mismatch, reference_absent };
enum class PathCountCheck { equals_cc, below_cc, exceeds_cc };
enum class DiagramVerdict { correct, suspect, incorrect };
enum class PathsVerdict { correct, incorrect };

struct PathReport {
  NodePath path;
  graph::PathVerdict verdict;
  bool introduces_new_edge = false;
  friend bool operator==(const PathReport&, const PathReport&) = default;
};

struct AnalysisReport {
  GraphMetrics metrics;
  bool cc_consistent = false;
  StructureMatch structure = StructureMatch::reference_absent;
  bool isomorphism_skipped = false;
  bool paths_checked_on_reference = false;
  std::vector<PathReport> path_reports;
  long reference_cc = 0;
  PathCountCheck path_count_check = PathCountCheck::equals_cc;
  DiagramVerdict overall_diagram = DiagramVerdict::incorrect;
  PathsVerdict overall_paths = PathsVerdict::incorrect;
  friend bool operator==(const AnalysisReport&, const AnalysisReport&) = default;
};

/// Grades one answer.
///
/// Paths are checked against the reference diagram when one is supplied
/// (phase 2 is played on the revealed reference), otherwise against the
/// submitted diagram. The diagram is
///   - correct when its structural and declared CC agree, it is connected,
///     its CC equals reference_cc and (if a reference exists) it matches
///     the reference up to renumbering,
///   - suspect when only the structural comparison fails,
///   - incorrect otherwise.
/// The paths are correct only when every path is valid, each adds a new
/// edge in listed order and their count equals reference_cc.
AnalysisReport analyze_answer(const Diagram& submitted, std::span<const NodePath> paths,
                              const std::optional<Diagram>& reference, long reference_cc);

nlohmann::json encode_report(const AnalysisReport& report);
nlohmann::json encode_equivalence(const Equivalence& eq);

std::string_view to_string(StructureMatch v) noexcept;
std::string_view to_string(PathCountCheck v) noexcept;
std::string_view to_string(DiagramVerdict v) noexcept;
std::string_view to_string(PathsVerdict v) noexcept;
std::string_view to_string(Isomorphism v) noexcept;

}  // namespace flowclass::grading
