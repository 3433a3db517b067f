#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flowclass/graph/diagram.hpp"

namespace flowclass::graph {

// Canonical diagram document:
//   {"canvas":{"w":int,"h":int},
//    "nodes":[{"id":str,"kind":"process"|"star","number":int?,"x":int,"y":int}],
//    "edges":[{"id":str,"from":str,"to":str,"shape":"straight"|"curved","cp":[[x,y],[x,y]]?}]}
// Unknown fields are rejected. Decode failures throw Error(decode_error) with
// details {"location": <JSON pointer>}.

nlohmann::json encode_diagram(const Diagram& diagram);
std::string encode_diagram_text(const Diagram& diagram);

Diagram decode_diagram(const nlohmann::json& doc);
Diagram decode_diagram_text(std::string_view text);

nlohmann::json encode_metrics(const GraphMetrics& m);

nlohmann::json encode_path(const NodePath& path);
nlohmann::json encode_paths(const std::vector<NodePath>& paths);

/// Paths are arrays of integers with at least two entries; shorter ones are
/// malformed_path, anything else wrong is decode_error.
NodePath decode_path(const nlohmann::json& doc, const std::string& location = "");
std::vector<NodePath> decode_paths(const nlohmann::json& doc, const std::string& location = "");

}  // namespace flowclass::graph
