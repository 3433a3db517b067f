#include "flowclass/graph/codec.hpp"

#include <climits>
#include <initializer_list>

namespace flowclass::graph {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& location, const std::string& message) {
  throw Error(ErrorCode::decode_error, message + " at '" + location + "'",
              {{"location", location}});
}

const json& require_object(const json& doc, const std::string& loc,
                           std::initializer_list<std::string_view> allowed) {
  if (!doc.is_object()) fail(loc, "expected object");
  for (const auto& [key, _] : doc.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || key == a;
    if (!known) fail(loc + "/" + key, "unknown field");
  }
  return doc;
}

const json& member(const json& obj, const std::string& loc, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(loc + "/" + key, "missing field");
  return *it;
}

int as_int(const json& v, const std::string& loc) {
  if (!v.is_number_integer()) fail(loc, "expected integer");
  const auto wide = v.get<long long>();
  if (v.is_number_unsigned() && v.get<unsigned long long>() > static_cast<unsigned long long>(INT_MAX)) {
    fail(loc, "integer out of range");
  }
  if (wide < INT_MIN || wide > INT_MAX) fail(loc, "integer out of range");
  return static_cast<int>(wide);
}

std::string as_string(const json& v, const std::string& loc) {
  if (!v.is_string()) fail(loc, "expected string");
  return v.get<std::string>();
}

Point as_point(const json& v, const std::string& loc) {
  if (!v.is_array() || v.size() != 2) fail(loc, "expected [x,y]");
  return {as_int(v[0], loc + "/0"), as_int(v[1], loc + "/1")};
}

json point_json(Point p) { return json::array({p.x, p.y}); }

}  // namespace

json encode_diagram(const Diagram& diagram) {
  json nodes = json::array();
  for (const Node& n : diagram.nodes()) {
    json node = {{"id", n.id}, {"kind", to_string(n.kind)}, {"x", n.position.x}, {"y", n.position.y}};
    if (n.number) node["number"] = *n.number;
    nodes.push_back(std::move(node));
  }
  json edges = json::array();
  for (const Edge& e : diagram.edges()) {
    json edge = {{"id", e.id}, {"from", e.from}, {"to", e.to}, {"shape", to_string(e.shape)}};
    if (e.control_points) {
      edge["cp"] = json::array({point_json((*e.control_points)[0]), point_json((*e.control_points)[1])});
    }
    edges.push_back(std::move(edge));
  }
  return {{"canvas", {{"w", diagram.extent().width}, {"h", diagram.extent().height}}},
          {"nodes", std::move(nodes)},
          {"edges", std::move(edges)}};
}

std::string encode_diagram_text(const Diagram& diagram) { return encode_diagram(diagram).dump(); }

Diagram decode_diagram(const json& doc) {
  require_object(doc, "", {"canvas", "nodes", "edges"});

  const json& canvas = require_object(member(doc, "", "canvas"), "/canvas", {"w", "h"});
  const CanvasExtent extent{as_int(member(canvas, "/canvas", "w"), "/canvas/w"),
                            as_int(member(canvas, "/canvas", "h"), "/canvas/h")};
  if (extent.width <= 0) fail("/canvas/w", "canvas width must be positive");
  if (extent.height <= 0) fail("/canvas/h", "canvas height must be positive");

  const json& nodes_doc = member(doc, "", "nodes");
  if (!nodes_doc.is_array()) fail("/nodes", "expected array");
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < nodes_doc.size(); ++i) {
    const std::string loc = "/nodes/" + std::to_string(i);
    const json& n = require_object(nodes_doc[i], loc, {"id", "kind", "number", "x", "y"});
    Node node;
    node.id = as_string(member(n, loc, "id"), loc + "/id");
    const std::string kind = as_string(member(n, loc, "kind"), loc + "/kind");
    if (kind == "process") {
      node.kind = NodeKind::process;
    } else if (kind == "star") {
      node.kind = NodeKind::star;
    } else {
      fail(loc + "/kind", "unknown node kind '" + kind + "'");
    }
    if (auto it = n.find("number"); it != n.end() && !it->is_null()) {
      node.number = as_int(*it, loc + "/number");
    }
    node.position = {as_int(member(n, loc, "x"), loc + "/x"), as_int(member(n, loc, "y"), loc + "/y")};
    nodes.push_back(std::move(node));
  }

  const json& edges_doc = member(doc, "", "edges");
  if (!edges_doc.is_array()) fail("/edges", "expected array");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < edges_doc.size(); ++i) {
    const std::string loc = "/edges/" + std::to_string(i);
    const json& e = require_object(edges_doc[i], loc, {"id", "from", "to", "shape", "cp"});
    Edge edge;
    edge.id = as_string(member(e, loc, "id"), loc + "/id");
    edge.from = as_string(member(e, loc, "from"), loc + "/from");
    edge.to = as_string(member(e, loc, "to"), loc + "/to");
    const std::string shape = as_string(member(e, loc, "shape"), loc + "/shape");
    if (shape == "straight") {
      edge.shape = EdgeShape::straight;
    } else if (shape == "curved") {
      edge.shape = EdgeShape::curved;
    } else {
      fail(loc + "/shape", "unknown edge shape '" + shape + "'");
    }
    if (auto it = e.find("cp"); it != e.end() && !it->is_null()) {
      if (!it->is_array() || it->size() != 2) fail(loc + "/cp", "expected exactly 2 control points");
      edge.control_points = ControlPoints{as_point((*it)[0], loc + "/cp/0"),
                                          as_point((*it)[1], loc + "/cp/1")};
    }
    edges.push_back(std::move(edge));
  }

  try {
    return Diagram::assemble(extent, std::move(nodes), std::move(edges));
  } catch (const Error& err) {
    const json& d = err.details();
    std::string loc;
    if (d.is_object() && d.contains("item")) {
      loc = "/" + d["item"].get<std::string>();
      if (d.contains("index")) loc += "/" + std::to_string(d["index"].get<std::size_t>());
      if (d.contains("field")) loc += "/" + d["field"].get<std::string>();
    }
    throw Error(ErrorCode::decode_error, std::string(err.what()) + " at '" + loc + "'",
                {{"location", loc}, {"violation", to_string(err.code())}});
  }
}

Diagram decode_diagram_text(std::string_view text) {
  json doc = json::parse(text.begin(), text.end(), nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorCode::decode_error, "diagram document is not valid JSON", {{"location", ""}});
  }
  return decode_diagram(doc);
}

json encode_metrics(const GraphMetrics& m) {
  return {{"n", m.n},
          {"e", m.e},
          {"cc_structural", m.cc_structural ? json(*m.cc_structural) : json(nullptr)},
          {"cc_declared", m.cc_declared},
          {"connected", m.connected}};
}

json encode_path(const NodePath& path) { return path.numbers(); }

json encode_paths(const std::vector<NodePath>& paths) {
  json out = json::array();
  for (const auto& p : paths) out.push_back(encode_path(p));
  return out;
}

NodePath decode_path(const json& doc, const std::string& location) {
  if (!doc.is_array()) fail(location, "expected array of node numbers");
  if (doc.size() < 2) {
    throw Error(ErrorCode::malformed_path, "a path needs at least two nodes at '" + location + "'",
                {{"location", location}});
  }
  std::vector<int> numbers;
  numbers.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    numbers.push_back(as_int(doc[i], location + "/" + std::to_string(i)));
  }
  return NodePath(std::move(numbers));
}

std::vector<NodePath> decode_paths(const json& doc, const std::string& location) {
  if (!doc.is_array()) fail(location, "expected array of paths");
  std::vector<NodePath> paths;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    paths.push_back(decode_path(doc[i], location + "/" + std::to_string(i)));
  }
  return paths;
}

}  // namespace flowclass::graph
