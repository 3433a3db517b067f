#include "flowclass/graph/diagram.hpp"

#include <algorithm>
#include <charconv>

namespace flowclass {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::out_of_bounds: return "out_of_bounds";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::invalid_edge: return "invalid_edge";
    case ErrorCode::duplicate_edge: return "duplicate_edge";
    case ErrorCode::malformed_path: return "malformed_path";
    case ErrorCode::decode_error: return "decode_error";
    case ErrorCode::invalid_reference: return "invalid_reference";
    case ErrorCode::access_denied: return "access_denied";
    case ErrorCode::unauthorized: return "unauthorized";
    case ErrorCode::unavailable: return "unavailable";
    case ErrorCode::wrong_state: return "wrong_state";
    case ErrorCode::order_violation: return "order_violation";
    case ErrorCode::payload_too_large: return "payload_too_large";
    case ErrorCode::storage_failure: return "storage_failure";
  }
  return "unknown";
}

}  // namespace flowclass

namespace flowclass::graph {

namespace {

nlohmann::json item_ref(std::string_view item, std::size_t index, std::string_view field) {
  return {{"item", item}, {"index", index}, {"field", field}};
}

}  // namespace

Diagram::Diagram(CanvasExtent extent) : extent_(extent) {
  if (extent.width <= 0 || extent.height <= 0) {
    throw Error(ErrorCode::invalid_argument, "canvas extent must be positive",
                {{"item", "canvas"}});
  }
}

Diagram Diagram::assemble(CanvasExtent extent, std::vector<Node> nodes,
                          std::vector<Edge> edges) {
  Diagram d(extent);

  std::vector<std::string_view> ids;
  std::vector<bool> seen_number(nodes.size() + 1, false);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& node = nodes[i];
    if (node.id.empty()) {
      throw Error(ErrorCode::invalid_argument, "node id is empty", item_ref("nodes", i, "id"));
    }
    if (std::find(ids.begin(), ids.end(), node.id) != ids.end()) {
      throw Error(ErrorCode::invalid_argument, "duplicate item id '" + node.id + "'",
                  item_ref("nodes", i, "id"));
    }
    ids.push_back(node.id);
    if (!d.within_canvas(node.position)) {
      throw Error(ErrorCode::out_of_bounds, "node '" + node.id + "' lies outside the canvas",
                  item_ref("nodes", i, "x"));
    }
    if (node.kind == NodeKind::star) {
      if (node.number) {
        throw Error(ErrorCode::invalid_argument, "star node '" + node.id + "' carries a number",
                    item_ref("nodes", i, "number"));
      }
      continue;
    }
    if (!node.number) {
      throw Error(ErrorCode::invalid_argument, "process node '" + node.id + "' has no number",
                  item_ref("nodes", i, "number"));
    }
    // Numbers must be a permutation of 1..n, where n counts process nodes only.
    const int number = *node.number;
    if (number < 1 || static_cast<std::size_t>(number) >= seen_number.size() ||
        seen_number[number]) {
      throw Error(ErrorCode::invalid_argument,
                  "process number " + std::to_string(number) + " breaks 1..n numbering",
                  item_ref("nodes", i, "number"));
    }
    seen_number[number] = true;
  }
  const auto process_total = static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(),
                    [](const Node& n) { return n.kind == NodeKind::process; }));
  for (std::size_t k = 1; k <= process_total; ++k) {
    if (!seen_number[k]) {
      throw Error(ErrorCode::invalid_argument,
                  "process numbers skip " + std::to_string(k),
                  {{"item", "nodes"}, {"field", "number"}});
    }
  }
  d.nodes_ = std::move(nodes);

  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& edge = edges[i];
    if (edge.id.empty()) {
      throw Error(ErrorCode::invalid_argument, "edge id is empty", item_ref("edges", i, "id"));
    }
    if (std::find(ids.begin(), ids.end(), edge.id) != ids.end()) {
      throw Error(ErrorCode::invalid_argument, "duplicate item id '" + edge.id + "'",
                  item_ref("edges", i, "id"));
    }
    ids.push_back(edge.id);
    for (const auto* end : {&edge.from, &edge.to}) {
      const Node* node = d.find_node(*end);
      const char* field = end == &edge.from ? "from" : "to";
      if (node == nullptr) {
        throw Error(ErrorCode::invalid_edge, "edge '" + edge.id + "' references unknown node",
                    item_ref("edges", i, field));
      }
      if (node->kind != NodeKind::process) {
        throw Error(ErrorCode::invalid_edge, "edge '" + edge.id + "' attaches to a star node",
                    item_ref("edges", i, field));
      }
    }
    if ((edge.shape == EdgeShape::curved) != edge.control_points.has_value()) {
      throw Error(ErrorCode::invalid_edge,
                  "edge '" + edge.id + "': control points required iff curved",
                  item_ref("edges", i, "cp"));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (edges[j].from == edge.from && edges[j].to == edge.to) {
        throw Error(ErrorCode::duplicate_edge, "edge '" + edge.id + "' duplicates '" +
                                                   edges[j].id + "'",
                    item_ref("edges", i, "to"));
      }
    }
  }
  d.edges_ = std::move(edges);
  return d;
}

bool Diagram::within_canvas(Point p) const {
  return p.x >= 0 && p.y >= 0 && p.x <= extent_.width && p.y <= extent_.height;
}

int Diagram::smallest_free_number() const {
  std::vector<bool> used(nodes_.size() + 2, false);
  for (const Node& node : nodes_) {
    if (node.number && static_cast<std::size_t>(*node.number) < used.size()) {
      used[*node.number] = true;
    }
  }
  int k = 1;
  while (used[k]) ++k;
  return k;
}

std::string Diagram::fresh_id(char prefix) {
  for (;;) {
    std::string id = prefix + std::to_string(++id_counter_);
    if (!contains_item(id)) return id;
  }
}

InsertedNode Diagram::insert_node(NodeKind kind, Point position) {
  if (!within_canvas(position)) {
    throw Error(ErrorCode::out_of_bounds, "position outside canvas",
                {{"position", {position.x, position.y}},
                 {"canvas", {{"w", extent_.width}, {"h", extent_.height}}}});
  }
  Node node{fresh_id('n'), kind, std::nullopt, position};
  if (kind == NodeKind::process) node.number = smallest_free_number();
  nodes_.push_back(node);
  return {node.id, node.number};
}

void Diagram::delete_item(std::string_view item_id) {
  auto node_it = std::find_if(nodes_.begin(), nodes_.end(),
                              [&](const Node& n) { return n.id == item_id; });
  if (node_it != nodes_.end()) {
    const std::string id = node_it->id;
    const std::optional<int> freed = node_it->number;
    nodes_.erase(node_it);
    std::erase_if(edges_, [&](const Edge& e) { return e.from == id || e.to == id; });
    if (freed) {
      for (Node& n : nodes_) {
        if (n.number && *n.number > *freed) --*n.number;
      }
    }
    return;
  }
  auto edge_it = std::find_if(edges_.begin(), edges_.end(),
                              [&](const Edge& e) { return e.id == item_id; });
  if (edge_it == edges_.end()) {
    throw Error(ErrorCode::not_found, "no item '" + std::string(item_id) + "'",
                {{"id", item_id}});
  }
  edges_.erase(edge_it);
}

void Diagram::reset() {
  nodes_.clear();
  edges_.clear();
}

std::string Diagram::add_edge(std::string_view from_id, std::string_view to_id, EdgeShape shape,
                              std::optional<ControlPoints> control_points) {
  for (std::string_view end : {from_id, to_id}) {
    const Node* node = find_node(end);
    if (node == nullptr) {
      throw Error(ErrorCode::not_found, "no node '" + std::string(end) + "'", {{"id", end}});
    }
    if (node->kind != NodeKind::process) {
      throw Error(ErrorCode::invalid_edge, "edges cannot attach to star nodes", {{"id", end}});
    }
  }
  if ((shape == EdgeShape::curved) != control_points.has_value()) {
    throw Error(ErrorCode::invalid_edge,
                shape == EdgeShape::curved ? "curved edge needs exactly 2 control points"
                                           : "straight edge takes no control points");
  }
  for (const Edge& e : edges_) {
    if (e.from == from_id && e.to == to_id) {
      throw Error(ErrorCode::duplicate_edge, "edge already exists", {{"existing", e.id}});
    }
  }
  Edge edge{fresh_id('e'), std::string(from_id), std::string(to_id), shape, control_points};
  edges_.push_back(edge);
  return edge.id;
}

const Node* Diagram::find_node(std::string_view id) const {
  auto it = std::find_if(nodes_.begin(), nodes_.end(), [&](const Node& n) { return n.id == id; });
  return it == nodes_.end() ? nullptr : &*it;
}

const Node* Diagram::find_process(int number) const {
  auto it = std::find_if(nodes_.begin(), nodes_.end(),
                         [&](const Node& n) { return n.number == number; });
  return it == nodes_.end() ? nullptr : &*it;
}

bool Diagram::contains_item(std::string_view id) const {
  return find_node(id) != nullptr ||
         std::any_of(edges_.begin(), edges_.end(), [&](const Edge& e) { return e.id == id; });
}

bool Diagram::has_edge(int from_number, int to_number) const {
  const Node* from = find_process(from_number);
  const Node* to = find_process(to_number);
  if (from == nullptr || to == nullptr) return false;
  return std::any_of(edges_.begin(), edges_.end(),
                     [&](const Edge& e) { return e.from == from->id && e.to == to->id; });
}

std::size_t Diagram::process_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [](const Node& n) { return n.kind == NodeKind::process; }));
}

std::size_t Diagram::star_count() const { return nodes_.size() - process_count(); }

std::vector<std::pair<int, int>> Diagram::numbered_edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(edges_.size());
  for (const Edge& e : edges_) {
    out.emplace_back(*find_node(e.from)->number, *find_node(e.to)->number);
  }
  return out;
}

std::string NodePath::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < numbers_.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(numbers_[i]);
  }
  return out;
}

NodePath NodePath::parse(std::string_view text) {
  std::vector<int> numbers;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t dash = std::min(text.find('-', pos), text.size());
    const std::string_view token = text.substr(pos, dash - pos);
    int value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size()) {
      throw Error(ErrorCode::malformed_path, "cannot parse path '" + std::string(text) + "'");
    }
    numbers.push_back(value);
    pos = dash + 1;
  }
  return NodePath(std::move(numbers));
}

std::string_view to_string(NodeKind kind) noexcept {
  return kind == NodeKind::process ? "process" : "star";
}

std::string_view to_string(EdgeShape shape) noexcept {
  return shape == EdgeShape::straight ? "straight" : "curved";
}

std::string_view to_string(PathFailure failure) noexcept {
  switch (failure) {
    case PathFailure::none: return "none";
    case PathFailure::missing_edge: return "missing_edge";
    case PathFailure::unknown_node: return "unknown_node";
  }
  return "none";
}

}  // namespace flowclass::graph
