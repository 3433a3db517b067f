#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flowclass/error.hpp"

namespace flowclass::graph {

/// Grid coordinates. Rendering scale is a client concern.
struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct CanvasExtent {
  int width = 0;
  int height = 0;
  friend bool operator==(const CanvasExtent&, const CanvasExtent&) = default;
};

enum class NodeKind { process, star };
enum class EdgeShape { straight, curved };

using ControlPoints = std::array<Point, 2>;

struct Node {
  std::string id;
  NodeKind kind = NodeKind::process;
  std::optional<int> number;  // present iff kind == process
  Point position;
  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  std::string id;
  std::string from;
  std::string to;
  EdgeShape shape = EdgeShape::straight;
  std::optional<ControlPoints> control_points;  // present iff shape == curved
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct InsertedNode {
  std::string id;
  std::optional<int> number;
};

/// A flow-graph drawing: numbered process nodes, unnumbered star markers and
/// directed edges between process nodes.
///
/// Every mutation keeps the document valid:
///  - process numbers are exactly {1..n},
///  - edges only join existing process nodes,
///  - no two edges share an ordered (from, to) pair.
/// Ids are unique across nodes and edges so a single id names any item.
class Diagram {
 public:
  static constexpr CanvasExtent kDefaultExtent{40, 30};

  explicit Diagram(CanvasExtent extent = kDefaultExtent);

  /// Builds a diagram from decoded parts and checks every invariant. On
  /// failure throws Error whose details name the offending collection,
  /// index and field ({"item":"nodes","index":3,"field":"number"}).
  static Diagram assemble(CanvasExtent extent, std::vector<Node> nodes,
                          std::vector<Edge> edges);

  /// Process nodes take the smallest positive number not already in use.
  InsertedNode insert_node(NodeKind kind, Point position);

  /// Removes a node (with its incident edges) or an edge. Process nodes
  /// numbered above a deleted one move down by one, so numbers stay 1..n.
  void delete_item(std::string_view item_id);

  void reset();

  std::string add_edge(std::string_view from_id, std::string_view to_id, EdgeShape shape,
                       std::optional<ControlPoints> control_points = std::nullopt);

  const CanvasExtent& extent() const noexcept { return extent_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  const Node* find_node(std::string_view id) const;
  const Node* find_process(int number) const;
  bool contains_item(std::string_view id) const;

  /// True iff a directed edge joins the process nodes numbered `from` -> `to`.
  bool has_edge(int from_number, int to_number) const;

  std::size_t process_count() const;
  std::size_t star_count() const;

  /// Edges expressed as (from number, to number), in document order.
  std::vector<std::pair<int, int>> numbered_edges() const;

  friend bool operator==(const Diagram& a, const Diagram& b) {
    return a.extent_ == b.extent_ && a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  std::string fresh_id(char prefix);
  bool within_canvas(Point p) const;
  int smallest_free_number() const;

  CanvasExtent extent_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::uint64_t id_counter_ = 0;
};

/// Sequence of process-node numbers, as a student taps them.
class NodePath {
 public:
  NodePath() = default;
  explicit NodePath(std::vector<int> numbers) : numbers_(std::move(numbers)) {}
  NodePath(std::initializer_list<int> numbers) : numbers_(numbers) {}

  const std::vector<int>& numbers() const noexcept { return numbers_; }
  std::size_t size() const noexcept { return numbers_.size(); }

  /// "1-2-3-2-3-2-3-4"
  std::string to_string() const;
  static NodePath parse(std::string_view text);

  friend bool operator==(const NodePath&, const NodePath&) = default;

 private:
  std::vector<int> numbers_;
};

struct GraphMetrics {
  std::size_t n = 0;
  std::size_t e = 0;
  std::optional<long> cc_structural;  // e - n + 2; absent when n == 0
  std::size_t cc_declared = 0;        // star count
  bool connected = false;             // weak connectivity over process nodes
  friend bool operator==(const GraphMetrics&, const GraphMetrics&) = default;
};

GraphMetrics metrics(const Diagram& diagram);

enum class PathFailure { none, missing_edge, unknown_node };

struct PathVerdict {
  bool valid = false;
  PathFailure failure = PathFailure::none;
  std::optional<std::size_t> failure_position;       // index of the first bad hop
  std::optional<std::pair<int, int>> missing_pair;  // (from, to) of that hop
  friend bool operator==(const PathVerdict&, const PathVerdict&) = default;
};

/// Adjacency matrix over process numbers, for validating many paths against
/// one diagram.
class PathChecker {
 public:
  explicit PathChecker(const Diagram& diagram);

  /// Same contract as validate_path.
  PathVerdict check(const NodePath& path) const;
  bool has_edge(int from, int to) const noexcept;
  int process_count() const noexcept { return n_; }

 private:
  int n_ = 0;
  std::vector<unsigned char> adjacent_;  // row-major n x n, 0-based
};

/// Checks every consecutive hop against the directed edge set. Hop i is the
/// pair (path[i], path[i+1]); the first hop that names an unknown node or a
/// missing edge is reported. Throws malformed_path for paths shorter than 2.
PathVerdict validate_path(const Diagram& diagram, const NodePath& path);

/// Directed edges traversed by a path, in order, as number pairs.
std::vector<std::pair<int, int>> path_hops(const NodePath& path);

std::string_view to_string(NodeKind kind) noexcept;
std::string_view to_string(EdgeShape shape) noexcept;
std::string_view to_string(PathFailure failure) noexcept;

}  // namespace flowclass::graph
