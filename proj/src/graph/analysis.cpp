#include <numeric>

#include "flowclass/graph/diagram.hpp"

namespace flowclass::graph {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

GraphMetrics metrics(const Diagram& diagram) {
  GraphMetrics m;
  m.n = diagram.process_count();
  m.e = diagram.edges().size();
  m.cc_declared = diagram.star_count();
  if (m.n == 0) return m;

  m.cc_structural = static_cast<long>(m.e) - static_cast<long>(m.n) + 2;

  // Process numbers are 1..n, so they index the union-find directly.
  DisjointSets sets(m.n + 1);
  for (auto [from, to] : diagram.numbered_edges()) sets.unite(from, to);
  const std::size_t root = sets.find(1);
  m.connected = true;
  for (std::size_t k = 2; k <= m.n; ++k) {
    if (sets.find(k) != root) {
      m.connected = false;
      break;
    }
  }
  return m;
}

PathChecker::PathChecker(const Diagram& diagram)
    : n_(static_cast<int>(diagram.process_count())),
      adjacent_(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_), 0) {
  for (auto [from, to] : diagram.numbered_edges()) {
    adjacent_[static_cast<std::size_t>((from - 1) * n_ + (to - 1))] = 1;
  }
}

bool PathChecker::has_edge(int from, int to) const noexcept {
  if (from < 1 || from > n_ || to < 1 || to > n_) return false;
  return adjacent_[static_cast<std::size_t>((from - 1) * n_ + (to - 1))] != 0;
}

PathVerdict PathChecker::check(const NodePath& path) const {
  if (path.size() < 2) {
    throw Error(ErrorCode::malformed_path, "a path needs at least two nodes",
                {{"length", path.size()}});
  }
  const auto& p = path.numbers();
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    const std::pair<int, int> hop{p[i], p[i + 1]};
    const bool known = hop.first >= 1 && hop.first <= n_ && hop.second >= 1 && hop.second <= n_;
    if (!known) return {false, PathFailure::unknown_node, i, hop};
    if (!has_edge(hop.first, hop.second)) return {false, PathFailure::missing_edge, i, hop};
  }
  return {true, PathFailure::none, std::nullopt, std::nullopt};
}

PathVerdict validate_path(const Diagram& diagram, const NodePath& path) {
  if (path.size() < 2) {
    throw Error(ErrorCode::malformed_path, "a path needs at least two nodes",
                {{"length", path.size()}});
  }
  return PathChecker(diagram).check(path);
}

std::vector<std::pair<int, int>> path_hops(const NodePath& path) {
  std::vector<std::pair<int, int>> hops;
  const auto& p = path.numbers();
  for (std::size_t i = 0; i + 1 < p.size(); ++i) hops.emplace_back(p[i], p[i + 1]);
  return hops;
}

}  // namespace flowclass::graph
