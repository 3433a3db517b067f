#include <algorithm>
#include <array>
#include <bitset>
#include <set>

#include "flowclass/grading/analysis.hpp"

namespace flowclass::grading {

namespace {

constexpr std::size_t kMax = kMaxIsomorphismNodes;

// Adjacency as bit rows over 0-based node indices.
struct Adjacency {
  std::size_t n = 0;
  std::array<std::bitset<kMax>, kMax> out{};
  std::array<int, kMax> out_degree{};
  std::array<int, kMax> in_degree{};

  explicit Adjacency(const Diagram& d) : n(d.process_count()) {
    for (auto [from, to] : d.numbered_edges()) {
      out[from - 1].set(to - 1);
      ++out_degree[from - 1];
      ++in_degree[to - 1];
    }
  }

  bool edge(std::size_t u, std::size_t v) const { return out[u].test(v); }
};

class Matcher {
 public:
  Matcher(const Adjacency& a, const Adjacency& b) : a_(a), b_(b) {
    order_.resize(a.n);
    for (std::size_t i = 0; i < a.n; ++i) order_[i] = i;
    // Place highly connected nodes first so mismatches surface early.
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t x, std::size_t y) {
      return a.out_degree[x] + a.in_degree[x] > a.out_degree[y] + a.in_degree[y];
    });
    mapping_.fill(kUnmapped);
  }

  bool run() { return extend(0); }

 private:
  static constexpr std::size_t kUnmapped = kMax;

  bool compatible(std::size_t u, std::size_t v) const {
    if (a_.out_degree[u] != b_.out_degree[v] || a_.in_degree[u] != b_.in_degree[v]) return false;
    if (a_.edge(u, u) != b_.edge(v, v)) return false;
    for (std::size_t w = 0; w < a_.n; ++w) {
      const std::size_t fw = mapping_[w];
      if (fw == kUnmapped) continue;
      if (a_.edge(u, w) != b_.edge(v, fw) || a_.edge(w, u) != b_.edge(fw, v)) return false;
    }
    return true;
  }

  bool extend(std::size_t depth) {
    if (depth == order_.size()) return true;
    const std::size_t u = order_[depth];
    for (std::size_t v = 0; v < b_.n; ++v) {
      if (used_.test(v) || !compatible(u, v)) continue;
      mapping_[u] = v;
      used_.set(v);
      if (extend(depth + 1)) return true;
      used_.reset(v);
      mapping_[u] = kUnmapped;
    }
    return false;
  }

  const Adjacency& a_;
  const Adjacency& b_;
  std::vector<std::size_t> order_;
  std::array<std::size_t, kMax> mapping_{};
  std::bitset<kMax> used_;
};

}  // namespace

Equivalence graphs_equivalent(const Diagram& a, const Diagram& b) {
  Equivalence eq;
  const auto ea = a.numbered_edges();
  const auto eb = b.numbered_edges();
  const std::set<std::pair<int, int>> set_a(ea.begin(), ea.end());
  const std::set<std::pair<int, int>> set_b(eb.begin(), eb.end());
  const std::size_t n = a.process_count();

  eq.label_exact = n == b.process_count() && set_a == set_b;
  if (std::max(n, b.process_count()) > kMaxIsomorphismNodes) {
    eq.isomorphism = Isomorphism::skipped_too_large;
    return eq;
  }
  if (eq.label_exact) {
    eq.isomorphism = Isomorphism::isomorphic;
    return eq;
  }
  if (n != b.process_count() || set_a.size() != set_b.size()) {
    eq.isomorphism = Isomorphism::not_isomorphic;
    return eq;
  }
  const Adjacency adj_a(a);
  const Adjacency adj_b(b);
  eq.isomorphism = Matcher(adj_a, adj_b).run() ? Isomorphism::isomorphic : Isomorphism::not_isomorphic;
  return eq;
}

}  // namespace flowclass::grading
