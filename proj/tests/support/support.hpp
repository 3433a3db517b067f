#pragma once

#include <stdlib.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "flowclass/game/service.hpp"
#include "flowclass/graph/codec.hpp"
#include "flowclass/graph/diagram.hpp"

namespace testing {

using flowclass::graph::Diagram;
using flowclass::graph::NodePath;

inline std::filesystem::path fixture(const std::string& relative) {
  return std::filesystem::path(FLOWCLASS_FIXTURE_DIR) / relative;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  return nlohmann::json::parse(read_text(path));
}

class TempDir {
 public:
  TempDir() {
    std::string pattern = (std::filesystem::temp_directory_path() / "flowclass-XXXXXX").string();
    path_ = ::mkdtemp(pattern.data());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Deterministic clock: 2026-03-02T09:00:00.000Z, one second per reading.
inline flowclass::game::GameService::Clock stepping_clock(std::int64_t step_ms = 1000) {
  auto ticks = std::make_shared<std::atomic<std::int64_t>>(0);
  return [ticks, step_ms] {
    constexpr std::int64_t start = 1772442000000;  // 2026-03-02T09:00:00Z
    return flowclass::game::Timestamp(std::chrono::milliseconds(start + step_ms * (*ticks)++));
  };
}

inline flowclass::game::GameService::TokenSource counting_tokens(std::string prefix = "tok-") {
  auto next = std::make_shared<std::atomic<int>>(1);
  return [next, prefix] { return prefix + std::to_string((*next)++); };
}

/// The worked-example flow graph: 8 process nodes, 9 edges (8->2 but no
/// 2->8), 3 stars.
inline Diagram worked_reference() {
  return flowclass::graph::decode_diagram(read_json(fixture("worked_example/reference.json")));
}

inline std::vector<NodePath> worked_basis() {
  return {NodePath{1, 2, 7}, NodePath{1, 2, 3, 4, 6, 8, 2, 7}, NodePath{1, 2, 3, 5, 6, 8, 2, 7}};
}

/// Student 236138: the reference drawn again, and four paths starting 1-2-8.
inline nlohmann::json worked_answer() { return read_json(fixture("worked_example/answers/236138.json")); }

/// Process nodes 1..n on a loose grid plus the given edges (by number).
inline Diagram diagram_from_edges(int n, const std::vector<std::pair<int, int>>& edges, int stars = 0) {
  Diagram d(flowclass::graph::CanvasExtent{40, 40});
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) {
    ids.push_back(d.insert_node(flowclass::graph::NodeKind::process, {(i % 6) * 6, (i / 6) * 6}).id);
  }
  for (auto [a, b] : edges) d.add_edge(ids[a - 1], ids[b - 1], flowclass::graph::EdgeShape::straight);
  for (int i = 0; i < stars; ++i) d.insert_node(flowclass::graph::NodeKind::star, {39, i});
  return d;
}

}  // namespace testing
