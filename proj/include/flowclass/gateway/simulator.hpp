#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowclass/game/types.hpp"
#include "flowclass/graph/diagram.hpp"

namespace flowclass::gateway {

struct BehaviorProfile {
  std::size_t students = 30;
  /// Fraction of students that stop after phase 1 and never send paths.
  double drop_after_phase1 = 0.0;
  game::AdvanceMode advance_mode = game::AdvanceMode::professor_triggered;
  std::chrono::milliseconds max_jitter{40};
  std::uint64_t seed = 1;
  std::string professor_secret;
  /// Game code; a random one is generated when empty.
  std::string code;
  /// Runs once every diagram has been acknowledged and before phase 2 opens.
  std::function<void()> between_phases;
  std::chrono::seconds timeout{45};
};

struct SimulationReport {
  std::size_t students = 0;
  std::size_t dropped = 0;
  std::string game_id;
  std::size_t joined = 0;
  std::size_t diagrams_acknowledged = 0;
  std::size_t paths_acknowledged = 0;
  std::size_t persisted_answers = 0;
  std::size_t complete_answers = 0;
  std::size_t players_count = 0;
  std::size_t diagrams_submitted = 0;
  std::size_t paths_submitted = 0;
  /// Distinct phase_advanced events each student processed after dedup.
  std::vector<std::size_t> phase_advanced_seen;
  /// Event-stream counts across student listeners and the dashboard.
  std::size_t duplicate_events = 0;
  std::size_t resyncs = 0;
  std::size_t professor_monitor_updates = 0;
  std::vector<std::string> failures;

  bool ok() const noexcept { return failures.empty(); }
  nlohmann::json to_json() const;
};

/// The flow graph the simulator authors as its reference game
/// (8 process nodes, 9 edges, CC 3) and its three basis paths.
graph::Diagram simulation_reference_diagram();
std::vector<graph::NodePath> simulation_reference_paths();

/// Plays one full game against a running server at `server_url`
/// ("http://host:port"): creates and opens a game, lets every virtual student
/// join with a distinct id, submit a randomized valid diagram and (unless
/// dropped) paths with jittered timing, then checks answer conservation,
/// monitor counters and per-student phase_advanced delivery. Mismatches are
/// recorded in `failures`; a student count of zero is a no-op.
SimulationReport simulate_classroom(const std::string& server_url, const BehaviorProfile& profile);

}  // namespace flowclass::gateway
