#include "flowclass/gateway/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <mutex>
#include <random>
#include <set>
#include <thread>

#include <httplib.h>

#include "flowclass/game/service.hpp"
#include "flowclass/graph/codec.hpp"

namespace flowclass::gateway {

using nlohmann::json;
using namespace std::chrono_literals;
using Clock = std::chrono::steady_clock;

graph::Diagram simulation_reference_diagram() {
  using graph::NodeKind;
  graph::Diagram d(graph::CanvasExtent{20, 24});
  const graph::Point at[] = {{10, 1}, {10, 4}, {10, 8}, {6, 11}, {14, 11}, {10, 15}, {17, 4}, {10, 19}};
  std::vector<std::string> ids;
  for (const auto& p : at) ids.push_back(d.insert_node(NodeKind::process, p).id);
  auto edge = [&](int from, int to) { d.add_edge(ids[from - 1], ids[to - 1], graph::EdgeShape::straight); };
  edge(1, 2);
  edge(2, 3);
  edge(3, 4);
  edge(3, 5);
  edge(4, 6);
  edge(5, 6);
  edge(6, 8);
  d.add_edge(ids[7], ids[1], graph::EdgeShape::curved, graph::ControlPoints{{{3, 19}, {3, 4}}});
  edge(2, 7);
  for (const graph::Point p : {graph::Point{10, 11}, graph::Point{5, 16}, graph::Point{14, 3}}) {
    d.insert_node(NodeKind::star, p);
  }
  return d;
}

std::vector<graph::NodePath> simulation_reference_paths() {
  return {graph::NodePath{1, 2, 7}, graph::NodePath{1, 2, 3, 4, 6, 8, 2, 7},
          graph::NodePath{1, 2, 3, 5, 6, 8, 2, 7}};
}

json SimulationReport::to_json() const {
  return {{"students", students},
          {"dropped", dropped},
          {"game_id", game_id},
          {"joined", joined},
          {"diagrams_acknowledged", diagrams_acknowledged},
          {"paths_acknowledged", paths_acknowledged},
          {"persisted_answers", persisted_answers},
          {"complete_answers", complete_answers},
          {"monitor", {{"players_count", players_count},
                       {"diagrams_submitted", diagrams_submitted},
                       {"paths_submitted", paths_submitted}}},
          {"phase_advanced_seen", phase_advanced_seen},
          {"duplicate_events", duplicate_events},
          {"resyncs", resyncs},
          {"professor_monitor_updates", professor_monitor_updates},
          {"failures", failures},
          {"ok", ok()}};
}

namespace {

/// Incremental parser for a text/event-stream body.
class SseParser {
 public:
  struct Frame {
    std::string event;
    std::string data;
    std::string id;
  };

  template <typename OnFrame, typename OnComment>
  void feed(const char* data, std::size_t len, OnFrame&& on_frame, OnComment&& on_comment) {
    buffer_.append(data, len);
    std::size_t end;
    while ((end = buffer_.find("\n\n")) != std::string::npos) {
      const std::string block = buffer_.substr(0, end);
      buffer_.erase(0, end + 2);
      Frame frame;
      std::size_t pos = 0;
      while (pos <= block.size()) {
        std::size_t nl = block.find('\n', pos);
        if (nl == std::string::npos) nl = block.size();
        const std::string line = block.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;
        if (line[0] == ':') {
          on_comment(line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1));
          continue;
        }
        const auto colon = line.find(':');
        const std::string name = line.substr(0, colon);
        std::string value = colon == std::string::npos ? "" : line.substr(colon + 1);
        if (!value.empty() && value[0] == ' ') value.erase(0, 1);
        if (name == "event") frame.event = value;
        if (name == "data") frame.data += value;
        if (name == "id") frame.id = value;
      }
      if (!frame.event.empty() || !frame.data.empty()) on_frame(frame);
    }
  }

  void reset() { buffer_.clear(); }

 private:
  std::string buffer_;
};

/// One subscriber connection that keeps reconnecting until stopped and
/// deduplicates messages by (epoch, sequence_number).
class EventListener {
 public:
  EventListener(std::string url, std::string path, httplib::Headers auth)
      : client_(url), path_(std::move(path)), auth_(std::move(auth)) {
    client_.set_connection_timeout(2, 0);
    client_.set_read_timeout(30, 0);
  }

  ~EventListener() { stop(); }

  void start(std::function<void(const json&)> on_message, std::function<void()> on_resync) {
    on_message_ = std::move(on_message);
    on_resync_ = std::move(on_resync);
    thread_ = std::thread([this] { run(); });
  }

  void stop() {
    stopping_ = true;
    client_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string connected_epoch() const {
    std::lock_guard lock(mutex_);
    return epoch_;
  }

  std::size_t duplicates() const { return duplicates_; }
  std::size_t resyncs() const { return resyncs_; }

 private:
  void run() {
    while (!stopping_) {
      httplib::Headers headers = auth_;
      if (!last_id_.empty()) headers.emplace("Last-Event-ID", last_id_);
      parser_.reset();
      client_.Get(
          path_, headers, [](const httplib::Response& res) { return res.status == 200; },
          [this](const char* data, std::size_t len) {
            parser_.feed(
                data, len, [this](const SseParser::Frame& f) { handle(f); },
                [this](const std::string& comment) {
                  if (comment.rfind("epoch ", 0) == 0) {
                    std::lock_guard lock(mutex_);
                    epoch_ = comment.substr(6);
                  }
                });
            return !stopping_.load();
          });
      {
        std::lock_guard lock(mutex_);
        epoch_.clear();
      }
      if (!stopping_) std::this_thread::sleep_for(50ms);
    }
  }

  void handle(const SseParser::Frame& frame) {
    if (frame.event == "resync") {
      ++resyncs_;
      if (on_resync_) on_resync_();
      return;
    }
    const json message = json::parse(frame.data, nullptr, false);
    if (message.is_discarded()) return;
    if (!frame.id.empty()) last_id_ = frame.id;
    const auto key = std::make_pair(message.value("epoch", ""), message.value("sequence_number", 0ULL));
    if (!seen_.insert(key).second) {
      ++duplicates_;
      return;
    }
    if (on_message_) on_message_(message);
  }

  httplib::Client client_;
  std::string path_;
  httplib::Headers auth_;
  std::thread thread_;
  std::atomic<bool> stopping_{false};
  mutable std::mutex mutex_;
  std::string epoch_;
  std::string last_id_;
  SseParser parser_;
  std::set<std::pair<std::string, unsigned long long>> seen_;
  std::atomic<std::size_t> duplicates_{0};
  std::atomic<std::size_t> resyncs_{0};
  std::function<void(const json&)> on_message_;
  std::function<void()> on_resync_;
};

struct Http {
  explicit Http(const std::string& url) : client(url) {
    client.set_connection_timeout(2, 0);
    client.set_read_timeout(10, 0);
  }

  /// Retries transport failures (server restarting) until the deadline.
  httplib::Result send(const std::string& method, const std::string& path, const httplib::Headers& headers,
                       const std::string& body, Clock::time_point deadline) {
    for (;;) {
      httplib::Result res = method == "GET"      ? client.Get(path, headers)
                            : method == "DELETE" ? client.Delete(path, headers)
                                                 : client.Post(path, headers, body, "application/json");
      if (res || Clock::now() > deadline) return res;
      std::this_thread::sleep_for(50ms);
    }
  }

  httplib::Client client;
};

/// A random but valid rendition of the reference structure: positions,
/// edge shapes and star count vary, and one edge may be left out.
graph::Diagram student_diagram(std::mt19937_64& rng) {
  const graph::Diagram reference = simulation_reference_diagram();
  const auto extent = reference.extent();
  std::uniform_int_distribution<int> x(0, extent.width), y(0, extent.height), coin(0, 9), stars(2, 4);
  graph::Diagram d(extent);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < reference.process_count(); ++i) {
    ids.push_back(d.insert_node(graph::NodeKind::process, {x(rng), y(rng)}).id);
  }
  const bool skip_one = coin(rng) == 0;
  const auto edges = reference.numbered_edges();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (skip_one && i == edges.size() - 1) continue;
    const auto [from, to] = edges[i];
    if (coin(rng) < 3) {
      d.add_edge(ids[from - 1], ids[to - 1], graph::EdgeShape::curved,
                 graph::ControlPoints{{{x(rng), y(rng)}, {x(rng), y(rng)}}});
    } else {
      d.add_edge(ids[from - 1], ids[to - 1], graph::EdgeShape::straight);
    }
  }
  for (int i = stars(rng); i > 0; --i) d.insert_node(graph::NodeKind::star, {x(rng), y(rng)});
  return d;
}

std::vector<graph::NodePath> student_paths(std::mt19937_64& rng) {
  auto paths = simulation_reference_paths();
  std::shuffle(paths.begin(), paths.end(), rng);
  std::uniform_int_distribution<int> coin(0, 4);
  if (coin(rng) == 0) paths.push_back(graph::NodePath{1, 2, 8});  // the classic wrong turn
  return paths;
}

struct Student {
  std::size_t index = 0;
  std::string student_id;
  bool drops = false;
  std::string token;
  std::unique_ptr<EventListener> events;
  std::mutex mutex;
  std::condition_variable cv;
  std::size_t phase_advanced = 0;
  bool joined = false;
  bool diagram_acked = false;
  bool paths_acked = false;
  std::vector<std::string> failures;
};

}  // namespace

SimulationReport simulate_classroom(const std::string& server_url, const BehaviorProfile& profile) {
  SimulationReport report;
  report.students = profile.students;
  if (profile.students == 0) return report;

  const auto deadline = Clock::now() + profile.timeout;
  const httplib::Headers prof_auth = {{"Authorization", "Bearer " + profile.professor_secret}};
  Http professor(server_url);
  auto fail = [&](std::string what) { report.failures.push_back(std::move(what)); };

  const std::string code = profile.code.empty() ? game::generate_code() : profile.code;
  const json create = {{"reference_diagram", graph::encode_diagram(simulation_reference_diagram())},
                       {"reference_paths", graph::encode_paths(simulation_reference_paths())},
                       {"code", code},
                       {"advance_mode", game::to_string(profile.advance_mode)}};
  auto created = professor.send("POST", "/api/professor/games", prof_auth, create.dump(), deadline);
  if (!created || created->status != 201) {
    fail("create_game failed: " + (created ? created->body : httplib::to_string(created.error())));
    return report;
  }
  report.game_id = json::parse(created->body).at("game_id").get<std::string>();
  auto opened = professor.send("POST", "/api/professor/games/" + report.game_id + "/open", prof_auth, "", deadline);
  if (!opened || opened->status != 200) {
    fail("open_game failed");
    return report;
  }

  // Professor dashboard feed: counters must never go backwards.
  std::atomic<std::size_t> monitor_updates{0};
  std::mutex monitor_mutex;
  std::size_t last_diagrams = 0, last_paths = 0, last_players = 0;
  std::vector<std::string> monitor_failures;
  EventListener dashboard(server_url, "/api/professor/events", prof_auth);
  dashboard.start(
      [&](const json& message) {
        if (message.value("type", "") != "monitor_update") return;
        const json& p = message.at("payload");
        if (p.value("game_id", "") != report.game_id) return;
        ++monitor_updates;
        std::lock_guard lock(monitor_mutex);
        const auto players = p.value("players_count", 0UL), diagrams = p.value("diagrams_submitted", 0UL),
                   paths = p.value("paths_submitted", 0UL);
        if (players < last_players || diagrams < last_diagrams || paths < last_paths) {
          monitor_failures.push_back("monitor counters decreased");
        }
        last_players = std::max(last_players, players);
        last_diagrams = std::max(last_diagrams, diagrams);
        last_paths = std::max(last_paths, paths);
      },
      {});

  std::mt19937_64 rng(profile.seed);
  std::vector<std::unique_ptr<Student>> students;
  std::vector<std::size_t> order(profile.students);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  report.dropped = static_cast<std::size_t>(static_cast<double>(profile.students) * profile.drop_after_phase1);
  for (std::size_t i = 0; i < profile.students; ++i) {
    auto s = std::make_unique<Student>();
    s->index = i;
    s->student_id = std::to_string(236000 + i);
    students.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < report.dropped; ++i) students[order[i]]->drops = true;

  std::mutex phase_mutex;
  std::condition_variable phase_cv;
  std::size_t diagrams_done = 0;
  bool phase2_released = false;

  auto play = [&](Student& s) {
    std::mt19937_64 srng(profile.seed * 1000003ULL + s.index);
    std::uniform_int_distribution<long> jitter(0, std::max<long>(0, profile.max_jitter.count()));
    auto note = [&](std::string what) { s.failures.push_back(s.student_id + ": " + std::move(what)); };
    Http http(server_url);

    auto listed = http.send("POST", "/api/student/games", {}, json{{"code", code}}.dump(), deadline);
    int game_number = 0;
    if (listed && listed->status == 200) {
      const json body = json::parse(listed->body);
      for (const auto& g : body.at("games")) game_number = g.at("game_number").get<int>();
    }
    if (game_number == 0) {
      note("game not listed for code: " + (listed ? std::to_string(listed->status) + " " + listed->body : httplib::to_string(listed.error())));
      std::lock_guard lock(phase_mutex);
      ++diagrams_done;
      phase_cv.notify_all();
      return;
    }
    const json join = {{"code", code}, {"student_id", s.student_id}, {"game_number", game_number}};
    auto joined = http.send("POST", "/api/student/join", {}, join.dump(), deadline);
    if (!joined || joined->status != 200) {
      note("join failed");
      std::lock_guard lock(phase_mutex);
      ++diagrams_done;
      phase_cv.notify_all();
      return;
    }
    s.token = json::parse(joined->body).at("session_token").get<std::string>();
    s.joined = true;
    const httplib::Headers auth = {{"X-Session-Token", s.token}};

    s.events = std::make_unique<EventListener>(server_url, "/api/student/events", auth);
    s.events->start(
        [&s](const json& message) {
          if (message.value("type", "") != "phase_advanced") return;
          std::lock_guard lock(s.mutex);
          ++s.phase_advanced;
          s.cv.notify_all();
        },
        {});

    std::this_thread::sleep_for(std::chrono::milliseconds(jitter(srng)));
    const json diagram = {{"diagram", graph::encode_diagram(student_diagram(srng))}};
    auto submitted = http.send("POST", "/api/student/diagram", auth, diagram.dump(), deadline);
    std::string phase;
    if (submitted && submitted->status == 200) {
      s.diagram_acked = true;
      phase = json::parse(submitted->body).at("session_phase").get<std::string>();
    } else {
      note("diagram rejected: " + (submitted ? submitted->body : std::string("no response")));
    }
    {
      std::lock_guard lock(phase_mutex);
      ++diagrams_done;
      phase_cv.notify_all();
    }
    if (s.drops || !s.diagram_acked) return;

    if (profile.advance_mode == game::AdvanceMode::professor_triggered) {
      {
        std::unique_lock lock(phase_mutex);
        phase_cv.wait_until(lock, deadline, [&] { return phase2_released; });
      }
      std::unique_lock lock(s.mutex);
      if (!s.cv.wait_until(lock, deadline, [&] { return s.phase_advanced > 0; })) {
        note("phase_advanced never arrived");
        // Polling fallback keeps the student playing.
        lock.unlock();
        auto state = http.send("GET", "/api/student/state", auth, "", deadline);
        if (!state || json::parse(state->body).value("session_phase", "") != "phase2") return;
      }
    } else if (phase != "phase2") {
      note("individual mode did not move to phase2");
      return;
    }

    auto payload = http.send("GET", "/api/student/phase2", auth, "", deadline);
    if (!payload || payload->status != 200) {
      note("phase 2 payload unavailable");
      return;
    }
    const auto reference = graph::decode_diagram(json::parse(payload->body).at("reference_diagram"));
    if (graph::metrics(reference).cc_structural != 3L) note("phase 2 payload is not the reference diagram");

    std::this_thread::sleep_for(std::chrono::milliseconds(jitter(srng)));
    const json paths = {{"paths", graph::encode_paths(student_paths(srng))}};
    auto sent = http.send("POST", "/api/student/paths", auth, paths.dump(), deadline);
    if (sent && sent->status == 200 && json::parse(sent->body).value("done", false)) {
      s.paths_acked = true;
    } else {
      note("paths rejected: " + (sent ? sent->body : std::string("no response")));
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(students.size());
  for (auto& s : students) threads.emplace_back(play, std::ref(*s));

  {
    std::unique_lock lock(phase_mutex);
    if (!phase_cv.wait_until(lock, deadline, [&] { return diagrams_done == students.size(); })) {
      fail("timed out waiting for phase-1 submissions");
    }
  }
  if (profile.between_phases) profile.between_phases();

  if (profile.advance_mode == game::AdvanceMode::professor_triggered) {
    // Every live subscriber must be attached to the current server instance
    // before the advance, or its phase_advanced would be lost to a restart.
    std::string epoch;
    while (Clock::now() < deadline) {
      auto health = professor.send("GET", "/api/health", {}, "", deadline);
      if (health && health->status == 200) epoch = json::parse(health->body).value("epoch", "");
      const bool attached = std::all_of(students.begin(), students.end(), [&](const auto& s) {
        return !s->events || s->events->connected_epoch() == epoch;
      });
      if (attached) break;
      std::this_thread::sleep_for(20ms);
    }
  }

  auto advanced = professor.send("POST", "/api/professor/games/" + report.game_id + "/advance", prof_auth, "",
                                 deadline);
  if (!advanced || advanced->status != 200) fail("advance_game failed");
  {
    std::lock_guard lock(phase_mutex);
    phase2_released = true;
  }
  phase_cv.notify_all();
  for (auto& t : threads) t.join();

  // Give straggling event deliveries a moment, then disconnect everyone.
  if (profile.advance_mode == game::AdvanceMode::professor_triggered) {
    for (auto& s : students) {
      if (!s->events) continue;
      std::unique_lock lock(s->mutex);
      s->cv.wait_until(lock, std::min(deadline, Clock::now() + 2s), [&] { return s->phase_advanced > 0; });
    }
  }

  auto monitor = professor.send("GET", "/api/professor/games/" + report.game_id + "/monitor", prof_auth, "", deadline);
  if (monitor && monitor->status == 200) {
    const json m = json::parse(monitor->body);
    report.players_count = m.at("players_count").get<std::size_t>();
    report.diagrams_submitted = m.at("diagrams_submitted").get<std::size_t>();
    report.paths_submitted = m.at("paths_submitted").get<std::size_t>();
  } else {
    fail("monitor unavailable");
  }
  auto answers = professor.send("GET", "/api/professor/answers?game_id=" + report.game_id, prof_auth, "", deadline);
  if (answers && answers->status == 200) {
    const json body = json::parse(answers->body);
    for (const auto& a : body.at("answers")) {
      ++report.persisted_answers;
      if (a.at("complete").get<bool>()) ++report.complete_answers;
    }
  } else {
    fail("list_answers unavailable");
  }

  for (auto& s : students) {
    if (s->events) {
      s->events->stop();
      report.duplicate_events += s->events->duplicates();
      report.resyncs += s->events->resyncs();
    }
    report.joined += s->joined;
    report.diagrams_acknowledged += s->diagram_acked;
    report.paths_acknowledged += s->paths_acked;
    report.phase_advanced_seen.push_back(s->phase_advanced);
    for (auto& f : s->failures) report.failures.push_back(std::move(f));
  }
  dashboard.stop();
  report.resyncs += dashboard.resyncs();
  report.duplicate_events += dashboard.duplicates();
  report.professor_monitor_updates = monitor_updates;
  for (auto& f : monitor_failures) report.failures.push_back(std::move(f));

  // Self-checks: answer conservation and counter correctness.
  const std::size_t n = profile.students;
  const std::size_t expect_paths = n - report.dropped;
  auto expect = [&](const char* what, std::size_t got, std::size_t want) {
    if (got != want) fail(std::string(what) + ": expected " + std::to_string(want) + ", got " + std::to_string(got));
  };
  expect("joined", report.joined, n);
  expect("diagrams acknowledged", report.diagrams_acknowledged, n);
  expect("paths acknowledged", report.paths_acknowledged, expect_paths);
  expect("monitor players_count", report.players_count, n);
  expect("monitor diagrams_submitted", report.diagrams_submitted, n);
  expect("monitor paths_submitted", report.paths_submitted, expect_paths);
  expect("persisted answers", report.persisted_answers, n);
  expect("complete answers", report.complete_answers, expect_paths);
  if (profile.advance_mode == game::AdvanceMode::professor_triggered) {
    for (std::size_t i = 0; i < students.size(); ++i) {
      expect(("phase_advanced seen by " + students[i]->student_id).c_str(), report.phase_advanced_seen[i], 1);
    }
  }
  return report;
}

}  // namespace flowclass::gateway
