#pragma once

// Reference model of the game lifecycle, written from the rules alone, and a
// fuzz driver that runs random operation sequences against GameService and
// the model side by side.

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "flowclass/game/service.hpp"
#include "support/support.hpp"

namespace testing {

namespace fc = flowclass;
using fc::ErrorCode;

struct FuzzStats {
  std::size_t sequences = 0;
  std::size_t operations = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::vector<std::string> violations;
};

class LifecycleModel {
 public:
  enum class GPhase { created, phase1_open, phase2_open, closed };
  enum class SPhase { phase1, waiting, phase2, done };

  struct MGame {
    std::string id;
    int number = 0;
    std::string code;
    bool individual = false;
    GPhase phase = GPhase::created;
  };
  struct MSession {
    std::string token;
    std::string student;
    std::size_t game = 0;
    SPhase phase = SPhase::phase1;
    bool diagram = false;
  };
  struct MAnswer {
    std::string id;
    std::string student;
    std::size_t game = 0;
    bool has_diagram = false;
    bool has_paths = false;
    bool resubmitted = false;
    bool diagram_missing = false;
  };

  std::vector<MGame> games;
  std::vector<MSession> sessions;
  std::vector<MAnswer> answers;
  int next_token = 1;
  int next_answer = 1;

  static bool same_code(const std::string& a, const std::string& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::toupper(static_cast<unsigned char>(a[i])) != std::toupper(static_cast<unsigned char>(b[i]))) {
        return false;
      }
    }
    return true;
  }

  MGame* game(const std::string& id) {
    for (auto& g : games) {
      if (g.id == id) return &g;
    }
    return nullptr;
  }
  MSession* session(const std::string& token) {
    for (auto& s : sessions) {
      if (s.token == token) return &s;
    }
    return nullptr;
  }
  MAnswer* answer_of(const MSession& s) {
    for (auto& a : answers) {
      if (a.student == s.student && a.game == s.game) return &a;
    }
    return nullptr;
  }
  MAnswer& ensure_answer(const MSession& s) {
    if (MAnswer* a = answer_of(s)) return *a;
    answers.push_back({"a" + std::to_string(next_answer++), s.student, s.game});
    return answers.back();
  }
};

namespace lifecycle_detail {

inline std::string_view name(LifecycleModel::SPhase p) {
  switch (p) {
    case LifecycleModel::SPhase::phase1: return "phase1";
    case LifecycleModel::SPhase::waiting: return "waiting";
    case LifecycleModel::SPhase::phase2: return "phase2";
    case LifecycleModel::SPhase::done: return "done";
  }
  return "?";
}

inline std::string_view name(LifecycleModel::GPhase p) {
  switch (p) {
    case LifecycleModel::GPhase::created: return "created";
    case LifecycleModel::GPhase::phase1_open: return "phase1_open";
    case LifecycleModel::GPhase::phase2_open: return "phase2_open";
    case LifecycleModel::GPhase::closed: return "closed";
  }
  return "?";
}

// CC 2: 1->2, 2->3, 1->3 with basis 1-2-3, 1-3.
inline Diagram small_reference() { return diagram_from_edges(3, {{1, 2}, {2, 3}, {1, 3}}, 2); }

inline Diagram random_small_diagram(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nodes(1, 4), coin(0, 1);
  const int n = nodes(rng);
  std::vector<std::pair<int, int>> edges;
  for (int a = 1; a <= n; ++a) {
    for (int b = 1; b <= n; ++b) {
      if (coin(rng) && coin(rng)) edges.emplace_back(a, b);
    }
  }
  return diagram_from_edges(n, edges, coin(rng) + coin(rng));
}

inline std::vector<NodePath> random_paths(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(0, 3), len(2, 4), node(1, 4);
  std::vector<NodePath> out;
  for (int i = count(rng); i > 0; --i) {
    std::vector<int> p;
    for (int k = len(rng); k > 0; --k) p.push_back(node(rng));
    out.emplace_back(std::move(p));
  }
  return out;
}

}  // namespace lifecycle_detail

/// Runs `sequences` random sequences of up to `max_length` operations.
inline FuzzStats run_lifecycle_fuzz(std::uint64_t seed, std::size_t sequences, std::size_t max_length) {
  using namespace lifecycle_detail;
  using Model = LifecycleModel;
  using fc::game::AdvanceMode;
  using fc::game::GameService;
  using fc::game::SessionPhase;

  FuzzStats stats;
  const std::vector<std::string> codes = {"QX7R2M", "qx7r2m", "PLAY", "ABC", "ZZZZ"};
  const std::vector<std::string> students = {"236138", "236139", "236140", "", std::string(40, '9')};
  const Diagram reference = small_reference();
  const std::vector<NodePath> basis = {NodePath{1, 2, 3}, NodePath{1, 3}};

  for (std::size_t seq_no = 0; seq_no < sequences; ++seq_no) {
    ++stats.sequences;
    std::mt19937_64 rng(seed * 7919 + seq_no);
    auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
    std::vector<nlohmann::json> journal;
    GameService service({}, stepping_clock(), counting_tokens());
    service.set_journal([&](const nlohmann::json& m) { journal.push_back(m); });
    Model model;
    std::map<std::string, fc::game::MonitorSnapshot> last_counters;
    std::map<std::string, int> last_session_rank;

    auto violation = [&](const std::string& what) {
      if (stats.violations.size() < 20) {
        stats.violations.push_back("sequence " + std::to_string(seq_no) + ": " + what);
      }
    };

    const std::size_t length = 1 + pick(max_length);
    for (std::size_t step = 0; step < length; ++step) {
      ++stats.operations;
      std::optional<ErrorCode> expected;  // rejection predicted by the model
      std::function<void()> run;          // the service call
      std::function<void()> on_accept;    // model update
      std::string label;

      auto game_id_choice = [&]() -> std::string {
        if (model.games.empty() || pick(8) == 0) return "g" + std::to_string(model.games.size() + 1 + pick(2));
        return model.games[pick(model.games.size())].id;
      };
      auto token_choice = [&]() -> std::string {
        if (model.sessions.empty() || pick(10) == 0) return "tok-bogus";
        return model.sessions[pick(model.sessions.size())].token;
      };

      switch (pick(10)) {
        case 0: {  // create_game
          const int variant = static_cast<int>(pick(6));
          std::string code = codes[pick(codes.size())];
          std::vector<NodePath> paths = basis;
          if (variant == 1) paths.push_back(NodePath{1, 2});           // count exceeds CC
          if (variant == 2) paths[0] = NodePath{1, 3, 2};              // 3->2 missing
          const bool individual = pick(2) == 1;
          label = "create_game(" + code + ", variant " + std::to_string(variant) + ")";
          if (code.size() < 4) {
            expected = ErrorCode::invalid_argument;
          } else if (variant == 1 || variant == 2) {
            expected = ErrorCode::invalid_reference;
          }
          run = [&, code, paths, individual] {
            const auto ref = service.create_game(reference, paths, code,
                                                 individual ? AdvanceMode::individual : AdvanceMode::professor_triggered);
            if (ref.reference_cc != 2 || ref.game_number != static_cast<int>(model.games.size()) + 1) {
              violation("create_game returned unexpected ref");
            }
          };
          on_accept = [&, code, individual] {
            const int number = static_cast<int>(model.games.size()) + 1;
            model.games.push_back({"g" + std::to_string(number), number, code, individual});
          };
          break;
        }
        case 1:
        case 2: {  // open / advance / close
          const std::string id = game_id_choice();
          const int which = static_cast<int>(pick(3));
          const Model::GPhase from[] = {Model::GPhase::created, Model::GPhase::phase1_open, Model::GPhase::phase2_open};
          Model::MGame* g = model.game(id);
          label = std::string(which == 0 ? "open" : which == 1 ? "advance" : "close") + "(" + id + ")";
          if (!g) {
            expected = ErrorCode::not_found;
          } else if (g->phase != from[which]) {
            expected = ErrorCode::wrong_state;
          }
          run = [&, id, which] {
            if (which == 0) service.open_game(id);
            if (which == 1) service.advance_game(id);
            if (which == 2) service.close_game(id);
          };
          on_accept = [&, id, which] {
            Model::MGame* game = model.game(id);
            game->phase = static_cast<Model::GPhase>(which + 1);
            if (which == 1) {
              const auto index = static_cast<std::size_t>(game - model.games.data());
              for (auto& s : model.sessions) {
                if (s.game == index && (s.phase == Model::SPhase::phase1 || s.phase == Model::SPhase::waiting)) {
                  s.phase = Model::SPhase::phase2;
                }
              }
            }
          };
          break;
        }
        case 3:
        case 4: {  // join
          const std::string code = codes[pick(codes.size())];
          const std::string student = students[pick(students.size())];
          const int number = 1 + static_cast<int>(pick(model.games.size() + 1));
          label = "join(" + code + ", '" + student + "', " + std::to_string(number) + ")";
          Model::MGame* g = nullptr;
          for (auto& cand : model.games) {
            if (cand.number == number && Model::same_code(cand.code, code)) g = &cand;
          }
          const Model::MSession* existing = nullptr;
          if (!g) {
            expected = ErrorCode::access_denied;
          } else if (g->phase != Model::GPhase::phase1_open && g->phase != Model::GPhase::phase2_open) {
            expected = ErrorCode::unavailable;
          } else if (student.empty() || student.size() > 32) {
            expected = ErrorCode::invalid_argument;
          } else {
            const auto index = static_cast<std::size_t>(g - model.games.data());
            for (const auto& s : model.sessions) {
              if (s.game == index && s.student == student) existing = &s;
            }
          }
          const std::string resumed_token = existing ? existing->token : "";
          run = [&, code, student, number, resumed_token] {
            const auto before = resumed_token.empty() ? nlohmann::json() : service.snapshot();
            const auto r = service.join(code, student, number);
            if (!resumed_token.empty()) {
              if (!r.resumed || r.session_token != resumed_token) violation("rejoin did not resume");
              if (service.snapshot() != before) violation("rejoin changed state");
            } else if (r.resumed || r.session_token != "tok-" + std::to_string(model.next_token)) {
              violation("fresh join returned unexpected token");
            }
          };
          on_accept = [&, student, number, code, resumed_token] {
            if (!resumed_token.empty()) return;
            for (std::size_t i = 0; i < model.games.size(); ++i) {
              const auto& cand = model.games[i];
              if (cand.number != number || !Model::same_code(cand.code, code)) continue;
              const bool late = !cand.individual && cand.phase == Model::GPhase::phase2_open;
              model.sessions.push_back({"tok-" + std::to_string(model.next_token++), student, i,
                                        late ? Model::SPhase::phase2 : Model::SPhase::phase1});
            }
          };
          break;
        }
        case 5:
        case 6: {  // submit_diagram
          const std::string token = token_choice();
          Diagram d = random_small_diagram(rng);
          label = "submit_diagram(" + token + ")";
          Model::MSession* s = model.session(token);
          if (!s) {
            expected = ErrorCode::unauthorized;
          } else {
            const Model::MGame& g = model.games[s->game];
            if (g.phase == Model::GPhase::closed) {
              expected = ErrorCode::unavailable;
            } else if (s->phase != Model::SPhase::phase1 && s->phase != Model::SPhase::waiting) {
              expected = ErrorCode::order_violation;
            } else if (!g.individual && g.phase != Model::GPhase::phase1_open) {
              expected = ErrorCode::order_violation;
            }
          }
          run = [&, token, d] {
            const auto phase = service.submit_diagram(token, d);
            const Model::MSession* ms = model.session(token);
            const bool individual = model.games[ms->game].individual;
            if (phase != (individual ? SessionPhase::phase2 : SessionPhase::waiting)) {
              violation("submit_diagram returned wrong session phase");
            }
          };
          on_accept = [&, token] {
            Model::MSession* ms = model.session(token);
            Model::MAnswer& a = model.ensure_answer(*ms);
            if (a.has_diagram) a.resubmitted = true;
            a.has_diagram = true;
            ms->diagram = true;
            ms->phase = model.games[ms->game].individual ? Model::SPhase::phase2 : Model::SPhase::waiting;
          };
          break;
        }
        case 7: {  // submit_paths
          const std::string token = token_choice();
          auto paths = pick(4) == 0 ? basis : random_paths(rng);
          const bool malformed = pick(12) == 0;
          if (malformed) paths.push_back(NodePath{1});
          label = "submit_paths(" + token + ")";
          Model::MSession* s = model.session(token);
          if (!s) {
            expected = ErrorCode::unauthorized;
          } else if (model.games[s->game].phase == Model::GPhase::closed) {
            expected = ErrorCode::unavailable;
          } else if (s->phase != Model::SPhase::phase2) {
            expected = ErrorCode::order_violation;
          } else if (malformed) {
            expected = ErrorCode::malformed_path;
          }
          run = [&, token, paths] {
            if (service.submit_paths(token, paths) != SessionPhase::done) violation("submit_paths did not finish");
          };
          on_accept = [&, token] {
            Model::MSession* ms = model.session(token);
            Model::MAnswer& a = model.ensure_answer(*ms);
            a.has_paths = true;
            a.diagram_missing = !a.has_diagram;
            ms->phase = Model::SPhase::done;
          };
          break;
        }
        case 8: {  // delete_answer
          std::string id = "a" + std::to_string(1 + pick(model.next_answer + 1));
          label = "delete_answer(" + id + ")";
          const bool known = std::any_of(model.answers.begin(), model.answers.end(),
                                         [&](const Model::MAnswer& a) { return a.id == id; });
          if (!known) expected = ErrorCode::not_found;
          run = [&, id] { service.delete_answer(id); };
          on_accept = [&, id] {
            model.answers.erase(std::find_if(model.answers.begin(), model.answers.end(),
                                             [&](const Model::MAnswer& a) { return a.id == id; }));
          };
          break;
        }
        default: {  // reads: list_games and session_state
          const std::string code = codes[pick(codes.size())];
          label = "list_games(" + code + ")";
          run = [&, code] {
            const auto listed = service.list_games(code);
            std::vector<int> want;
            for (const auto& g : model.games) {
              const bool playable = g.phase == Model::GPhase::phase1_open || g.phase == Model::GPhase::phase2_open;
              if (playable && Model::same_code(g.code, code)) want.push_back(g.number);
            }
            std::vector<int> got;
            for (const auto& l : listed) got.push_back(l.game_number);
            if (got != want) violation("list_games disagrees with model");
            for (const auto& s : model.sessions) {
              const auto st = service.session_state(s.token);
              if (std::string(name(s.phase)) != fc::game::to_string(st.session_phase)) {
                violation("session_state disagrees with model for " + s.token);
              }
            }
          };
          on_accept = [] {};
          break;
        }
      }

      const nlohmann::json before = service.snapshot();
      std::optional<ErrorCode> actual;
      try {
        run();
      } catch (const fc::Error& e) {
        actual = e.code();
      }
      if (actual) {
        ++stats.rejected;
        if (!expected) {
          violation(label + " rejected with " + std::string(fc::to_string(*actual)) + " but the model accepts it");
        } else if (*expected != *actual) {
          violation(label + " rejected with " + std::string(fc::to_string(*actual)) + ", model expected " +
                    std::string(fc::to_string(*expected)));
        }
        if (service.snapshot() != before) violation(label + " was rejected but changed state");
      } else {
        ++stats.accepted;
        if (expected) {
          violation("illegal operation accepted: " + label + " (model expected " +
                    std::string(fc::to_string(*expected)) + ")");
          break;  // model and service have diverged
        }
        on_accept();
      }

      // Invariants after every step.
      const auto service_games = service.games();
      if (service_games.size() != model.games.size()) violation("game count diverged after " + label);
      for (std::size_t i = 0; i < model.games.size() && i < service_games.size(); ++i) {
        const auto& mg = model.games[i];
        if (fc::game::to_string(service_games[i].phase) != name(mg.phase)) {
          violation("phase of " + mg.id + " diverged after " + label);
        }
        const auto snap = service.monitor(mg.id);
        std::size_t players = 0, diagrams = 0, done = 0;
        for (const auto& s : model.sessions) {
          if (s.game != i) continue;
          ++players;
          diagrams += s.diagram;
          done += s.phase == Model::SPhase::done;
        }
        if (snap.players_count != players || snap.diagrams_submitted != diagrams || snap.paths_submitted != done) {
          violation("monitor counters for " + mg.id + " diverged after " + label);
        }
        if (snap.diagrams_submitted > snap.players_count || snap.paths_submitted > snap.players_count) {
          violation("monitor counters exceed players for " + mg.id);
        }
        auto& last = last_counters[mg.id];
        if (snap.players_count < last.players_count || snap.diagrams_submitted < last.diagrams_submitted ||
            snap.paths_submitted < last.paths_submitted) {
          violation("monitor counters decreased for " + mg.id + " after " + label);
        }
        last = snap;
      }
      for (const auto& s : model.sessions) {
        const int rank = static_cast<int>(service.session_state(s.token).session_phase);
        int& prev = last_session_rank[s.token];
        if (rank < prev) violation("session " + s.token + " moved backwards after " + label);
        prev = rank;
      }
      const auto listed = service.list_answers();
      if (listed.size() != model.answers.size()) {
        violation("answer count diverged after " + label);
      } else {
        for (std::size_t i = 0; i < listed.size(); ++i) {
          const auto& a = listed[i];
          const auto& m = model.answers[i];
          if (a.answer_id != m.id || a.student_id != m.student || a.complete() != m.has_paths ||
              a.diagram.has_value() != m.has_diagram || a.resubmitted != m.resubmitted ||
              a.diagram_missing != m.diagram_missing || a.complete() != a.analysis.has_value()) {
            violation("answer " + m.id + " diverged after " + label);
          }
        }
      }
      // Conservation: every finished session whose answer was not deleted
      // has exactly one complete answer.
      for (const auto& s : model.sessions) {
        if (s.phase != Model::SPhase::done) continue;
        const auto count = std::count_if(listed.begin(), listed.end(), [&](const auto& a) {
          return a.student_id == s.student && a.game_id == model.games[s.game].id && a.complete();
        });
        const bool deleted = model.answer_of(s) == nullptr;
        if (count != (deleted ? 0 : 1)) violation("answer conservation broken for " + s.token);
      }
    }

    // Replaying the journal reproduces the final state.
    GameService replica;
    for (const auto& m : journal) replica.apply(m);
    if (replica.snapshot() != service.snapshot()) violation("journal replay diverged");
  }
  return stats;
}

}  // namespace testing
