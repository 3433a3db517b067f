#include <csignal>
#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "flowclass/error.hpp"
#include "flowclass/game/service.hpp"
#include "flowclass/gateway/batch_grade.hpp"
#include "flowclass/gateway/server.hpp"
#include "flowclass/gateway/simulator.hpp"

using namespace flowclass;

namespace {

int serve(gateway::ServerConfig config) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  gateway::Server server(std::move(config));
  const auto& restored = server.restore_report();
  std::cerr << "restored " << restored.replayed << " log entries (last seq " << restored.last_sequence << ")";
  if (restored.truncation) std::cerr << ", truncated torn tail at line " << restored.truncation->line;
  std::cerr << "\n";
  const int port = server.start();
  std::cerr << "listening on port " << port << ", epoch " << server.epoch() << "\n";

  int sig = 0;
  sigwait(&signals, &sig);
  std::cerr << "shutting down\n";
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowclass: classroom flow-graph game server and tools"};
  app.require_subcommand(1);

  gateway::ServerConfig config;
  std::string web_root;
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP server");
  serve_cmd->add_option("--port", config.listen_port, "listen port (0 = ephemeral)")->capture_default_str();
  serve_cmd->add_option("--host", config.host, "bind address")->capture_default_str();
  serve_cmd->add_option("--data-dir", config.data_dir, "directory for log.jsonl and snapshot.json")->required();
  serve_cmd->add_option("--professor-secret", config.professor_secret, "professor credential")
      ->envname("FLOWCLASS_PROFESSOR_SECRET")
      ->required();
  serve_cmd->add_option("--max-body-bytes", config.max_body_bytes, "request body limit")->capture_default_str();
  serve_cmd->add_option("--snapshot-every", config.snapshot_every, "log entries between snapshots (0 = never)")
      ->capture_default_str();
  serve_cmd->add_option("--threads", config.worker_threads, "HTTP worker threads")->capture_default_str();
  serve_cmd->add_option("--web-root", web_root, "static files served at /");
  serve_cmd->add_flag("!--case-sensitive-codes", config.case_insensitive_codes, "match game codes exactly");

  std::string server_url = "http://127.0.0.1:8080";
  gateway::BehaviorProfile profile;
  std::string mode = "professor_triggered";
  long jitter_ms = profile.max_jitter.count();
  long timeout_s = profile.timeout.count();
  auto* sim_cmd = app.add_subcommand("simulate", "play one game with virtual students against a server");
  sim_cmd->add_option("--server", server_url, "server base URL")->capture_default_str();
  sim_cmd->add_option("--students", profile.students, "number of virtual students")->capture_default_str();
  sim_cmd->add_option("--professor-secret", profile.professor_secret, "professor credential")
      ->envname("FLOWCLASS_PROFESSOR_SECRET")
      ->required();
  sim_cmd->add_option("--drop-fraction", profile.drop_after_phase1, "fraction that quits after phase 1")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sim_cmd->add_option("--seed", profile.seed, "random seed")->capture_default_str();
  sim_cmd->add_option("--mode", mode, "advance mode")
      ->check(CLI::IsMember({"professor_triggered", "individual"}))
      ->capture_default_str();
  sim_cmd->add_option("--jitter-ms", jitter_ms, "maximum think time per action")->capture_default_str();
  sim_cmd->add_option("--timeout", timeout_s, "overall deadline in seconds")->capture_default_str();
  sim_cmd->add_option("--code", profile.code, "game code (random when omitted)");

  std::string answers_dir, reference_file;
  auto* grade_cmd = app.add_subcommand("grade", "grade a directory of answer files offline");
  grade_cmd->add_option("--answers", answers_dir, "directory of *.json answers")->required()->check(CLI::ExistingDirectory);
  grade_cmd->add_option("--reference", reference_file, "reference diagram document")->required()->check(CLI::ExistingFile);

  std::size_t code_length = 6;
  auto* code_cmd = app.add_subcommand("gen-code", "print a random game code");
  code_cmd->add_option("--length", code_length, "code length")
      ->check(CLI::Range(game::kMinCodeLength, game::kMaxCodeLength))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : 2;
  }

  try {
    if (*serve_cmd) {
      if (!web_root.empty()) config.web_root = web_root;
      return serve(std::move(config));
    }
    if (*sim_cmd) {
      profile.advance_mode = game::parse_advance_mode(mode);
      profile.max_jitter = std::chrono::milliseconds(jitter_ms);
      profile.timeout = std::chrono::seconds(timeout_s);
      const auto report = gateway::simulate_classroom(server_url, profile);
      std::cout << report.to_json().dump(2) << "\n";
      return report.ok() ? 0 : 1;
    }
    if (*grade_cmd) {
      const auto result = gateway::batch_grade(answers_dir, reference_file);
      std::cout << result.dump(2) << "\n";
      return result.at("failures").empty() ? 0 : 1;
    }
    if (*code_cmd) {
      std::cout << game::generate_code(code_length) << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
