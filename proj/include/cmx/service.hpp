#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cmx/config.hpp"
#include "cmx/engine.hpp"

namespace httplib {
class Server;
}

namespace cmx {

enum class SessionMode { kText, kRps };

SessionMode parse_mode(std::string_view s);
const char* to_string(SessionMode m);

// Round tallies from the AI's point of view.
struct RpsScore {
  int wins = 0;
  int losses = 0;
  int draws = 0;

  int rounds() const { return wins + losses + draws; }
  friend bool operator==(const RpsScore&, const RpsScore&) = default;
};

struct RpsRound {
  char ai_move = 'r';
  char human_move = 'r';
  int outcome = 0;  // +1 AI won, -1 AI lost, 0 draw
  RpsScore score;
};

// Move that beats `m` ('r' -> 'p', 'p' -> 's', 's' -> 'r').
char beats(char m);
// +1 if a beats b, -1 if b beats a, 0 otherwise.
int rps_outcome(char a, char b);

// The move the AI commits to given the opponent's history so far: the move
// that beats the opponent's most likely next move under `p`. Ties between
// r, p and s resolve in that order.
char rps_choose(const Predictor& p);

struct SessionInfo {
  std::string id;
  SessionMode mode = SessionMode::kText;
  std::vector<std::string> trained_on;
  RpsScore score;
  std::string text;         // bytes fed in text mode
  std::string human_moves;  // rps mode
  std::string ai_moves;     // rps mode
  std::uint64_t state_digest = 0;
};

struct ServiceOptions {
  std::filesystem::path corpus_dir = ".";
  std::chrono::seconds idle_timeout{15 * 60};
  int default_prediction_length = 40;
  int max_prediction_length = 200;
  Config config = Config::for_level(2);
};

// Sessions of adaptive predictors. Requests to one session are serialized
// by a per-session mutex; different sessions proceed concurrently.
class SessionManager {
 public:
  using Clock = std::chrono::steady_clock;

  explicit SessionManager(ServiceOptions options = {});

  // Corpus files (regular files directly under corpus_dir), sorted.
  std::vector<std::string> list_corpora() const;

  // Throws Error(kNotFound) for an unknown corpus; no session is created then.
  std::string create_session(SessionMode mode, const std::vector<std::string>& corpora);

  // Feeds `bytes` (text mode) and returns the greedy continuation of length
  // n (default from options, capped at the maximum), computed on a scratch
  // copy. Throws Error(kNotFound) / Error(kInvalidInput).
  std::string feed_text(const std::string& id, std::span<const std::uint8_t> bytes, std::optional<int> n = {});

  // Reveals the AI move committed before this call, then ingests the human
  // move, scores the round and commits the next AI move.
  RpsRound rps_move(const std::string& id, char human_move);

  SessionInfo info(const std::string& id) const;
  bool delete_session(const std::string& id);

  // Removes sessions idle since before now - idle_timeout; returns how many.
  std::size_t evict_idle(Clock::time_point now = Clock::now());
  std::size_t session_count() const;

  const ServiceOptions& options() const { return options_; }

 private:
  struct Session {
    Session(SessionMode m, Predictor p) : mode(m), predictor(std::move(p)) {}

    std::mutex mu;
    SessionMode mode;
    std::vector<std::string> trained_on;
    Predictor predictor;
    RpsScore score;
    std::string text;
    std::string human_moves;
    std::string ai_moves;
    char committed = 'r';
    Clock::time_point last_used;
  };

  std::shared_ptr<Session> find(const std::string& id) const;
  std::string new_id();

  ServiceOptions options_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mt19937_64 rng_;
};

// JSON-over-HTTP routes:
//   POST /session {mode, corpora} -> {id}
//   GET /session/{id} -> session state
//   POST /session/{id}/text {byte | text, encoding?, n?} -> {prediction, encoding}
//   POST /session/{id}/rps {move} -> {aiMove, humanMove, outcome, score}
//   DELETE /session/{id}
//   GET /corpora -> [names]
// Non-ASCII text travels base64-encoded with "encoding": "base64".
void register_routes(httplib::Server& server, SessionManager& manager);

// Blocks serving on host:port; evicts idle sessions once a minute.
void run_server(SessionManager& manager, const std::string& host, int port);

std::string base64_encode(std::span<const std::uint8_t> bytes);
// Throws Error(kInvalidInput) on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace cmx
