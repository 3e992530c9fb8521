#include "cmx/service.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "cmx/error.hpp"
#include "cmx/image.hpp"

namespace cmx {

SessionMode parse_mode(std::string_view s) {
  if (s == "text") return SessionMode::kText;
  if (s == "rps") return SessionMode::kRps;
  throw Error(ErrorCode::kInvalidInput, "mode must be 'text' or 'rps'");
}

const char* to_string(SessionMode m) { return m == SessionMode::kText ? "text" : "rps"; }

char beats(char m) {
  switch (m) {
    case 'r': return 'p';
    case 'p': return 's';
    case 's': return 'r';
  }
  throw Error(ErrorCode::kInvalidInput, std::string("invalid move '") + m + "'");
}

int rps_outcome(char a, char b) {
  if (a == b) return 0;
  return beats(b) == a ? 1 : -1;
}

char rps_choose(const Predictor& p) {
  char likely = 'r';
  double best = -1.0;
  for (char m : {'r', 'p', 's'}) {
    const double q = p.byte_probability(static_cast<std::uint8_t>(m));
    if (q > best) {
      best = q;
      likely = m;
    }
  }
  return beats(likely);
}

SessionManager::SessionManager(ServiceOptions options) : options_(std::move(options)), rng_(std::random_device{}()) {}

std::vector<std::string> SessionManager::list_corpora() const {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(options_.corpus_dir, ec)) {
    if (e.is_regular_file()) names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::string SessionManager::new_id() {
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng_()),
                static_cast<unsigned long long>(rng_()));
  return buf;
}

std::string SessionManager::create_session(SessionMode mode, const std::vector<std::string>& corpora) {
  const auto available = list_corpora();
  for (const auto& name : corpora) {
    if (!std::binary_search(available.begin(), available.end(), name)) {
      throw Error(ErrorCode::kNotFound, "unknown corpus: " + name);
    }
  }
  auto s = std::make_shared<Session>(mode, Predictor(options_.config));
  s->trained_on = corpora;
  for (const auto& name : corpora) s->predictor.train(read_file(options_.corpus_dir / name));
  if (mode == SessionMode::kRps) s->committed = rps_choose(s->predictor);
  s->last_used = Clock::now();

  std::lock_guard lock(mu_);
  std::string id = new_id();
  while (sessions_.count(id)) id = new_id();
  sessions_.emplace(id, std::move(s));
  return id;
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "unknown session: " + id);
  return it->second;
}

std::string SessionManager::feed_text(const std::string& id, std::span<const std::uint8_t> bytes,
                                      std::optional<int> n) {
  const int len = std::clamp(n.value_or(options_.default_prediction_length), 0, options_.max_prediction_length);
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (s->mode != SessionMode::kText) throw Error(ErrorCode::kInvalidInput, "session is not in text mode");
  s->last_used = Clock::now();
  for (auto b : bytes) {
    s->predictor.update_byte(b);
    s->text.push_back(static_cast<char>(b));
  }
  return s->predictor.predict_next_chars(len);
}

RpsRound SessionManager::rps_move(const std::string& id, char human_move) {
  if (human_move != 'r' && human_move != 'p' && human_move != 's') {
    throw Error(ErrorCode::kInvalidInput, std::string("invalid move '") + human_move + "'");
  }
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (s->mode != SessionMode::kRps) throw Error(ErrorCode::kInvalidInput, "session is not in rps mode");
  s->last_used = Clock::now();
  RpsRound round;
  round.ai_move = s->committed;
  round.human_move = human_move;
  round.outcome = rps_outcome(round.ai_move, human_move);
  if (round.outcome > 0) ++s->score.wins;
  else if (round.outcome < 0) ++s->score.losses;
  else ++s->score.draws;
  round.score = s->score;
  s->human_moves.push_back(human_move);
  s->ai_moves.push_back(round.ai_move);
  s->predictor.update_byte(static_cast<std::uint8_t>(human_move));
  s->committed = rps_choose(s->predictor);
  return round;
}

SessionInfo SessionManager::info(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  SessionInfo out;
  out.id = id;
  out.mode = s->mode;
  out.trained_on = s->trained_on;
  out.score = s->score;
  out.text = s->text;
  out.human_moves = s->human_moves;
  out.ai_moves = s->ai_moves;
  out.state_digest = s->predictor.state_digest();
  return out;
}

bool SessionManager::delete_session(const std::string& id) {
  std::lock_guard lock(mu_);
  return sessions_.erase(id) > 0;
}

std::size_t SessionManager::evict_idle(Clock::time_point now) {
  std::lock_guard lock(mu_);
  std::size_t removed = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    bool idle = false;
    {
      std::unique_lock session_lock(it->second->mu, std::try_to_lock);
      idle = session_lock.owns_lock() && now - it->second->last_used > options_.idle_timeout;
    }
    if (idle) {
      it = sessions_.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  return removed;
}

std::size_t SessionManager::session_count() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

}  // namespace cmx
