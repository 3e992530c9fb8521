#include <doctest.h>
#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <thread>

#include "cmx/error.hpp"
#include "cmx/service.hpp"

using namespace cmx;
using nlohmann::json;

namespace {

const std::string kByron = "My name is Byron Knoll. ";

std::filesystem::path make_corpus_dir() {
  auto dir = std::filesystem::temp_directory_path() / ("cmx_service_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "byron.txt") << kByron << kByron << kByron;
  std::ofstream(dir / "digits.txt") << "0123456789012345678901234567890123456789";
  return dir;
}

ServiceOptions test_options() {
  ServiceOptions o;
  o.corpus_dir = make_corpus_dir();
  o.config = Config::for_level(0);
  return o;
}

std::span<const std::uint8_t> bytes_of(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace

TEST_CASE("rps rules") {
  CHECK(beats('r') == 'p');
  CHECK(beats('p') == 's');
  CHECK(beats('s') == 'r');
  CHECK(rps_outcome('p', 'r') == 1);
  CHECK(rps_outcome('r', 'p') == -1);
  CHECK(rps_outcome('s', 's') == 0);
  CHECK(parse_mode("rps") == SessionMode::kRps);
  CHECK(std::string(to_string(SessionMode::kText)) == "text");
  CHECK_THROWS_AS(parse_mode("chess"), Error);
}

TEST_CASE("corpora listing and unknown corpus") {
  SessionManager m(test_options());
  CHECK(m.list_corpora() == std::vector<std::string>{"byron.txt", "digits.txt"});
  CHECK_THROWS_AS(m.create_session(SessionMode::kText, {"nope.txt"}), Error);
  CHECK_THROWS_AS(m.create_session(SessionMode::kText, {"../etc/passwd"}), Error);
  CHECK(m.session_count() == 0);
}

TEST_CASE("trained session completes the name") {
  SessionManager m(test_options());
  const auto id = m.create_session(SessionMode::kText, {"byron.txt"});
  CHECK(m.info(id).trained_on == std::vector<std::string>{"byron.txt"});
  const std::string pred = m.feed_text(id, bytes_of("My name is B"), 12);
  CHECK(pred.size() == 12);
  CHECK(pred.rfind("yron", 0) == 0);
}

TEST_CASE("online learning picks up a new name the second time") {
  SessionManager m(test_options());
  const auto id = m.create_session(SessionMode::kText, {});
  const std::string first = m.feed_text(id, bytes_of("Hello Zanzibar Quixote. Hello Z"), 8);
  CHECK(first.rfind("anzibar", 0) == 0);
  const auto other = m.create_session(SessionMode::kText, {});
  CHECK(m.feed_text(other, bytes_of("Hello Z"), 8).rfind("anzibar", 0) != 0);
}

TEST_CASE("prediction length is clamped and predictions do not touch state") {
  SessionManager m(test_options());
  const auto a = m.create_session(SessionMode::kText, {"digits.txt"});
  const auto b = m.create_session(SessionMode::kText, {"digits.txt"});
  CHECK(m.feed_text(a, bytes_of("0"), 1000).size() == 200);
  CHECK(m.feed_text(a, bytes_of("1"), -5).empty());
  m.feed_text(b, bytes_of("0"), 0);
  m.feed_text(b, bytes_of("1"), 0);
  CHECK(m.info(a).state_digest == m.info(b).state_digest);
  CHECK(m.info(a).text == "01");
}

TEST_CASE("interleaved sessions match serial runs") {
  SessionManager m(test_options());
  const auto a = m.create_session(SessionMode::kText, {"byron.txt"});
  const auto b = m.create_session(SessionMode::kText, {});
  std::vector<std::string> pa, pb;
  const std::string ta = "My name is B", tb = "abcabcabcab";
  for (std::size_t i = 0; i < ta.size(); ++i) {
    pa.push_back(m.feed_text(a, bytes_of(ta.substr(i, 1)), 5));
    pb.push_back(m.feed_text(b, bytes_of(tb.substr(i % tb.size(), 1)), 5));
  }
  SessionManager solo(test_options());
  const auto sa = solo.create_session(SessionMode::kText, {"byron.txt"});
  for (std::size_t i = 0; i < ta.size(); ++i) CHECK(solo.feed_text(sa, bytes_of(ta.substr(i, 1)), 5) == pa[i]);
  const auto sb = solo.create_session(SessionMode::kText, {});
  for (std::size_t i = 0; i < ta.size(); ++i) {
    CHECK(solo.feed_text(sb, bytes_of(tb.substr(i % tb.size(), 1)), 5) == pb[i]);
  }
}

TEST_CASE("concurrent requests on separate sessions") {
  SessionManager m(test_options());
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) ids.push_back(m.create_session(SessionMode::kRps, {}));
  std::vector<std::thread> threads;
  for (const auto& id : ids) {
    threads.emplace_back([&m, id] {
      for (int r = 0; r < 30; ++r) m.rps_move(id, 'r');
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& id : ids) {
    CHECK(m.info(id).score.rounds() == 30);
    CHECK(m.info(id).score == m.info(ids[0]).score);
  }
}

TEST_CASE("rock spam is answered with paper after warm-up") {
  SessionManager m(test_options());
  const auto id = m.create_session(SessionMode::kRps, {});
  RpsRound last;
  for (int r = 1; r <= 40; ++r) {
    last = m.rps_move(id, 'r');
    if (r > 10) CHECK(last.ai_move == 'p');
  }
  CHECK(last.score.wins >= 30);
  CHECK(m.info(id).human_moves == std::string(40, 'r'));
}

TEST_CASE("alternating opponent is beaten most of the time") {
  SessionManager m(test_options());
  const auto id = m.create_session(SessionMode::kRps, {});
  int wins = 0;
  for (int r = 0; r < 40; ++r) {
    const auto round = m.rps_move(id, r % 2 ? 's' : 'r');
    if (r >= 20) wins += round.outcome > 0;
  }
  CHECK(wins > 16);
}

TEST_CASE("mode mismatch, bad moves, deletion and eviction") {
  ServiceOptions o = test_options();
  o.idle_timeout = std::chrono::seconds(60);
  SessionManager m(o);
  const auto t = m.create_session(SessionMode::kText, {});
  const auto r = m.create_session(SessionMode::kRps, {});
  CHECK_THROWS_AS(m.rps_move(t, 'r'), Error);
  CHECK_THROWS_AS(m.feed_text(r, bytes_of("x")), Error);
  CHECK_THROWS_AS(m.rps_move(r, 'x'), Error);
  CHECK_THROWS_AS(m.info("deadbeef"), Error);
  CHECK(m.delete_session(t));
  CHECK_FALSE(m.delete_session(t));
  CHECK(m.evict_idle(SessionManager::Clock::now()) == 0);
  CHECK(m.evict_idle(SessionManager::Clock::now() + std::chrono::seconds(61)) == 1);
  CHECK(m.session_count() == 0);
  CHECK(ServiceOptions{}.idle_timeout == std::chrono::minutes(15));
}

TEST_CASE("base64 helpers") {
  const std::string s("\xff\x00text\x80", 7);
  const auto raw = bytes_of(s);
  const auto enc = base64_encode(raw);
  CHECK(enc == "/wB0ZXh0gA==");
  const auto dec = base64_decode(enc);
  CHECK(std::equal(dec.begin(), dec.end(), raw.begin(), raw.end()));
  CHECK_THROWS_AS(base64_decode("abc"), Error);
  CHECK_THROWS_AS(base64_decode("ab!="), Error);
}

TEST_CASE("HTTP interface") {
  SessionManager m(test_options());
  httplib::Server server;
  register_routes(server, m);
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client c("127.0.0.1", port);

  auto res = c.Get("/corpora");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body) == json::array({"byron.txt", "digits.txt"}));

  res = c.Post("/session", R"({"mode":"text","corpora":["byron.txt"]})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 201);
  const std::string id = json::parse(res->body).at("id");

  res = c.Post("/session/" + id + "/text", R"({"byte":"My name is B","n":10})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body).at("prediction").get<std::string>().rfind("yron", 0) == 0);

  // Non-ASCII bytes go in and come back base64.
  const std::string accented = "\xc3\xa9\xff";
  const json bin{{"byte", base64_encode(bytes_of(accented))}, {"encoding", "base64"}, {"n", 3}};
  res = c.Post("/session/" + id + "/text", bin.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  res = c.Get("/session/" + id);
  REQUIRE(res);
  const json state = json::parse(res->body);
  CHECK(state.at("textEncoding") == "base64");
  const auto text = base64_decode(state.at("text").get<std::string>());
  CHECK(std::string(text.begin(), text.end()) == "My name is B\xc3\xa9\xff");

  res = c.Post("/session", R"({"mode":"rps"})", "application/json");
  const std::string rid = json::parse(res->body).at("id");
  res = c.Post("/session/" + rid + "/rps", R"({"move":"r"})", "application/json");
  REQUIRE(res);
  const json round = json::parse(res->body);
  CHECK(round.at("humanMove") == "r");
  CHECK(round.at("score").at("rounds") == 1);

  res = c.Post("/session/" + rid + "/rps", R"({"move":"lizard"})", "application/json");
  CHECK(res->status == 400);
  res = c.Post("/session/" + rid + "/rps", "not json", "application/json");
  CHECK(res->status == 400);
  res = c.Post("/session", R"({"mode":"text","corpora":["missing"]})", "application/json");
  CHECK(res->status == 404);
  res = c.Get("/session/0123");
  CHECK(res->status == 404);

  res = c.Delete("/session/" + rid);
  CHECK(res->status == 200);
  res = c.Delete("/session/" + rid);
  CHECK(res->status == 404);

  server.stop();
  t.join();
}
