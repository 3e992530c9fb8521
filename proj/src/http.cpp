#include <boost/beast/core/detail/base64.hpp>
#include <httplib.h>

#include <atomic>
#include <json.hpp>
#include <thread>

#include "cmx/error.hpp"
#include "cmx/service.hpp"

namespace cmx {

using nlohmann::json;

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  namespace b64 = boost::beast::detail::base64;
  std::string out(b64::encoded_size(bytes.size()), '\0');
  out.resize(b64::encode(out.data(), bytes.data(), bytes.size()));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  namespace b64 = boost::beast::detail::base64;
  if (text.size() % 4 != 0) throw Error(ErrorCode::kInvalidInput, "malformed base64");
  std::vector<std::uint8_t> out(b64::decoded_size(text.size()));
  std::size_t unpadded = text.size();
  for (int i = 0; i < 2 && unpadded > 0 && text[unpadded - 1] == '='; ++i) --unpadded;
  const auto [written, read] = b64::decode(out.data(), text.data(), text.size());
  if (read != unpadded) throw Error(ErrorCode::kInvalidInput, "malformed base64");
  out.resize(written);
  return out;
}

namespace {

bool is_plain_ascii(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x80 && (u >= 0x20 || c == '\n' || c == '\t' || c == '\r');
  });
}

// {"<key>": text} for printable ASCII, else base64 with "<key>Encoding".
void put_text(json& j, const std::string& key, const std::string& s) {
  if (is_plain_ascii(s)) {
    j[key] = s;
  } else {
    j[key] = base64_encode({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
    j[key + "Encoding"] = "base64";
  }
}

json score_json(const RpsScore& s) {
  return {{"wins", s.wins}, {"losses", s.losses}, {"draws", s.draws}, {"rounds", s.rounds()}};
}

json info_json(const SessionInfo& i) {
  json j{{"id", i.id},
         {"mode", to_string(i.mode)},
         {"trainedOn", i.trained_on},
         {"score", score_json(i.score)},
         {"humanMoves", i.human_moves},
         {"aiMoves", i.ai_moves},
         {"stateDigest", std::to_string(i.state_digest)}};
  put_text(j, "text", i.text);
  return j;
}

int http_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kInvalidInput: return 400;
    default: return 500;
  }
}

void send_json(httplib::Response& res, const json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(), "application/json; charset=utf-8");
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_json(res, {{"error", e.what()}, {"code", to_string(e.code())}}, http_status(e.code()));
    } catch (const json::exception& e) {
      send_json(res, {{"error", e.what()}, {"code", "InvalidInput"}}, 400);
    }
  };
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body);
  if (!j.is_object()) throw Error(ErrorCode::kInvalidInput, "request body must be a JSON object");
  return j;
}

std::vector<std::uint8_t> text_field(const json& body) {
  const bool b64 = body.value("encoding", "") == "base64";
  std::string raw;
  if (body.contains("byte")) raw = body.at("byte").get<std::string>();
  else if (body.contains("text")) raw = body.at("text").get<std::string>();
  else throw Error(ErrorCode::kInvalidInput, "expected 'byte' or 'text'");
  if (b64) return base64_decode(raw);
  return {raw.begin(), raw.end()};
}

}  // namespace

void register_routes(httplib::Server& server, SessionManager& manager) {
  server.Get("/corpora", guarded([&](const httplib::Request&, httplib::Response& res) {
               send_json(res, manager.list_corpora());
             }));

  server.Post("/session", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                const SessionMode mode = parse_mode(body.value("mode", "text"));
                const auto corpora = body.value("corpora", std::vector<std::string>{});
                send_json(res, {{"id", manager.create_session(mode, corpora)}}, 201);
              }));

  server.Get(R"(/session/([0-9a-f]+))", guarded([&](const httplib::Request& req, httplib::Response& res) {
               send_json(res, info_json(manager.info(req.matches[1])));
             }));

  server.Delete(R"(/session/([0-9a-f]+))", guarded([&](const httplib::Request& req, httplib::Response& res) {
                  if (!manager.delete_session(req.matches[1])) {
                    throw Error(ErrorCode::kNotFound, "unknown session: " + std::string(req.matches[1]));
                  }
                  send_json(res, {{"deleted", std::string(req.matches[1])}});
                }));

  server.Post(R"(/session/([0-9a-f]+)/text)", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                const auto bytes = text_field(body);
                std::optional<int> n;
                if (body.contains("n")) n = body.at("n").get<int>();
                json out;
                put_text(out, "prediction", manager.feed_text(req.matches[1], bytes, n));
                send_json(res, out);
              }));

  server.Post(R"(/session/([0-9a-f]+)/rps)", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                const auto move = body.at("move").get<std::string>();
                if (move.size() != 1) throw Error(ErrorCode::kInvalidInput, "move must be one of r, p, s");
                const RpsRound r = manager.rps_move(req.matches[1], move[0]);
                send_json(res, {{"aiMove", std::string(1, r.ai_move)},
                                {"humanMove", std::string(1, r.human_move)},
                                {"outcome", r.outcome},
                                {"score", score_json(r.score)}});
              }));
}

void run_server(SessionManager& manager, const std::string& host, int port) {
  httplib::Server server;
  register_routes(server, manager);
  std::atomic<bool> stop{false};
  std::thread sweeper([&] {
    while (!stop) {
      for (int i = 0; i < 600 && !stop; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      manager.evict_idle();
    }
  });
  const bool ok = server.listen(host, port);
  stop = true;
  sweeper.join();
  if (!ok) throw Error(ErrorCode::kIo, "cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace cmx
