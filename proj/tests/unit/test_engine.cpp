#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "cmx/coder.hpp"
#include "cmx/engine.hpp"
#include "cmx/error.hpp"
#include "cmx/image.hpp"
#include "corpora.hpp"

using namespace cmx;
using testing::bytes_of;

namespace {

const Config kSmall = Config::for_level(0);

std::vector<std::uint8_t> vec(const std::string& s) { return {s.begin(), s.end()}; }

ErrorCode error_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("fresh predictor is close to one half") {
  Predictor p(kSmall);
  const double v = p.predict_bit().value();
  CHECK(v > 0.45);
  CHECK(v < 0.55);
}

TEST_CASE("alternating ab makes b nearly certain after a") {
  Predictor p;
  std::string s;
  for (int i = 0; i < 10000; ++i) s += "ab";
  p.train(bytes_of(s));
  p.update_byte('a');
  CHECK(p.byte_probability('b') > 0.99);
}

TEST_CASE("prediction streams are deterministic and replayable") {
  const std::string text = testing::mixed_corpus(20000, 3);
  auto run = [&] {
    Predictor p(kSmall);
    std::vector<std::uint32_t> ps;
    for (char c : text) {
      for (int i = 7; i >= 0; --i) {
        ps.push_back(p.predict_bit().raw());
        p.update_bit((static_cast<std::uint8_t>(c) >> i) & 1);
      }
    }
    return std::pair{ps, p.state_digest()};
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);

  Predictor replay(kSmall);
  replay.train(bytes_of(text));
  CHECK(replay.state_digest() == a.second);
}

TEST_CASE("cross entropy of a constant stream is tiny") {
  Predictor p;
  CHECK(p.cross_entropy_of(bytes_of(std::string(10000, 'a'))) < 0.05);
}

TEST_CASE("cross entropy of random bytes is close to eight bits") {
  Predictor p;
  const double ce = p.cross_entropy_of(testing::random_bytes(20000, 4));
  CHECK(ce >= 7.9);
  CHECK(ce <= 8.2);
}

TEST_CASE("empty input compresses to a header-only archive") {
  const auto a = compress({}, kSmall);
  CHECK(a.size() == Archive::kHeaderSize);
  const Archive parsed = Archive::parse(a);
  CHECK(parsed.original_length == 0);
  CHECK(parsed.payload.empty());
  CHECK(decompress(a, kSmall).empty());
}

TEST_CASE("header layout") {
  const auto a = compress(bytes_of(std::string("hello")), kSmall);
  CHECK(std::string(a.begin(), a.begin() + 4) == "CMX1");
  CHECK(a[4] == 1);
  CHECK(a[5] == 0);
  std::uint64_t digest = 0, length = 0;
  for (int i = 0; i < 8; ++i) digest |= static_cast<std::uint64_t>(a[6 + i]) << (8 * i);
  for (int i = 0; i < 8; ++i) length |= static_cast<std::uint64_t>(a[14 + i]) << (8 * i);
  CHECK(digest == kSmall.digest());
  CHECK(length == 5);
  Config ekf = kSmall;
  ekf.second_layer = SecondLayer::kEkf;
  CHECK(compress(bytes_of(std::string("hello")), ekf)[5] == Archive::kFlagEkf);
}

TEST_CASE("random strings roundtrip") {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 300; ++i) {
    const std::size_t n = static_cast<std::size_t>(std::exp2(std::uniform_real_distribution<double>(0, 12)(rng))) - 1;
    std::vector<std::uint8_t> x(n);
    const int alphabet = 1 + static_cast<int>(rng() % 256);
    for (auto& b : x) b = static_cast<std::uint8_t>(rng() % alphabet);
    REQUIRE(decompress(compress(x, kSmall), kSmall) == x);
  }
}

TEST_CASE("all single bytes roundtrip") {
  for (int b = 0; b < 256; ++b) {
    const std::vector<std::uint8_t> x{static_cast<std::uint8_t>(b)};
    REQUIRE(decompress(compress(x, kSmall), kSmall) == x);
  }
}

TEST_CASE("EKF output layer roundtrips and the level is recovered from the archive") {
  Config c = Config::for_level(1);
  c.second_layer = SecondLayer::kEkf;
  const auto x = vec(testing::mixed_corpus(30000, 12));
  const auto a = compress(x, c);
  CHECK(decompress(a, c) == x);
  CHECK(decompress(a) == x);
  CHECK(resolve_config(Archive::parse(a)) == c);
}

TEST_CASE("repository sources roundtrip") {
  int files = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(CMX_SOURCE_DIR "/src")) {
    if (!e.is_regular_file()) continue;
    const auto x = read_file(e.path());
    CHECK(decompress(compress(x, kSmall), kSmall) == x);
    ++files;
  }
  CHECK(files > 5);
}

TEST_CASE("encoder and decoder see bit-identical probabilities") {
  const auto x = vec(testing::mixed_corpus(20000, 8));
  Predictor enc_side(kSmall);
  Encoder enc;
  std::vector<std::uint32_t> enc_ps;
  for (auto b : x) {
    for (int i = 7; i >= 0; --i) {
      const Probability p = enc_side.predict_bit();
      enc_ps.push_back(p.raw());
      const int bit = (b >> i) & 1;
      enc.encode(bit, p);
      enc_side.update_bit(bit);
    }
  }
  const auto payload = enc.finish();
  Predictor dec_side(kSmall);
  Decoder dec(payload);
  std::size_t mismatches = 0;
  for (std::size_t t = 0; t < enc_ps.size(); ++t) {
    const Probability p = dec_side.predict_bit();
    mismatches += p.raw() != enc_ps[t];
    dec_side.update_bit(dec.decode(p));
  }
  CHECK(mismatches == 0);
  CHECK(dec_side.state_digest() == enc_side.state_digest());
}

TEST_CASE("random data does not shrink") {
  const auto x = testing::random_bytes(50000, 77);
  CHECK(compress(x, kSmall).size() + 16 >= x.size());
}

TEST_CASE("markov text beats the adaptive order-0 baseline by 20 percent") {
  const std::string text = testing::markov_text(100000, 7);
  const auto a = compress(bytes_of(text), Config{});
  const double engine_bits = static_cast<double>(a.size()) * 8.0;
  const double order0_bits = testing::order0_entropy(bytes_of(text)) * text.size();
  CHECK(engine_bits <= 0.8 * order0_bits);
  CHECK(decompress(a, Config{}) == vec(text));
}

TEST_CASE("cross entropy agrees with the coded payload size") {
  const std::string text = testing::markov_text(100000, 9);
  Predictor p(kSmall);
  const double ce = p.cross_entropy_of(bytes_of(text));
  const auto a = compress(bytes_of(text), kSmall);
  const double payload_bpb = Archive::parse(a).payload.size() * 8.0 / text.size();
  CHECK(std::abs(ce - payload_bpb) < 0.01);
}

TEST_CASE("cross entropy of empty input is an error") {
  Predictor p(kSmall);
  CHECK(error_of([&] { p.cross_entropy_of({}); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("damaged archives give distinct errors") {
  const auto good = compress(bytes_of(testing::markov_text(5000, 1)), kSmall);

  auto bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(error_of([&] { decompress(bad_magic, kSmall); }) == ErrorCode::kBadMagic);

  auto bad_version = good;
  bad_version[4] = 9;
  CHECK(error_of([&] { decompress(bad_version, kSmall); }) == ErrorCode::kVersionMismatch);

  const std::vector<std::uint8_t> short_header(good.begin(), good.begin() + 10);
  CHECK(error_of([&] { decompress(short_header, kSmall); }) == ErrorCode::kTruncated);

  const std::vector<std::uint8_t> short_payload(good.begin(), good.end() - 40);
  CHECK(error_of([&] { decompress(short_payload, kSmall); }) == ErrorCode::kTruncated);

  CHECK(error_of([&] { decompress(good, Config::for_level(1)); }) == ErrorCode::kConfigMismatch);
}

TEST_CASE("training on nothing is a no-op") {
  Predictor p(kSmall);
  p.train(bytes_of(std::string("abc")));
  const auto d = p.state_digest();
  p.train({});
  CHECK(p.state_digest() == d);
}

TEST_CASE("training on a source lowers cross entropy on fresh text from it") {
  const testing::MarkovSource src(testing::kLetters, 2, 31);
  const std::string train = src.generate(30000, 1);
  const std::string test = src.generate(3000, 2);
  Predictor fresh(kSmall);
  Predictor trained(kSmall);
  trained.train(bytes_of(train));
  CHECK(trained.cross_entropy_of(bytes_of(test)) < fresh.cross_entropy_of(bytes_of(test)) - 0.5);
}

TEST_CASE("snapshot restore is faithful and restores diverge independently") {
  Predictor p(kSmall);
  p.train(bytes_of(testing::mixed_corpus(20000, 5)));
  const Snapshot snap = p.snapshot();
  Predictor a = Predictor::restore(snap);
  Predictor b = Predictor::restore(snap);
  CHECK(a.state_digest() == p.state_digest());

  const std::string cont = testing::markov_text(2000, 44);
  std::vector<std::uint32_t> pa, pp;
  for (char c : cont) {
    for (int i = 7; i >= 0; --i) {
      const int bit = (static_cast<std::uint8_t>(c) >> i) & 1;
      pa.push_back(a.predict_bit().raw());
      pp.push_back(p.predict_bit().raw());
      a.update_bit(bit);
      p.update_bit(bit);
    }
  }
  CHECK(pa == pp);

  const auto b_before = b.state_digest();
  b.train(bytes_of(std::string("zzzz")));
  CHECK(b.state_digest() != b_before);
  CHECK(Predictor::restore(snap).state_digest() == b_before);
}

TEST_CASE("snapshot is smaller than twice the live footprint") {
  Predictor p;
  p.train(bytes_of(testing::markov_text(10000, 2)));
  CHECK(p.snapshot().bytes.size() < 2 * p.memory_bytes());
}

TEST_CASE("corrupt snapshots are rejected") {
  Predictor p(kSmall);
  Snapshot s = p.snapshot();
  Snapshot bad_version = s;
  bad_version.bytes[4] ^= 0x7F;
  CHECK(error_of([&] { Predictor::restore(bad_version); }) == ErrorCode::kVersionMismatch);
  Snapshot bad_magic = s;
  bad_magic.bytes[0] ^= 1;
  CHECK(error_of([&] { Predictor::restore(bad_magic); }) == ErrorCode::kBadMagic);
  Snapshot cut = s;
  cut.bytes.resize(cut.bytes.size() / 2);
  CHECK(error_of([&] { Predictor::restore(cut); }) == ErrorCode::kTruncated);
}

TEST_CASE("predicting the next characters completes a learned sentence") {
  Predictor p;
  p.train(bytes_of(std::string("My name is Byron Knoll. My name is Byron Knoll. ")));
  p.train(bytes_of(std::string("My name is B")));
  const auto digest = p.state_digest();
  const std::string next = p.predict_next_chars(4);
  CHECK(next == "yron");
  CHECK(p.state_digest() == digest);
  CHECK(p.predict_next_chars(4) == next);
  CHECK(p.predict_next_chars(1).size() == 1);
  CHECK(p.predict_next_chars(1)[0] == static_cast<char>(p.most_likely_byte()));
  CHECK(p.predict_next_chars(0).empty());
}

TEST_CASE("most likely byte is the argmax of byte probabilities") {
  Predictor p(kSmall);
  p.train(bytes_of(testing::markov_text(3000, 15)));
  double best = -1;
  int arg = -1;
  for (int b = 0; b < 256; ++b) {
    const double q = p.byte_probability(static_cast<std::uint8_t>(b));
    if (q > best) {
      best = q;
      arg = b;
    }
  }
  CHECK(p.most_likely_byte() == arg);
  double total = 0;
  for (int b = 0; b < 256; ++b) total += p.byte_probability(static_cast<std::uint8_t>(b));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("config text roundtrips and rejects unknown keys") {
  Config c = Config::for_level(3);
  c.second_layer = SecondLayer::kEkf;
  c.eta = 0.002;
  c.apm_enabled = false;
  CHECK(Config::parse(c.canonical()) == c);
  CHECK(Config::parse("# comment\n\nmixer.second_layer = ekf\n").second_layer == SecondLayer::kEkf);
  CHECK(error_of([] { Config::parse("nope=1"); }) == ErrorCode::kInvalidInput);
  Config d;
  d.ppm_order = 3;
  CHECK(d.digest() == Config{}.digest());
}
