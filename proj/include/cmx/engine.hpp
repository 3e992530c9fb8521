#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmx/apm.hpp"
#include "cmx/cmodels.hpp"
#include "cmx/config.hpp"
#include "cmx/mixer.hpp"
#include "cmx/probability.hpp"

namespace cmx {

// Serialized predictor state. Restoring yields a predictor whose future
// predictions are bit-identical to the original's.
struct Snapshot {
  static constexpr std::uint32_t kVersion = 1;
  std::vector<std::uint8_t> bytes;
};

// Context models -> gated two-layer mixer -> APM, predicting one bit at a
// time. The prediction for bit t depends only on bits 0..t-1 and the config.
//
// Per-bit update order: selected first-layer nodes, output layer (SGD or
// EKF), APM cells, context-model counters, then byte-level state (match
// model, context hashes, gate inputs) when a byte completes.
class Predictor {
 public:
  // Order-1,2,3,4,6,8 contexts plus the sparse {1,3} context.
  static constexpr int kContextModels = 7;
  // Context models, match model, bias.
  static constexpr int kInputs = kContextModels + 2;
  static constexpr double kBias = 0.5;
  // Output-layer weights are kept in units of 1/65536.
  static constexpr double kWeightUnit = 1.0 / 65536.0;
  // EKF observations are measured on a 12-bit probability scale.
  static constexpr double kEkfObservationScale = 4096.0;

  explicit Predictor(const Config& config = Config{});

  Probability predict_bit();
  void update_bit(int bit);

  // predict_bit/update_bit over the 8 bits of `byte`, MSB first.
  // Returns the code length of the byte in bits.
  double update_byte(std::uint8_t byte);

  // Updates state exactly as compression would; returns total code length in bits.
  double train(std::span<const std::uint8_t> bytes);

  // Adaptive cross entropy in bits/byte; the state keeps learning while
  // measuring. Throws Error(kInvalidInput) on empty input.
  double cross_entropy_of(std::span<const std::uint8_t> bytes);

  // Probability of the next whole byte, chaining bit predictions through the
  // bit tree without learning from the hypothetical bits. Requires a byte boundary.
  double byte_probability(std::uint8_t byte) const;

  // Highest-probability next byte under byte_probability; ties go to the
  // byte found first when descending the likelier branch.
  std::uint8_t most_likely_byte() const;

  // Greedy n-character continuation computed on a scratch copy; this
  // predictor is left untouched.
  std::string predict_next_chars(int n) const;

  Snapshot snapshot() const;
  // Throws Error(kBadMagic / kVersionMismatch / kTruncated) on bad input.
  static Predictor restore(const Snapshot& snap);

  // FNV-1a of the serialized state.
  std::uint64_t state_digest() const;

  const Config& config() const { return config_; }
  std::uint64_t bytes_processed() const { return bytes_processed_; }
  bool at_byte_boundary() const { return bit_pos_ == 0; }
  std::size_t memory_bytes() const;

  // Exposed for tests and instrumentation.
  struct Forward {
    std::array<double, kInputs> inputs{};
    NodeIndices nodes{};
    std::array<double, kNumSets> hidden{};
    Vec7 hidden_stretch{};
    double mixed = 0.5;  // output layer, before the APM
    double refined = 0.5;  // after the APM
    Probability p;
  };
  Forward forward(std::uint32_t partial, int bit_pos) const;

  const MixerLayer& first_layer() const { return layer1_; }
  const Vec7& output_weights() const { return config_.second_layer == SecondLayer::kEkf ? ekf_.w : layer2_; }
  const EkfState& ekf_state() const { return ekf_; }
  const MatchModel& match_model() const { return match_; }
  const GateInputs& gate() const { return gate_; }

 private:
  void end_byte(std::uint8_t byte);
  void refresh_contexts();
  std::uint8_t previous_byte() const { return static_cast<std::uint8_t>(gate_.last_four_bytes); }

  Config config_;
  std::vector<ContextSpec> specs_;
  std::vector<ContextModel> models_;
  std::array<std::uint64_t, kContextModels> hashes_{};
  MatchModel match_;
  MixerLayer layer1_;
  Vec7 layer2_{};
  EkfState ekf_;
  Apm apm_;
  GateInputs gate_;
  std::uint32_t partial_ = 1;
  int bit_pos_ = 0;
  std::uint64_t bytes_processed_ = 0;
  std::optional<Forward> pending_;
};

// On-disk container: "CMX1", version, flags, config digest (LE),
// original length (LE), coded payload.
struct Archive {
  static constexpr std::array<std::uint8_t, 4> kMagic{'C', 'M', 'X', '1'};
  static constexpr std::uint8_t kVersion = 1;
  static constexpr std::size_t kHeaderSize = 22;
  static constexpr std::uint8_t kFlagEkf = 0x01;
  static constexpr std::uint8_t kFlagPpm = 0x02;

  std::uint8_t version = kVersion;
  std::uint8_t flags = 0;
  std::uint64_t config_digest = 0;
  std::uint64_t original_length = 0;
  std::vector<std::uint8_t> payload;

  std::vector<std::uint8_t> serialize() const;
  // Throws Error(kBadMagic / kVersionMismatch / kTruncated).
  static Archive parse(std::span<const std::uint8_t> bytes);
};

std::vector<std::uint8_t> compress(std::span<const std::uint8_t> bytes, const Config& config = {});

// Throws Error(kConfigMismatch) if the archive was not made with `config`,
// Error(kTruncated / kCorruptArchive) on damaged payloads.
std::vector<std::uint8_t> decompress(std::span<const std::uint8_t> archive, const Config& config);

// Decompresses with whichever level preset (and second-layer flag) matches
// the archive's digest; `base` supplies the remaining keys.
std::vector<std::uint8_t> decompress(std::span<const std::uint8_t> archive);
Config resolve_config(const Archive& archive, const Config& base = {});

inline std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace cmx
