#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "cmx/mixer.hpp"

namespace cmx {

enum class SecondLayer { kSgd, kEkf };

// Every tunable of the predictor, the PPM baseline and the APM. Mirrors the
// key=value config file; see canonical() for the key names.
struct Config {
  static constexpr int kDefaultLevel = 6;
  static constexpr int kMaxLevel = 8;

  int table_bits = 16 + kDefaultLevel;  // models.table_bits
  double eta = 0.003;                    // mixer.eta
  int set_divisor = 4;                   // mixer.set_divisor
  SecondLayer second_layer = SecondLayer::kSgd;  // mixer.second_layer = sgd | ekf
  double layer1_init = 0.3;              // mixer.layer1_init
  double layer2_init = 128.0;            // mixer.layer2_init, in units of 1/65536
  EkfParams ekf;                         // ekf.q, ekf.p0, ekf.w0, ekf.r
  bool apm_enabled = true;               // apm.enabled
  int apm_rate = 7;                      // apm.rate
  int ppm_order = 5;                     // ppm.order

  // Level N selects 2^(16+N) counters per context model.
  static Config for_level(int level);

  // Throws Error(kInvalidInput) for unknown keys or malformed values.
  void set(std::string_view key, std::string_view value);

  // key=value per line; blank lines and '#' comments ignored.
  static Config parse(std::string_view text);

  // Sorted key=value lines covering every key that affects the context-mixing
  // predictor (ppm.order is excluded).
  std::string canonical() const;

  // FNV-1a of canonical(); stored in archive headers.
  std::uint64_t digest() const;

  friend bool operator==(const Config&, const Config&) = default;
};

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace cmx
