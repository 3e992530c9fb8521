#pragma once

#include <cmath>
#include <cstdint>

namespace cmx {

// Probability that the next bit is 1, as a 16-bit fixed-point fraction
// raw / 65536. Never exactly 0 or 1: raw is clamped to [1, 65535].
class Probability {
 public:
  static constexpr std::int64_t kScale = 65536;
  static constexpr std::int64_t kMinRaw = 1;
  static constexpr std::int64_t kMaxRaw = 65535;

  constexpr Probability() = default;

  static constexpr Probability from_raw(std::int64_t raw) {
    Probability p;
    p.raw_ = static_cast<std::uint32_t>(raw < kMinRaw   ? kMinRaw
                                        : raw > kMaxRaw ? kMaxRaw
                                                        : raw);
    return p;
  }

  static Probability from_double(double p) {
    if (!(p > 0.0)) return from_raw(kMinRaw);
    if (!(p < 1.0)) return from_raw(kMaxRaw);
    return from_raw(std::llround(p * static_cast<double>(kScale)));
  }

  constexpr std::uint32_t raw() const { return raw_; }
  constexpr double value() const { return raw_ / static_cast<double>(kScale); }

  // Probability of the given bit value under this prediction.
  constexpr double of(int bit) const { return bit ? value() : 1.0 - value(); }

  constexpr Probability complement() const {
    return from_raw(kScale - static_cast<std::int64_t>(raw_));
  }

  friend constexpr bool operator==(Probability, Probability) = default;

 private:
  std::uint32_t raw_ = 32768;
};

// Information content of `bit` under prediction p, in bits.
inline double cost_bits(Probability p, int bit) { return -std::log2(p.of(bit)); }

inline double squash(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double stretch(double p) { return std::log(p / (1.0 - p)); }

// Table-driven stretch of a fixed-point probability.
double stretch(Probability p);

inline constexpr double kStretchLimit = 8.0;

inline double clamp_stretch(double x) {
  return x < -kStretchLimit ? -kStretchLimit : x > kStretchLimit ? kStretchLimit : x;
}

}  // namespace cmx
