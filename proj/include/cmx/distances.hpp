#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "cmx/config.hpp"

namespace cmx {

using Bytes = std::span<const std::uint8_t>;

// What a compressor must offer for the compression-based distances.
// Sizes are in bytes and may be fractional.
class CompressorHandle {
 public:
  virtual ~CompressorHandle() = default;
  // C(x)
  virtual double size_of(Bytes x) const = 0;
  // C(x|y): size of x after the compressor has been trained on y.
  virtual double size_of_given(Bytes x, Bytes y) const = 0;
  // E(x|y): adaptive cross entropy of x in bits/byte after training on y.
  virtual double entropy_given(Bytes x, Bytes y) const = 0;
};

// The context-mixing predictor as a CompressorHandle. Sizes are the ideal
// code length (sum of -log2 p over coded bits) divided by 8.
class EngineCompressor final : public CompressorHandle {
 public:
  explicit EngineCompressor(Config config = {}) : config_(config) {}

  double size_of(Bytes x) const override;
  double size_of_given(Bytes x, Bytes y) const override;
  double entropy_given(Bytes x, Bytes y) const override;

 private:
  Config config_;
};

// (C(x|y) + C(y|x)) / C(xy)
double d_c(const CompressorHandle& c, Bytes x, Bytes y);
// E(x|y)
double d_e1(const CompressorHandle& c, Bytes x, Bytes y);
// (E(x|y) + E(y|x)) / 2
double d_e2(const CompressorHandle& c, Bytes x, Bytes y);
// (C(xy) - min(C(x), C(y))) / max(C(x), C(y))
double d_ncd(const CompressorHandle& c, Bytes x, Bytes y);
// C(xy) / (C(x) + C(y))
double d_cdm(const CompressorHandle& c, Bytes x, Bytes y);

enum class Metric { kC, kE1, kE2, kNcd, kCdm };

// "c", "e1", "e2", "ncd", "cdm"; throws Error(kInvalidInput) otherwise.
Metric parse_metric(std::string_view name);
double distance(Metric m, const CompressorHandle& c, Bytes x, Bytes y);

}  // namespace cmx
