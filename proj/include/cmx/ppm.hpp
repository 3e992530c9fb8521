#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cmx/coder.hpp"

namespace cmx {

// Byte-level PPM with escape method C (escape count = distinct symbols
// seen in the context) and no exclusions. Contexts up to `order` bytes are
// kept in a suffix trie; the order -1 level is uniform over 256 symbols.
class PpmModel {
 public:
  static constexpr int kMaxOrder = 16;

  explicit PpmModel(int order = 5);

  // Blended next-symbol distribution given everything seen so far.
  std::array<double, 256> distribution() const;

  // Appends `symbol` to the history after counting it in every context of
  // order 0..K that precedes it.
  void update(std::uint8_t symbol);

  struct ContextStats {
    std::vector<std::pair<std::uint8_t, std::uint32_t>> counts;  // sorted by symbol
    std::uint32_t total = 0;

    std::uint32_t distinct() const { return static_cast<std::uint32_t>(counts.size()); }
    std::uint32_t count(std::uint8_t symbol) const;
    // c / (total + distinct)
    Rational probability(std::uint8_t symbol) const;
    // distinct / (total + distinct)
    Rational escape() const;
  };

  // Statistics of a context given oldest byte first ("ab" means ...a, b).
  // nullopt if the context has never been followed by a symbol.
  std::optional<ContextStats> context(std::string_view ctx) const;

  int order() const { return order_; }
  std::span<const std::uint8_t> history() const { return history_; }

 private:
  struct Node {
    std::vector<std::pair<std::uint8_t, std::uint32_t>> counts;  // sorted by symbol
    std::vector<std::pair<std::uint8_t, std::uint32_t>> children;  // byte one step further back
    std::uint32_t total = 0;
  };

  std::optional<std::uint32_t> child(std::uint32_t node, std::uint8_t byte) const;
  std::uint32_t child_or_create(std::uint32_t node, std::uint8_t byte);

  int order_;
  std::vector<Node> nodes_;
  std::vector<std::uint8_t> history_;
};

// Probability that the next bit is 1 given the bits already seen of a byte
// (`partial`, 1-prefixed) under a 256-symbol distribution.
double bit_probability(const std::array<double, 256>& dist, std::uint32_t partial, int bit_pos);

// Adaptive PPM code length in bits/byte from the exact blended distribution.
// Throws Error(kInvalidInput) for empty input or order outside [0, 16].
double ppm_entropy(std::span<const std::uint8_t> bytes, int order);

// CMX1 container with the PPM flag; payload codes each byte as 8 binary
// decisions through the range coder.
std::vector<std::uint8_t> ppm_compress(std::span<const std::uint8_t> bytes, int order);
std::vector<std::uint8_t> ppm_decompress(std::span<const std::uint8_t> archive);

// Digest stored in PPM archive headers.
std::uint64_t ppm_digest(int order);

}  // namespace cmx
