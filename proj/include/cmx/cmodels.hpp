#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cmx/probability.hpp"

namespace cmx {

// Pair of saturating bit counts with a Krichevsky-Trofimov estimate.
struct BitCounter {
  static constexpr std::uint8_t kCap = 255;

  std::uint8_t n0 = 0;
  std::uint8_t n1 = 0;

  // (n1 + 1/2) / (n0 + n1 + 1)
  double p1() const { return (n1 + 0.5) / (n0 + n1 + 1.0); }
  Probability probability() const { return Probability::from_double(p1()); }
  bool seen() const { return n0 + n1 > 0; }

  // When the count to be incremented is saturated, both counts are halved first.
  void update(int bit);

  friend bool operator==(const BitCounter&, const BitCounter&) = default;
};

// Which history bytes form a model's context. Offset 1 is the most recent
// whole byte. Orders 1..n are offsets {1..n}; sparse models skip offsets.
struct ContextSpec {
  std::vector<int> offsets;

  static ContextSpec order(int n);
  static ContextSpec sparse(std::vector<int> offsets);
};

// 64-bit multiplicative hash of the bytes selected by `spec` at the end of
// `history`. Missing bytes (short history) hash as a distinct value. `salt`
// separates models that share a spec shape.
std::uint64_t context_hash(std::span<const std::uint8_t> history, const ContextSpec& spec,
                           std::uint64_t salt);

// Direct-mapped table of bit counters addressed by (context hash, bit-tree
// node). Node is the bits seen so far in the current byte with a leading 1,
// so it ranges over [1, 255]. Colliding keys share a counter.
class ContextModel {
 public:
  explicit ContextModel(int table_bits);

  Probability predict(std::uint64_t ctx_hash, std::uint32_t node) const;
  void update(std::uint64_t ctx_hash, std::uint32_t node, int bit);

  std::size_t slot(std::uint64_t ctx_hash, std::uint32_t node) const;
  const BitCounter& counter(std::uint64_t ctx_hash, std::uint32_t node) const {
    return table_[slot(ctx_hash, node)];
  }

  int table_bits() const { return bits_; }
  std::size_t table_size() const { return table_.size(); }
  std::span<const BitCounter> table() const { return table_; }
  std::span<BitCounter> table() { return table_; }

 private:
  int bits_;
  std::vector<BitCounter> table_;
};

// Longest-match model: finds the most recent earlier occurrence of the
// current context and predicts the byte that followed it.
class MatchModel {
 public:
  static constexpr std::uint32_t kMaxLength = 65534;
  // Context orders used to seed a new match, longest first.
  static constexpr int kSeedOrders[] = {8, 4, 2};

  struct Prediction {
    Probability p;
    std::uint32_t length = 0;  // 0 when no match or the current byte diverged
  };

  explicit MatchModel(int index_bits);

  // `partial` is the current byte's bits with a leading 1; bit_pos = bits seen.
  Prediction predict(std::uint32_t partial, int bit_pos) const;

  // Called once per completed byte.
  void update(std::uint8_t byte);

  std::uint32_t length() const { return length_; }
  std::size_t pointer() const { return ptr_; }
  std::size_t match_start() const { return ptr_ - length_; }
  const std::vector<std::uint8_t>& history() const { return history_; }

  int index_bits() const { return index_bits_; }

 private:
  friend class Predictor;

  std::size_t index_slot(int order) const;

  int index_bits_;
  std::vector<std::uint8_t> history_;
  // One table per seed order; stores position + 1 of the byte after the context.
  std::vector<std::vector<std::uint32_t>> index_;
  std::size_t ptr_ = 0;
  std::uint32_t length_ = 0;
};

}  // namespace cmx
