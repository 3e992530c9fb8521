#include "cmx/cmodels.hpp"

#include <algorithm>
#include <stdexcept>

#include "cmx/error.hpp"

namespace cmx {

namespace {

constexpr std::uint64_t kMul = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kMul2 = 0xD6E8FEB86659FD93ull;

std::uint64_t mix64(std::uint64_t h) {
  h ^= h >> 31;
  h *= kMul2;
  h ^= h >> 29;
  return h;
}

}  // namespace

void BitCounter::update(int bit) {
  std::uint8_t& hit = bit ? n1 : n0;
  if (hit == kCap) {
    n0 >>= 1;
    n1 >>= 1;
  }
  ++hit;
}

ContextSpec ContextSpec::order(int n) {
  ContextSpec spec;
  for (int i = 1; i <= n; ++i) spec.offsets.push_back(i);
  return spec;
}

ContextSpec ContextSpec::sparse(std::vector<int> offsets) { return ContextSpec{std::move(offsets)}; }

std::uint64_t context_hash(std::span<const std::uint8_t> history, const ContextSpec& spec,
                           std::uint64_t salt) {
  std::uint64_t h = (salt + 1) * kMul;
  for (int off : spec.offsets) {
    const std::uint64_t b =
        off <= static_cast<int>(history.size()) ? history[history.size() - off] : 256;
    h = (h ^ (b + 1)) * kMul + static_cast<std::uint64_t>(off);
  }
  return mix64(h);
}

ContextModel::ContextModel(int table_bits) : bits_(table_bits) {
  if (table_bits < 1 || table_bits > 30) {
    throw Error(ErrorCode::kInvalidInput, "context table bits must be in [1, 30]");
  }
  table_.resize(std::size_t{1} << table_bits);
}

std::size_t ContextModel::slot(std::uint64_t ctx_hash, std::uint32_t node) const {
  const std::uint64_t h = mix64(ctx_hash + node * kMul);
  return static_cast<std::size_t>(h >> (64 - bits_));
}

Probability ContextModel::predict(std::uint64_t ctx_hash, std::uint32_t node) const {
  return table_[slot(ctx_hash, node)].probability();
}

void ContextModel::update(std::uint64_t ctx_hash, std::uint32_t node, int bit) {
  table_[slot(ctx_hash, node)].update(bit);
}

MatchModel::MatchModel(int index_bits) : index_bits_(index_bits) {
  if (index_bits < 1 || index_bits > 30) {
    throw Error(ErrorCode::kInvalidInput, "match index bits must be in [1, 30]");
  }
  for (std::size_t i = 0; i < std::size(kSeedOrders); ++i) {
    index_.emplace_back(std::size_t{1} << index_bits, 0u);
  }
}

std::size_t MatchModel::index_slot(int order) const {
  std::uint64_t h = static_cast<std::uint64_t>(order) * kMul2;
  for (int i = 1; i <= order; ++i) h = (h ^ history_[history_.size() - i]) * kMul + 1;
  return static_cast<std::size_t>(mix64(h) >> (64 - index_bits_));
}

MatchModel::Prediction MatchModel::predict(std::uint32_t partial, int bit_pos) const {
  Prediction out;
  if (length_ == 0) return out;
  const std::uint32_t expected = history_[ptr_];
  if (((expected | 0x100u) >> (8 - bit_pos)) != partial) return out;
  const int bit = (expected >> (7 - bit_pos)) & 1;
  const double strength = std::min<std::uint32_t>(length_, 32) * 0.8;
  out.p = Probability::from_double(squash(bit ? strength : -strength));
  out.length = length_;
  return out;
}

void MatchModel::update(std::uint8_t byte) {
  history_.push_back(byte);
  if (length_ > 0) {
    if (history_[ptr_] == byte) {
      length_ = std::min(length_ + 1, kMaxLength);
      ++ptr_;
    } else {
      length_ = 0;
    }
  }

  const std::size_t n = history_.size();
  for (std::size_t i = 0; i < std::size(kSeedOrders); ++i) {
    const int order = kSeedOrders[i];
    if (n < static_cast<std::size_t>(order)) continue;
    std::uint32_t& entry = index_[i][index_slot(order)];
    if (length_ == 0 && entry != 0) {
      const std::size_t cand = entry - 1;
      std::uint32_t len = 0;
      while (len < kMaxLength && len < cand && history_[cand - 1 - len] == history_[n - 1 - len]) {
        ++len;
      }
      // Shorter than the seed order means a hash collision.
      if (len >= static_cast<std::uint32_t>(order)) {
        ptr_ = cand;
        length_ = len;
      }
    }
    entry = static_cast<std::uint32_t>(n + 1);
  }
}

}  // namespace cmx
