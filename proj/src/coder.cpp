#include "cmx/coder.hpp"

#include <stdexcept>

#include "cmx/error.hpp"

namespace cmx {

namespace {

std::uint32_t split(std::uint32_t range, Probability p1) {
  return static_cast<std::uint32_t>((static_cast<std::uint64_t>(range) * p1.raw()) >> 16);
}

}  // namespace

void Encoder::encode(int bit, Probability p1) {
  if (finished_) throw std::logic_error("encode after finish");
  const std::uint32_t bound = split(range_, p1);
  if (bit) {
    range_ = bound;
  } else {
    low_ += bound;
    range_ -= bound;
  }
  while (range_ < kTop) {
    range_ <<= 8;
    shift_low();
  }
}

void Encoder::shift_low() {
  if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const auto carry = static_cast<std::uint8_t>(low_ >> 32);
    std::uint8_t temp = cache_;
    do {
      if (first_) {
        first_ = false;
      } else {
        out_.push_back(static_cast<std::uint8_t>(temp + carry));
      }
      temp = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<std::uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

std::vector<std::uint8_t> Encoder::finish() {
  if (finished_) throw std::logic_error("Encoder::finish called twice");
  for (int i = 0; i < 5; ++i) shift_low();
  finished_ = true;
  return std::move(out_);
}

Decoder::Decoder(std::span<const std::uint8_t> in) : in_(in) {
  if (in_.size() < 4) throw Error(ErrorCode::kTruncated, "coded stream shorter than 4 bytes");
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t Decoder::next_byte() {
  if (pos_ >= in_.size()) throw Error(ErrorCode::kTruncated, "coded stream exhausted");
  return in_[pos_++];
}

int Decoder::decode(Probability p1) {
  const std::uint32_t bound = split(range_, p1);
  int bit;
  if (code_ < bound) {
    range_ = bound;
    bit = 1;
  } else {
    code_ -= bound;
    range_ -= bound;
    bit = 0;
  }
  while (range_ < Encoder::kTop) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
  return bit;
}

RationalInterval interval_trace(std::span<const std::vector<Rational>> dists,
                                std::span<const std::size_t> symbols) {
  if (dists.size() != symbols.size()) {
    throw Error(ErrorCode::kInvalidInput, "one distribution per symbol is required");
  }
  RationalInterval iv;
  for (std::size_t t = 0; t < dists.size(); ++t) {
    const auto& dist = dists[t];
    Rational sum{0};
    for (const auto& p : dist) {
      if (p < Rational(0)) throw Error(ErrorCode::kInvalidDistribution, "negative probability");
      sum += p;
    }
    if (sum != Rational(1)) throw Error(ErrorCode::kInvalidDistribution, "distribution does not sum to 1");
    if (symbols[t] >= dist.size()) throw Error(ErrorCode::kInvalidInput, "symbol outside alphabet");

    Rational below{0};
    for (std::size_t s = 0; s < symbols[t]; ++s) below += dist[s];
    const Rational width = iv.width();
    iv.lo += width * below;
    iv.hi = iv.lo + width * dist[symbols[t]];
  }
  return iv;
}

BinaryCode bisection_code(const RationalInterval& interval) {
  if (!(interval.lo < interval.hi)) throw Error(ErrorCode::kInvalidInput, "empty interval");
  BinaryCode code;
  Rational lo{0};
  Rational hi{1};
  // 62 halvings exhausts the int64 denominator.
  for (int depth = 0; depth < 62; ++depth) {
    const Rational mid = (lo + hi) / 2;
    if (interval.lo <= mid && mid < interval.hi) {
      code.value = mid;
      return code;
    }
    if (mid < interval.lo) {
      code.bits.push_back('1');
      lo = mid;
    } else {
      code.bits.push_back('0');
      hi = mid;
    }
  }
  throw Error(ErrorCode::kInvalidInput, "interval too narrow for 64-bit rationals");
}

}  // namespace cmx
