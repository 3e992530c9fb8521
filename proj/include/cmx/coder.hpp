#pragma once

#include <boost/rational.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cmx/probability.hpp"

namespace cmx {

// Binary range encoder: 32-bit range, byte-wise renormalization, carry
// propagation through a cached byte plus a run of pending 0xFF bytes.
// Bit 1 takes the low part of the interval, bit 0 the high part.
class Encoder {
 public:
  static constexpr std::uint32_t kTop = 1u << 24;

  void encode(int bit, Probability p1);

  // Terminates the interval and returns the complete byte stream.
  // Calling it twice is a logic error.
  std::vector<std::uint8_t> finish();

  std::uint64_t low() const { return low_; }
  std::uint32_t range() const { return range_; }
  std::size_t bytes_written() const { return out_.size(); }
  bool finished() const { return finished_; }

 private:
  void shift_low();

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  bool first_ = true;  // the initial cached byte is always zero and is not stored
  bool finished_ = false;
  std::vector<std::uint8_t> out_;
};

class Decoder {
 public:
  // Throws Error(kTruncated) if the stream is shorter than the 4-byte preamble.
  explicit Decoder(std::span<const std::uint8_t> in);

  // Throws Error(kTruncated) when it needs bytes past the end of the stream.
  int decode(Probability p1);

  std::size_t position() const { return pos_; }
  bool fully_consumed() const { return pos_ == in_.size(); }

 private:
  std::uint8_t next_byte();

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  std::uint32_t code_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
};

// Exact-arithmetic interval narrowing over multi-symbol alphabets. Used as an
// oracle for the binary coder and to reproduce hand-worked examples.
using Rational = boost::rational<std::int64_t>;

struct RationalInterval {
  Rational lo{0};
  Rational hi{1};

  Rational width() const { return hi - lo; }
};

// dists[t] is the distribution for step t; symbols[t] indexes into it.
// Throws Error(kInvalidDistribution) if a distribution does not sum to one
// or has a negative entry, Error(kInvalidInput) on shape mismatches.
RationalInterval interval_trace(std::span<const std::vector<Rational>> dists,
                                std::span<const std::size_t> symbols);

struct BinaryCode {
  std::string bits;  // '0' = lower half, '1' = upper half
  Rational value;    // midpoint of the final dyadic interval
};

// Shortest bisection path from [0,1) whose final midpoint lies in [lo, hi).
BinaryCode bisection_code(const RationalInterval& interval);

}  // namespace cmx
