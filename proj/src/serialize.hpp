#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "cmx/error.hpp"

namespace cmx::detail {

// Little-endian fixed-width writer for snapshot and container formats.
class ByteWriter {
 public:
  template <typename T>
    requires std::is_trivially_copyable_v<T>
  void put(const T& v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out_.insert(out_.end(), p, p + sizeof(T));
  }

  template <typename T>
    requires std::is_trivially_copyable_v<T>
  void put_span(std::span<const T> items) {
    put<std::uint64_t>(items.size());
    const auto* p = reinterpret_cast<const std::uint8_t*>(items.data());
    out_.insert(out_.end(), p, p + items.size_bytes());
  }

  void put_string(const std::string& s) {
    put_span(std::span<const char>(s.data(), s.size()));
  }

  void put_raw(std::span<const std::uint8_t> bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }

  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  template <typename T>
    requires std::is_trivially_copyable_v<T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)).data(), sizeof(T));
    return v;
  }

  // Reads a length-prefixed array into `dst`, which must already have the recorded size.
  template <typename T>
    requires std::is_trivially_copyable_v<T>
  void get_into(std::span<T> dst) {
    const auto n = get<std::uint64_t>();
    if (n != dst.size()) throw Error(ErrorCode::kCorruptArchive, "array size mismatch in snapshot");
    std::memcpy(dst.data(), take(dst.size_bytes()).data(), dst.size_bytes());
  }

  template <typename T>
    requires std::is_trivially_copyable_v<T>
  std::vector<T> get_vector() {
    const auto n = get<std::uint64_t>();
    if (n > remaining() / sizeof(T)) throw Error(ErrorCode::kTruncated, "array exceeds input");
    std::vector<T> v(n);
    std::memcpy(v.data(), take(n * sizeof(T)).data(), n * sizeof(T));
    return v;
  }

  std::string get_string() {
    auto v = get_vector<char>();
    return std::string(v.begin(), v.end());
  }

  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > remaining()) throw Error(ErrorCode::kTruncated, "unexpected end of input");
    auto out = in_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t remaining() const { return in_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace cmx::detail
