#include "cmx/image.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

#include "cmx/error.hpp"

namespace cmx {

Image::Image(int w, int h, int c, std::uint8_t fill)
    : width(w), height(h), channels(c), pixels(static_cast<std::size_t>(w) * h * c, fill) {}

namespace {

class PnmReader {
 public:
  explicit PnmReader(std::span<const std::uint8_t> bytes) : b_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(b_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int number() {
    skip_space_and_comments();
    if (pos_ >= b_.size() || !std::isdigit(b_[pos_])) throw Error(ErrorCode::kInvalidInput, "malformed PNM header");
    long v = 0;
    while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
      v = v * 10 + (b_[pos_++] - '0');
      if (v > (1 << 24)) throw Error(ErrorCode::kInvalidInput, "PNM value too large");
    }
    return static_cast<int>(v);
  }

  std::uint8_t raw() {
    if (pos_ >= b_.size()) throw Error(ErrorCode::kInvalidInput, "PNM raster truncated");
    return b_[pos_++];
  }

  void skip_single_whitespace() {
    if (pos_ >= b_.size() || !std::isspace(b_[pos_])) throw Error(ErrorCode::kInvalidInput, "malformed PNM header");
    ++pos_;
  }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

}  // namespace

Image decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw Error(ErrorCode::kInvalidInput, "not a PNM file");
  const char kind = static_cast<char>(bytes[1]);
  int channels = 0;
  bool ascii = false;
  switch (kind) {
    case '2': channels = 1; ascii = true; break;
    case '3': channels = 3; ascii = true; break;
    case '5': channels = 1; break;
    case '6': channels = 3; break;
    default: throw Error(ErrorCode::kInvalidInput, "unsupported PNM variant");
  }
  PnmReader r(bytes.subspan(2));
  const int w = r.number();
  const int h = r.number();
  const int maxval = r.number();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) throw Error(ErrorCode::kInvalidInput, "unsupported PNM dimensions");
  Image img(w, h, channels);
  if (ascii) {
    for (auto& p : img.pixels) {
      const int v = r.number();
      if (v > maxval) throw Error(ErrorCode::kInvalidInput, "PNM sample exceeds maxval");
      p = static_cast<std::uint8_t>(v * 255 / maxval);
    }
  } else {
    r.skip_single_whitespace();
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(r.raw() * 255 / maxval);
  }
  return img;
}

std::vector<std::uint8_t> encode_pnm(const Image& img) {
  if (img.channels != 1 && img.channels != 3) throw Error(ErrorCode::kInvalidInput, "PNM needs 1 or 3 channels");
  const std::string header = std::string(img.channels == 1 ? "P5" : "P6") + "\n" + std::to_string(img.width) + " " +
                             std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

Image read_pnm(const std::filesystem::path& path) { return decode_pnm(read_file(path)); }

void write_pnm(const std::filesystem::path& path, const Image& img) { write_file(path, encode_pnm(img)); }

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace cmx
