#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace cmx {

// 8-bit raster, row-major, channels interleaved.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 (gray) or 3 (RGB)
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, int c, std::uint8_t fill = 0);

  std::uint8_t& at(int x, int y, int c = 0) { return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

  friend bool operator==(const Image&, const Image&) = default;
};

// Netpbm P2, P3, P5 and P6 with maxval <= 255. Throws Error(kInvalidInput).
Image decode_pnm(std::span<const std::uint8_t> bytes);
// P5 for one channel, P6 for three.
std::vector<std::uint8_t> encode_pnm(const Image& img);

Image read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const Image& img);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace cmx
