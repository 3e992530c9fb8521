#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cmx/config.hpp"
#include "cmx/image.hpp"

namespace cmx {

// k patch filters of patch_size^2 * channels samples each, row-major with
// channels interleaved.
struct FilterBank {
  static constexpr std::array<std::uint8_t, 4> kMagic{'C', 'M', 'X', 'F'};
  static constexpr int kMaxFilters = 256;

  int patch_size = 6;
  int channels = 1;
  std::vector<std::vector<std::uint8_t>> filters;

  int k() const { return static_cast<int>(filters.size()); }
  std::size_t dim() const { return static_cast<std::size_t>(patch_size) * patch_size * channels; }

  // "CMXF", k (u16 LE), patch size (u8), channels (u8), filter bytes.
  std::vector<std::uint8_t> serialize() const;
  // Throws Error(kBadMagic / kTruncated / kCorruptArchive).
  static FilterBank parse(std::span<const std::uint8_t> bytes);
  // FNV-1a of serialize().
  std::uint64_t digest() const;

  // Nearest filter by squared Euclidean distance; ties go to the lower index.
  int nearest(std::span<const std::uint8_t> patch) const;
};

using Patch = std::vector<std::uint8_t>;

// Non-overlapping patches in raster order of the patch grid. Edge patches
// are padded by repeating the last row/column.
std::vector<Patch> extract_patches(const Image& img, int patch_size = 6);

struct KMeansResult {
  FilterBank bank;
  // Sum of squared distances after each assignment step.
  std::vector<double> objective;
  int iterations = 0;
};

// k-means++ seeding then Lloyd iterations until assignments stop changing
// or max_iter is reached. An empty cluster is re-seeded with the point
// furthest from its centroid. Centroids are rounded to bytes at the end and
// any that collide after rounding are merged, so the bank can come out
// smaller than k. Throws Error(kInvalidInput) if there are fewer distinct
// patches than k, k is outside [1, 256] or patch lengths disagree.
KMeansResult learn_filters(const std::vector<Patch>& patches, int k, int max_iter, std::uint64_t seed,
                           int patch_size = 6, int channels = 1);

struct LossyEncoded {
  static constexpr std::array<std::uint8_t, 4> kMagic{'C', 'M', 'X', 'L'};
  static constexpr std::uint8_t kVersion = 1;

  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint8_t channels = 1;
  std::uint8_t patch_size = 6;
  std::uint64_t bank_digest = 0;
  std::vector<std::uint8_t> indices;  // one per patch, raster order

  std::size_t patch_count() const;
};

// Raw filter indices of every patch, before entropy coding.
LossyEncoded lossy_quantize(const Image& img, const FilterBank& bank);
Image lossy_reconstruct(const LossyEncoded& enc, const FilterBank& bank);

// "CMXL", version, width, height (u32 LE), channels, patch size,
// bank digest (u64 LE), then a CMX1 archive of the index bytes.
std::vector<std::uint8_t> lossy_encode(const Image& img, const FilterBank& bank, const Config& config = {});
// Throws Error(kConfigMismatch) when the bank digest differs.
Image lossy_decode(std::span<const std::uint8_t> bytes, const FilterBank& bank);

}  // namespace cmx
