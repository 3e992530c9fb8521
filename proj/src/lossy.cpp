#include "cmx/lossy.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <set>

#include "cmx/engine.hpp"
#include "cmx/error.hpp"

namespace cmx {

namespace {

constexpr std::uint32_t kMaxSide = 1u << 20;

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int n) {
  for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> b, std::size_t pos, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b[pos + i]) << (8 * i);
  return v;
}

double sq_dist(std::span<const double> a, std::span<const std::uint8_t> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

std::vector<std::uint8_t> FilterBank::serialize() const {
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  put_le(out, filters.size(), 2);
  out.push_back(static_cast<std::uint8_t>(patch_size));
  out.push_back(static_cast<std::uint8_t>(channels));
  for (const auto& f : filters) out.insert(out.end(), f.begin(), f.end());
  return out;
}

FilterBank FilterBank::parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::kBadMagic, "not a filter bank");
  }
  if (bytes.size() < 8) throw Error(ErrorCode::kTruncated, "filter bank header truncated");
  FilterBank bank;
  const auto k = static_cast<int>(get_le(bytes, 4, 2));
  bank.patch_size = bytes[6];
  bank.channels = bytes[7];
  if (k < 1 || k > kMaxFilters || bank.patch_size < 1 || (bank.channels != 1 && bank.channels != 3)) {
    throw Error(ErrorCode::kCorruptArchive, "invalid filter bank header");
  }
  const std::size_t dim = bank.dim();
  if (bytes.size() != 8 + dim * k) throw Error(ErrorCode::kTruncated, "filter bank size mismatch");
  for (int i = 0; i < k; ++i) {
    const auto* p = bytes.data() + 8 + dim * i;
    bank.filters.emplace_back(p, p + dim);
  }
  return bank;
}

std::uint64_t FilterBank::digest() const {
  const auto b = serialize();
  return fnv1a64({reinterpret_cast<const char*>(b.data()), b.size()});
}

int FilterBank::nearest(std::span<const std::uint8_t> patch) const {
  int best = 0;
  std::int64_t best_d = std::numeric_limits<std::int64_t>::max();
  for (int j = 0; j < k(); ++j) {
    std::int64_t d = 0;
    for (std::size_t i = 0; i < patch.size(); ++i) {
      const std::int64_t diff = static_cast<int>(patch[i]) - static_cast<int>(filters[j][i]);
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

std::vector<Patch> extract_patches(const Image& img, int patch_size) {
  std::vector<Patch> out;
  if (img.width <= 0 || img.height <= 0) return out;
  for (int py = 0; py < img.height; py += patch_size) {
    for (int px = 0; px < img.width; px += patch_size) {
      Patch p;
      p.reserve(static_cast<std::size_t>(patch_size) * patch_size * img.channels);
      for (int dy = 0; dy < patch_size; ++dy) {
        const int y = std::min(py + dy, img.height - 1);
        for (int dx = 0; dx < patch_size; ++dx) {
          const int x = std::min(px + dx, img.width - 1);
          for (int c = 0; c < img.channels; ++c) p.push_back(img.at(x, y, c));
        }
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

KMeansResult learn_filters(const std::vector<Patch>& patches, int k, int max_iter, std::uint64_t seed,
                           int patch_size, int channels) {
  if (k < 1 || k > FilterBank::kMaxFilters) throw Error(ErrorCode::kInvalidInput, "k must be in [1, 256]");
  const std::size_t dim = static_cast<std::size_t>(patch_size) * patch_size * channels;
  for (const auto& p : patches) {
    if (p.size() != dim) throw Error(ErrorCode::kInvalidInput, "patch length does not match patch size");
  }
  if (std::set<Patch>(patches.begin(), patches.end()).size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::kInvalidInput, "fewer distinct patches than filters");
  }
  const std::size_t n = patches.size();
  std::mt19937_64 rng(seed);
  auto as_center = [](const Patch& p) { return std::vector<double>(p.begin(), p.end()); };

  // k-means++ seeding
  std::vector<std::vector<double>> centers;
  centers.push_back(as_center(patches[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(centers[0], patches[i]);
  while (centers.size() < static_cast<std::size_t>(k)) {
    const std::size_t pick = std::discrete_distribution<std::size_t>(d2.begin(), d2.end())(rng);
    centers.push_back(as_center(patches[pick]));
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(centers.back(), patches[i]));
  }

  KMeansResult result;
  std::vector<int> assign(n, -1);
  std::vector<double> cost(n);
  for (int iter = 0; iter < std::max(max_iter, 1); ++iter) {
    bool changed = false;
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        const double d = sq_dist(centers[j], patches[i]);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      changed |= assign[i] != best;
      assign[i] = best;
      cost[i] = best_d;
      objective += best_d;
    }
    result.objective.push_back(objective);
    result.iterations = iter + 1;
    if (!changed || iter + 1 >= max_iter) break;

    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++sizes[assign[i]];
      for (std::size_t t = 0; t < dim; ++t) sums[assign[i]][t] += patches[i][t];
    }
    for (int j = 0; j < k; ++j) {
      if (sizes[j] == 0) {
        const auto far = static_cast<std::size_t>(std::max_element(cost.begin(), cost.end()) - cost.begin());
        centers[j] = as_center(patches[far]);
        cost[far] = 0.0;
        assign[far] = j;
        continue;
      }
      for (std::size_t t = 0; t < dim; ++t) centers[j][t] = sums[j][t] / static_cast<double>(sizes[j]);
    }
  }

  result.bank.patch_size = patch_size;
  result.bank.channels = channels;
  std::set<Patch> seen;
  for (const auto& c : centers) {
    Patch f(dim);
    for (std::size_t t = 0; t < dim; ++t) f[t] = static_cast<std::uint8_t>(std::clamp(std::lround(c[t]), 0L, 255L));
    if (seen.insert(f).second) result.bank.filters.push_back(std::move(f));
  }
  return result;
}

std::size_t LossyEncoded::patch_count() const {
  const std::size_t gx = (width + patch_size - 1) / patch_size;
  const std::size_t gy = (height + patch_size - 1) / patch_size;
  return gx * gy;
}

LossyEncoded lossy_quantize(const Image& img, const FilterBank& bank) {
  if (img.width <= 0 || img.height <= 0 || static_cast<std::uint32_t>(img.width) > kMaxSide ||
      static_cast<std::uint32_t>(img.height) > kMaxSide) {
    throw Error(ErrorCode::kInvalidInput, "image dimensions out of range");
  }
  if (img.channels != bank.channels) throw Error(ErrorCode::kInvalidInput, "image and bank channel counts differ");
  if (bank.k() == 0) throw Error(ErrorCode::kInvalidInput, "empty filter bank");
  LossyEncoded enc;
  enc.width = static_cast<std::uint32_t>(img.width);
  enc.height = static_cast<std::uint32_t>(img.height);
  enc.channels = static_cast<std::uint8_t>(img.channels);
  enc.patch_size = static_cast<std::uint8_t>(bank.patch_size);
  enc.bank_digest = bank.digest();
  for (const auto& p : extract_patches(img, bank.patch_size)) {
    enc.indices.push_back(static_cast<std::uint8_t>(bank.nearest(p)));
  }
  return enc;
}

Image lossy_reconstruct(const LossyEncoded& enc, const FilterBank& bank) {
  if (enc.bank_digest != bank.digest()) throw Error(ErrorCode::kConfigMismatch, "filter bank digest mismatch");
  if (enc.indices.size() != enc.patch_count()) throw Error(ErrorCode::kCorruptArchive, "wrong number of patch indices");
  const int ps = bank.patch_size;
  Image img(static_cast<int>(enc.width), static_cast<int>(enc.height), enc.channels);
  const int gx = (img.width + ps - 1) / ps;
  for (std::size_t i = 0; i < enc.indices.size(); ++i) {
    if (enc.indices[i] >= bank.k()) throw Error(ErrorCode::kCorruptArchive, "patch index outside filter bank");
    const auto& f = bank.filters[enc.indices[i]];
    const int px = static_cast<int>(i % gx) * ps;
    const int py = static_cast<int>(i / gx) * ps;
    for (int dy = 0; dy < ps && py + dy < img.height; ++dy) {
      for (int dx = 0; dx < ps && px + dx < img.width; ++dx) {
        for (int c = 0; c < img.channels; ++c) img.at(px + dx, py + dy, c) = f[(dy * ps + dx) * img.channels + c];
      }
    }
  }
  return img;
}

std::vector<std::uint8_t> lossy_encode(const Image& img, const FilterBank& bank, const Config& config) {
  const LossyEncoded enc = lossy_quantize(img, bank);
  std::vector<std::uint8_t> out(LossyEncoded::kMagic.begin(), LossyEncoded::kMagic.end());
  out.push_back(LossyEncoded::kVersion);
  put_le(out, enc.width, 4);
  put_le(out, enc.height, 4);
  out.push_back(enc.channels);
  out.push_back(enc.patch_size);
  put_le(out, enc.bank_digest, 8);
  const auto archive = compress(enc.indices, config);
  out.insert(out.end(), archive.begin(), archive.end());
  return out;
}

Image lossy_decode(std::span<const std::uint8_t> bytes, const FilterBank& bank) {
  constexpr std::size_t kHeader = 4 + 1 + 4 + 4 + 1 + 1 + 8;
  if (bytes.size() < 4 || !std::equal(LossyEncoded::kMagic.begin(), LossyEncoded::kMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::kBadMagic, "not a lossy image");
  }
  if (bytes.size() < kHeader) throw Error(ErrorCode::kTruncated, "lossy header truncated");
  if (bytes[4] != LossyEncoded::kVersion) throw Error(ErrorCode::kVersionMismatch, "unsupported lossy version");
  LossyEncoded enc;
  enc.width = static_cast<std::uint32_t>(get_le(bytes, 5, 4));
  enc.height = static_cast<std::uint32_t>(get_le(bytes, 9, 4));
  enc.channels = bytes[13];
  enc.patch_size = bytes[14];
  enc.bank_digest = get_le(bytes, 15, 8);
  if (enc.width == 0 || enc.height == 0 || enc.width > kMaxSide || enc.height > kMaxSide || enc.patch_size == 0) {
    throw Error(ErrorCode::kCorruptArchive, "invalid lossy dimensions");
  }
  if (enc.bank_digest != bank.digest()) throw Error(ErrorCode::kConfigMismatch, "filter bank digest mismatch");
  enc.indices = decompress(bytes.subspan(kHeader));
  return lossy_reconstruct(enc, bank);
}

}  // namespace cmx
