#include "cmx/ppm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cmx/config.hpp"
#include "cmx/engine.hpp"
#include "cmx/error.hpp"

namespace cmx {

namespace {

template <typename Vec>
auto find_sorted(Vec& v, std::uint8_t key) {
  return std::lower_bound(v.begin(), v.end(), key,
                          [](const auto& entry, std::uint8_t k) { return entry.first < k; });
}

void check_order(int order) {
  if (order < 0 || order > PpmModel::kMaxOrder) {
    throw Error(ErrorCode::kInvalidInput, "PPM order must be in [0, 16]");
  }
}

}  // namespace

std::uint32_t PpmModel::ContextStats::count(std::uint8_t symbol) const {
  const auto it = find_sorted(counts, symbol);
  return it != counts.end() && it->first == symbol ? it->second : 0;
}

Rational PpmModel::ContextStats::probability(std::uint8_t symbol) const {
  return Rational(count(symbol), total + distinct());
}

Rational PpmModel::ContextStats::escape() const { return Rational(distinct(), total + distinct()); }

PpmModel::PpmModel(int order) : order_(order) {
  check_order(order);
  nodes_.emplace_back();
}

std::optional<std::uint32_t> PpmModel::child(std::uint32_t node, std::uint8_t byte) const {
  const auto& kids = nodes_[node].children;
  const auto it = find_sorted(kids, byte);
  if (it == kids.end() || it->first != byte) return std::nullopt;
  return it->second;
}

std::uint32_t PpmModel::child_or_create(std::uint32_t node, std::uint8_t byte) {
  if (auto c = child(node, byte)) return *c;
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  auto& kids = nodes_[node].children;
  kids.insert(find_sorted(kids, byte), {byte, id});
  return id;
}

void PpmModel::update(std::uint8_t symbol) {
  std::uint32_t node = 0;
  const std::size_t n = history_.size();
  const int max_k = static_cast<int>(std::min<std::size_t>(order_, n));
  for (int k = 0;; ++k) {
    Node& nd = nodes_[node];
    auto it = find_sorted(nd.counts, symbol);
    if (it != nd.counts.end() && it->first == symbol) {
      ++it->second;
    } else {
      nd.counts.insert(it, {symbol, 1});
    }
    ++nd.total;
    if (k == max_k) break;
    node = child_or_create(node, history_[n - 1 - k]);
  }
  history_.push_back(symbol);
}

std::array<double, 256> PpmModel::distribution() const {
  // Deepest existing context first.
  std::vector<std::uint32_t> chain{0};
  const std::size_t n = history_.size();
  for (int k = 0; k < order_ && static_cast<std::size_t>(k) < n; ++k) {
    const auto c = child(chain.back(), history_[n - 1 - k]);
    if (!c) break;
    chain.push_back(*c);
  }

  std::array<double, 256> dist{};
  double carry = 1.0;  // product of escape probabilities of higher orders
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const Node& nd = nodes_[*it];
    if (nd.total == 0) continue;
    const double denom = nd.total + static_cast<double>(nd.counts.size());
    for (const auto& [sym, c] : nd.counts) dist[sym] += carry * c / denom;
    carry *= nd.counts.size() / denom;
  }
  for (auto& p : dist) p += carry / 256.0;
  return dist;
}

std::optional<PpmModel::ContextStats> PpmModel::context(std::string_view ctx) const {
  if (ctx.size() > static_cast<std::size_t>(order_)) return std::nullopt;
  std::uint32_t node = 0;
  for (auto it = ctx.rbegin(); it != ctx.rend(); ++it) {
    const auto c = child(node, static_cast<std::uint8_t>(*it));
    if (!c) return std::nullopt;
    node = *c;
  }
  const Node& nd = nodes_[node];
  if (nd.total == 0) return std::nullopt;
  return ContextStats{nd.counts, nd.total};
}

double bit_probability(const std::array<double, 256>& dist, std::uint32_t partial, int bit_pos) {
  const int remaining = 8 - bit_pos;
  const std::uint32_t base = (partial << remaining) & 0xFFu;
  const std::uint32_t half = 1u << (remaining - 1);
  double ones = 0.0;
  double all = 0.0;
  for (std::uint32_t s = 0; s < 2 * half; ++s) {
    const double p = dist[base + s];
    all += p;
    if (s >= half) ones += p;
  }
  return all > 0.0 ? ones / all : 0.5;
}

double ppm_entropy(std::span<const std::uint8_t> bytes, int order) {
  check_order(order);
  if (bytes.empty()) throw Error(ErrorCode::kInvalidInput, "PPM entropy of empty input is undefined");
  PpmModel model(order);
  double bits = 0.0;
  for (auto b : bytes) {
    bits -= std::log2(model.distribution()[b]);
    model.update(b);
  }
  return bits / static_cast<double>(bytes.size());
}

std::uint64_t ppm_digest(int order) { return fnv1a64("ppm.order=" + std::to_string(order) + "\n"); }

std::vector<std::uint8_t> ppm_compress(std::span<const std::uint8_t> bytes, int order) {
  check_order(order);
  Archive a;
  a.flags = Archive::kFlagPpm;
  a.config_digest = ppm_digest(order);
  a.original_length = bytes.size();
  if (!bytes.empty()) {
    PpmModel model(order);
    Encoder enc;
    for (auto b : bytes) {
      const auto dist = model.distribution();
      std::uint32_t partial = 1;
      for (int i = 0; i < 8; ++i) {
        const int bit = (b >> (7 - i)) & 1;
        enc.encode(bit, Probability::from_double(bit_probability(dist, partial, i)));
        partial = (partial << 1) | static_cast<std::uint32_t>(bit);
      }
      model.update(b);
    }
    a.payload = enc.finish();
  }
  return a.serialize();
}

std::vector<std::uint8_t> ppm_decompress(std::span<const std::uint8_t> archive) {
  const Archive a = Archive::parse(archive);
  if ((a.flags & Archive::kFlagPpm) == 0) throw Error(ErrorCode::kConfigMismatch, "not a PPM archive");
  int order = -1;
  for (int k = 0; k <= PpmModel::kMaxOrder; ++k) {
    if (ppm_digest(k) == a.config_digest) order = k;
  }
  if (order < 0) throw Error(ErrorCode::kConfigMismatch, "unknown PPM order in archive");

  std::vector<std::uint8_t> out;
  if (a.original_length == 0) {
    if (!a.payload.empty()) throw Error(ErrorCode::kCorruptArchive, "payload present for empty input");
    return out;
  }
  PpmModel model(order);
  Decoder dec(a.payload);
  for (std::uint64_t n = 0; n < a.original_length; ++n) {
    const auto dist = model.distribution();
    std::uint32_t partial = 1;
    for (int i = 0; i < 8; ++i) {
      const int bit = dec.decode(Probability::from_double(bit_probability(dist, partial, i)));
      partial = (partial << 1) | static_cast<std::uint32_t>(bit);
    }
    const auto b = static_cast<std::uint8_t>(partial & 0xFFu);
    out.push_back(b);
    model.update(b);
  }
  if (!dec.fully_consumed()) throw Error(ErrorCode::kCorruptArchive, "trailing bytes after coded stream");
  return out;
}

}  // namespace cmx
