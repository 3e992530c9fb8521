#include "corpora.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace cmx::testing {

MarkovSource::MarkovSource(std::string alphabet, int order, std::uint64_t seed, int successors)
    : alphabet_(std::move(alphabet)), order_(order) {
  std::mt19937_64 rng(seed);
  const std::size_t a = alphabet_.size();
  std::size_t contexts = 1;
  for (int i = 0; i < order; ++i) contexts *= a;
  std::uniform_int_distribution<std::size_t> pick(0, a - 1);
  std::exponential_distribution<double> weight(1.0);
  cumulative_.resize(contexts);
  for (auto& cum : cumulative_) {
    std::vector<double> w(a, 0.002);
    for (int k = 0; k < successors; ++k) w[pick(rng)] += std::pow(weight(rng), 2.0) + 0.05;
    double total = 0;
    cum.resize(a);
    for (std::size_t i = 0; i < a; ++i) {
      total += w[i];
      cum[i] = total;
    }
    for (auto& c : cum) c /= total;
  }
}

std::size_t MarkovSource::context_index(const std::string& text) const {
  std::size_t idx = 0;
  for (int i = order_; i >= 1; --i) {
    const char c = text.size() >= static_cast<std::size_t>(i) ? text[text.size() - i] : alphabet_[0];
    idx = idx * alphabet_.size() + alphabet_.find(c);
  }
  return idx;
}

std::string MarkovSource::generate(std::size_t n, std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::string out;
  out.reserve(n);
  while (out.size() < n) {
    const auto& cum = cumulative_[context_index(out)];
    const double r = u(rng);
    const auto it = std::lower_bound(cum.begin(), cum.end(), r);
    out.push_back(alphabet_[std::min<std::size_t>(it - cum.begin(), alphabet_.size() - 1)]);
  }
  return out;
}

std::string MarkovSource::generate(std::size_t n, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  return generate(n, rng);
}

std::string markov_text(std::size_t n, std::uint64_t seed) {
  const MarkovSource src(kLetters, 2, seed);
  return src.generate(n, seed ^ 0x5DEECE66Dull);
}

std::vector<std::uint8_t> random_bytes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng() >> 56);
  return out;
}

std::string mixed_corpus(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const MarkovSource text(kLetters, 2, seed + 1);
  const MarkovSource code("{}();=+-*/<>ifwhlrtn \n", 3, seed + 2, 3);
  std::string out;
  out.reserve(n + 4096);
  int block = 0;
  while (out.size() < n) {
    const std::size_t len = 2048 + rng() % 8192;
    switch (block++ % 5) {
      case 0:
        out += text.generate(len, rng);
        break;
      case 1: {
        std::uniform_int_distribution<int> qty(1, 999);
        std::uniform_int_distribution<int> item(0, 15);
        std::size_t start = out.size();
        while (out.size() - start < len) {
          out += "id=" + std::to_string(out.size() % 100000) + ";item=" + std::to_string(item(rng)) +
                 ";qty=" + std::to_string(qty(rng)) + "\n";
        }
        break;
      }
      case 2: {
        const std::string unit = text.generate(8 + rng() % 40, rng);
        for (std::size_t i = 0; i < len; ++i) out.push_back(unit[i % unit.size()]);
        break;
      }
      case 3:
        out += code.generate(len, rng);
        break;
      case 4:
        for (std::size_t i = 0; i < len / 4; ++i) out.push_back(static_cast<char>(rng() >> 56));
        break;
    }
  }
  out.resize(n);
  return out;
}

double order0_entropy(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw std::invalid_argument("empty input");
  std::array<double, 256> counts;
  counts.fill(1.0);
  double total = 256.0;
  double bits = 0.0;
  for (auto b : bytes) {
    bits -= std::log2(counts[b] / total);
    counts[b] += 1.0;
    total += 1.0;
  }
  return bits / static_cast<double>(bytes.size());
}

}  // namespace cmx::testing
