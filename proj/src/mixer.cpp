#include "cmx/mixer.hpp"

#include <algorithm>
#include <cmath>

#include "cmx/error.hpp"
#include "cmx/probability.hpp"

namespace cmx {

SetSizes scaled_set_sizes(int divisor) {
  if (divisor < 1) throw Error(ErrorCode::kInvalidInput, "set divisor must be >= 1");
  SetSizes out;
  for (int i = 0; i < kNumSets; ++i) {
    out[i] = std::max<std::uint32_t>(1, kFullSetSizes[i] / static_cast<std::uint32_t>(divisor));
  }
  return out;
}

std::uint32_t GateInputs::history(int i) const {
  if (i == 0) return partial_byte;
  return (last_four_bytes >> (8 * (i - 1))) & 0xFFu;
}

NodeIndices gate_indices(const GateInputs& g) {
  NodeIndices idx{};
  idx[0] = 8 + g.history(1);
  idx[1] = g.history(0);
  idx[2] = g.low_order_matches + 8 * ((g.last_four_bytes / 32) % 8);
  if (g.history(1) == g.history(2)) idx[2] += 64;
  idx[3] = g.history(2);
  idx[4] = g.history(3);
  idx[5] = g.longest_match == 0
               ? 0
               : static_cast<std::uint32_t>(std::lround(std::log2(g.longest_match) * 16.0));

  std::uint32_t s7;
  if (g.bit_position == 0) {
    s7 = g.history(3) / 128 + (g.history(1) & 240u) + 4 * (g.history(2) / 64) +
         2 * (g.last_four_bytes / (1u << 31));
  } else {
    s7 = g.history(0) * (1u << (8 - g.bit_position));
    if (g.bit_position == 1) s7 += g.history(3) / 2;
    s7 = std::min<std::uint32_t>(g.bit_position, 5) * 256 + g.history(1) / 32 +
         8 * (g.history(2) / 32) + (s7 & 192u);
  }
  idx[6] = s7;
  return idx;
}

NodeIndices select_nodes(const GateInputs& g, const SetSizes& sizes) {
  NodeIndices idx = gate_indices(g);
  for (int i = 0; i < kNumSets; ++i) idx[i] %= sizes[i];
  return idx;
}

double dot(std::span<const double> w, std::span<const double> x) {
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) sum += w[i] * x[i];
  return sum;
}

double mix(std::span<const double> w, std::span<const double> x) { return squash(dot(w, x)); }

void sgd_update(std::span<double> w, std::span<const double> x, int y, double pi, double eta) {
  const double err = eta * (y - pi);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += err * x[i];
}

MixerLayer::MixerLayer(const SetSizes& sizes, std::size_t n_inputs, double init_weight)
    : sizes_(sizes), n_inputs_(n_inputs) {
  std::size_t total = 0;
  for (int s = 0; s < kNumSets; ++s) {
    set_base_[s] = total;
    total += sizes[s];
  }
  weights_.assign(total * n_inputs, init_weight);
}

std::size_t MixerLayer::offset(int set, std::uint32_t node) const {
  return (set_base_[set] + node) * n_inputs_;
}

std::span<double> MixerLayer::weights(int set, std::uint32_t node) {
  return std::span<double>(weights_).subspan(offset(set, node), n_inputs_);
}

std::span<const double> MixerLayer::weights(int set, std::uint32_t node) const {
  return std::span<const double>(weights_).subspan(offset(set, node), n_inputs_);
}

std::array<double, kNumSets> MixerLayer::forward(std::span<const double> inputs,
                                                 const NodeIndices& nodes) const {
  std::array<double, kNumSets> out{};
  for (int s = 0; s < kNumSets; ++s) out[s] = mix(weights(s, nodes[s]), inputs);
  return out;
}

void MixerLayer::update(std::span<const double> inputs, const NodeIndices& nodes,
                        const std::array<double, kNumSets>& outputs, int bit, double eta) {
  for (int s = 0; s < kNumSets; ++s) sgd_update(weights(s, nodes[s]), inputs, bit, outputs[s], eta);
}

EkfState EkfState::initial(const EkfParams& params) {
  EkfState s;
  s.w.fill(params.w0);
  for (int i = 0; i < kNumSets; ++i) {
    s.P[i][i] = params.p0;
    s.Q[i][i] = params.q;
  }
  s.r = params.r;
  return s;
}

void ekf_update(EkfState& s, const Vec7& x, int y, double pi) {
  constexpr int n = kNumSets;
  // Time update: w unchanged, P += Q.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s.P[i][j] += s.Q[i][j];

  const double slope = pi * (1.0 - pi);
  for (int i = 0; i < n; ++i) s.G[i] = slope * x[i];

  Vec7 pg{};  // P G'
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += s.P[i][j] * s.G[j];
    pg[i] = acc;
  }
  double denom = s.r;
  for (int i = 0; i < n; ++i) denom += s.G[i] * pg[i];
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw Error(ErrorCode::kNumericalFailure, "EKF innovation variance is not positive");
  }

  Vec7 k{};
  for (int i = 0; i < n; ++i) k[i] = pg[i] / denom;
  const double innovation = y - pi;
  for (int i = 0; i < n; ++i) s.w[i] += k[i] * innovation;

  // G P = (P G')' since P is symmetric.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s.P[i][j] -= k[i] * pg[j];

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (s.P[i][j] + s.P[j][i]);
      s.P[i][j] = avg;
      s.P[j][i] = avg;
    }
  }
}

}  // namespace cmx
