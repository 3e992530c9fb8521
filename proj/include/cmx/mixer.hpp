#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cmx {

inline constexpr int kNumSets = 7;

using NodeIndices = std::array<std::uint32_t, kNumSets>;
using SetSizes = std::array<std::uint32_t, kNumSets>;

// Hidden-layer set sizes of the full-scale network.
inline constexpr SetSizes kFullSetSizes{264, 256, 128, 256, 256, 256, 1536};

// Full set sizes divided by `divisor` (each at least 1).
SetSizes scaled_set_sizes(int divisor);

// Inputs to the deterministic gating network.
struct GateInputs {
  std::uint32_t partial_byte = 1;     // history(0): bits of the current byte with a leading 1
  std::uint32_t last_four_bytes = 0;  // history(1) is the low byte
  std::uint32_t low_order_matches = 0;  // 0..7
  std::uint32_t longest_match = 0;      // 0..65534
  std::uint32_t bit_position = 0;       // 0..7

  // history(0) is the partial byte; history(1..4) come from last_four_bytes.
  std::uint32_t history(int i) const;
};

// Node index per set, computed exactly as the reference gating algorithm,
// before any reduction to the set size. All arithmetic is 32-bit unsigned
// with truncating division; log2(0) maps to 0.
NodeIndices gate_indices(const GateInputs& g);

// gate_indices reduced modulo each set size.
NodeIndices select_nodes(const GateInputs& g, const SetSizes& sizes);

double dot(std::span<const double> w, std::span<const double> x);

// squash(w . x)
double mix(std::span<const double> w, std::span<const double> x);

// w <- w - eta * (pi - y) * x
void sgd_update(std::span<double> w, std::span<const double> x, int y, double pi, double eta);

// First layer: kNumSets sets of nodes, one weight vector of length
// n_inputs per node. Exactly one node per set is active for each bit.
class MixerLayer {
 public:
  MixerLayer(const SetSizes& sizes, std::size_t n_inputs, double init_weight);

  std::size_t n_inputs() const { return n_inputs_; }
  const SetSizes& sizes() const { return sizes_; }

  std::span<double> weights(int set, std::uint32_t node);
  std::span<const double> weights(int set, std::uint32_t node) const;

  // Output probability of each selected node.
  std::array<double, kNumSets> forward(std::span<const double> inputs,
                                       const NodeIndices& nodes) const;

  // Trains only the selected nodes, each towards `bit` from its own output.
  void update(std::span<const double> inputs, const NodeIndices& nodes,
              const std::array<double, kNumSets>& outputs, int bit, double eta);

  std::span<const double> all_weights() const { return weights_; }
  std::span<double> all_weights() { return weights_; }

 private:
  std::size_t offset(int set, std::uint32_t node) const;

  SetSizes sizes_;
  std::size_t n_inputs_;
  std::array<std::size_t, kNumSets> set_base_{};
  std::vector<double> weights_;
};

using Vec7 = std::array<double, kNumSets>;
using Mat7 = std::array<std::array<double, kNumSets>, kNumSets>;

struct EkfParams {
  double q = 0.15;   // process noise, Q = q * I
  double p0 = 60.0;  // initial covariance, P = p0 * I
  double w0 = 150.0; // initial weight for every input
  double r = 5.0;    // observation noise

  friend bool operator==(const EkfParams&, const EkfParams&) = default;
};

// Extended Kalman filter over the seven output-layer weights of a
// logistic observation model pi = squash(w . x).
struct EkfState {
  Vec7 w{};
  Mat7 P{};
  Mat7 Q{};
  double r = 0.0;
  Vec7 G{};  // Jacobian of the last update

  static EkfState initial(const EkfParams& params);
};

// One predict/correct step: P += Q; G = pi(1-pi)x; K = P G' / (r + G P G');
// w += K (y - pi); P -= K G P; P symmetrized.
// Throws Error(kNumericalFailure) if r + G P G' <= 0.
void ekf_update(EkfState& s, const Vec7& x, int y, double pi);

}  // namespace cmx
