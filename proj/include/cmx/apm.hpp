#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cmx {

// Adaptive probability map: per context row, a piecewise-linear refinement
// of an input probability over knots uniformly spaced in the stretch domain.
// Cells hold probabilities; interpolation happens between their stretches,
// so a fresh table is exactly the identity map.
class Apm {
 public:
  static constexpr int kKnots = 33;
  static constexpr double kMinStretch = -8.0;
  static constexpr double kMaxStretch = 8.0;
  static constexpr double kSpacing = (kMaxStretch - kMinStretch) / (kKnots - 1);

  explicit Apm(std::size_t contexts = 256, int rate = 7);

  double apply(double p, std::size_t ctx) const;

  // Moves the two cells bracketing p toward `bit`, each by its
  // interpolation weight / 2^rate. Uses the same (p, ctx) as apply.
  void update(double p, std::size_t ctx, int bit);

  double cell(std::size_t ctx, int knot) const { return cells_[ctx * kKnots + knot]; }
  static double knot_stretch(int knot) { return kMinStretch + knot * kSpacing; }

  int rate() const { return rate_; }
  std::size_t contexts() const { return contexts_; }
  std::span<const double> cells() const { return cells_; }
  std::span<double> cells() { return cells_; }

 private:
  struct Bracket {
    int lo;
    double weight_hi;  // may lie outside [0,1] beyond the outer knots
  };
  static Bracket bracket(double p);

  std::size_t contexts_;
  int rate_;
  std::vector<double> cells_;
};

}  // namespace cmx
