#include "cmx/apm.hpp"

#include <algorithm>
#include <cmath>

#include "cmx/error.hpp"
#include "cmx/probability.hpp"

namespace cmx {

namespace {

constexpr double kCellMin = 1.0 / Probability::kScale;
constexpr double kCellMax = 1.0 - kCellMin;

}  // namespace

Apm::Apm(std::size_t contexts, int rate) : contexts_(contexts), rate_(rate) {
  if (contexts == 0) throw Error(ErrorCode::kInvalidInput, "APM needs at least one context");
  if (rate < 0 || rate > 16) throw Error(ErrorCode::kInvalidInput, "APM rate must be in [0, 16]");
  cells_.resize(contexts * kKnots);
  for (std::size_t c = 0; c < contexts; ++c) {
    for (int k = 0; k < kKnots; ++k) cells_[c * kKnots + k] = squash(knot_stretch(k));
  }
}

Apm::Bracket Apm::bracket(double p) {
  p = std::clamp(p, kCellMin, kCellMax);
  const double pos = (stretch(p) - kMinStretch) / kSpacing;
  const int lo = std::clamp(static_cast<int>(std::floor(pos)), 0, kKnots - 2);
  return {lo, pos - lo};
}

double Apm::apply(double p, std::size_t ctx) const {
  const Bracket b = bracket(p);
  const double* row = &cells_[ctx * kKnots];
  const double s = (1.0 - b.weight_hi) * stretch(row[b.lo]) + b.weight_hi * stretch(row[b.lo + 1]);
  return squash(s);
}

void Apm::update(double p, std::size_t ctx, int bit) {
  const Bracket b = bracket(p);
  const double w_hi = std::clamp(b.weight_hi, 0.0, 1.0);
  const double step = 1.0 / static_cast<double>(1u << rate_);
  double* row = &cells_[ctx * kKnots];
  const double target = bit ? 1.0 : 0.0;
  row[b.lo] = std::clamp(row[b.lo] + (target - row[b.lo]) * (1.0 - w_hi) * step, kCellMin, kCellMax);
  row[b.lo + 1] =
      std::clamp(row[b.lo + 1] + (target - row[b.lo + 1]) * w_hi * step, kCellMin, kCellMax);
}

}  // namespace cmx
