#include "cmx/distances.hpp"

#include <algorithm>
#include <vector>

#include "cmx/engine.hpp"
#include "cmx/error.hpp"

namespace cmx {

namespace {

void require_nonempty(Bytes x, const char* what) {
  if (x.empty()) throw Error(ErrorCode::kInvalidInput, std::string(what) + " must be non-empty");
}

std::vector<std::uint8_t> concat(Bytes x, Bytes y) {
  std::vector<std::uint8_t> xy(x.begin(), x.end());
  xy.insert(xy.end(), y.begin(), y.end());
  return xy;
}

}  // namespace

double EngineCompressor::size_of(Bytes x) const {
  Predictor p(config_);
  return p.train(x) / 8.0;
}

double EngineCompressor::size_of_given(Bytes x, Bytes y) const {
  Predictor p(config_);
  p.train(y);
  return p.train(x) / 8.0;
}

double EngineCompressor::entropy_given(Bytes x, Bytes y) const {
  Predictor p(config_);
  p.train(y);
  return p.cross_entropy_of(x);
}

double d_c(const CompressorHandle& c, Bytes x, Bytes y) {
  require_nonempty(x, "x");
  require_nonempty(y, "y");
  return (c.size_of_given(x, y) + c.size_of_given(y, x)) / c.size_of(concat(x, y));
}

double d_e1(const CompressorHandle& c, Bytes x, Bytes y) {
  require_nonempty(x, "x");
  return c.entropy_given(x, y);
}

double d_e2(const CompressorHandle& c, Bytes x, Bytes y) {
  require_nonempty(x, "x");
  require_nonempty(y, "y");
  return (c.entropy_given(x, y) + c.entropy_given(y, x)) / 2.0;
}

double d_ncd(const CompressorHandle& c, Bytes x, Bytes y) {
  require_nonempty(x, "x");
  require_nonempty(y, "y");
  const double cx = c.size_of(x);
  const double cy = c.size_of(y);
  return (c.size_of(concat(x, y)) - std::min(cx, cy)) / std::max(cx, cy);
}

double d_cdm(const CompressorHandle& c, Bytes x, Bytes y) {
  require_nonempty(x, "x");
  require_nonempty(y, "y");
  return c.size_of(concat(x, y)) / (c.size_of(x) + c.size_of(y));
}

Metric parse_metric(std::string_view name) {
  if (name == "c") return Metric::kC;
  if (name == "e1") return Metric::kE1;
  if (name == "e2") return Metric::kE2;
  if (name == "ncd") return Metric::kNcd;
  if (name == "cdm") return Metric::kCdm;
  throw Error(ErrorCode::kInvalidInput, "unknown metric: " + std::string(name));
}

double distance(Metric m, const CompressorHandle& c, Bytes x, Bytes y) {
  switch (m) {
    case Metric::kC: return d_c(c, x, y);
    case Metric::kE1: return d_e1(c, x, y);
    case Metric::kE2: return d_e2(c, x, y);
    case Metric::kNcd: return d_ncd(c, x, y);
    case Metric::kCdm: return d_cdm(c, x, y);
  }
  throw Error(ErrorCode::kInvalidInput, "unknown metric");
}

}  // namespace cmx
