#include "cmx/probability.hpp"

#include <array>

#include "cmx/error.hpp"

namespace cmx {

namespace {

struct StretchTable {
  std::array<double, Probability::kScale> values{};

  StretchTable() {
    for (std::int64_t raw = Probability::kMinRaw; raw <= Probability::kMaxRaw; ++raw) {
      values[raw] = stretch(raw / static_cast<double>(Probability::kScale));
    }
  }
};

}  // namespace

double stretch(Probability p) {
  static const StretchTable table;
  return table.values[p.raw()];
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid input";
    case ErrorCode::kInvalidDistribution: return "invalid distribution";
    case ErrorCode::kBadMagic: return "bad magic";
    case ErrorCode::kVersionMismatch: return "version mismatch";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kCorruptArchive: return "corrupt archive";
    case ErrorCode::kConfigMismatch: return "config mismatch";
    case ErrorCode::kNumericalFailure: return "numerical failure";
    case ErrorCode::kNotFound: return "not found";
    case ErrorCode::kIo: return "i/o error";
  }
  return "unknown";
}

}  // namespace cmx
