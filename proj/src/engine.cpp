#include "cmx/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cmx/coder.hpp"
#include "cmx/error.hpp"
#include "serialize.hpp"

namespace cmx {

namespace {

std::vector<ContextSpec> default_specs() {
  return {ContextSpec::order(1), ContextSpec::order(2), ContextSpec::order(3),
          ContextSpec::order(4), ContextSpec::order(6), ContextSpec::order(8),
          ContextSpec::sparse({1, 3})};
}

constexpr std::array<std::uint8_t, 4> kSnapshotMagic{'C', 'M', 'X', 'S'};

void put_le64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le64(std::span<const std::uint8_t> in) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | in[i];
  return v;
}

}  // namespace

Predictor::Predictor(const Config& config)
    : config_(config),
      specs_(default_specs()),
      match_(std::max(config.table_bits - 2, 8)),
      layer1_(scaled_set_sizes(config.set_divisor), kInputs, config.layer1_init),
      ekf_(EkfState::initial(config.ekf)),
      apm_(256, config.apm_rate) {
  models_.reserve(specs_.size());
  for (std::size_t i = 0; i < specs_.size(); ++i) models_.emplace_back(config.table_bits);
  layer2_.fill(config.layer2_init * kWeightUnit);
  // Observation noise is specified on the 12-bit scale; the filter runs on [0,1].
  ekf_.r = config.ekf.r / (kEkfObservationScale * kEkfObservationScale);
  refresh_contexts();
}

void Predictor::refresh_contexts() {
  const auto& hist = match_.history();
  std::uint32_t seen = 0;
  for (int i = 0; i < kContextModels; ++i) {
    hashes_[i] = context_hash(hist, specs_[i], static_cast<std::uint64_t>(i));
    if (models_[i].counter(hashes_[i], 1).seen()) ++seen;
  }
  gate_.low_order_matches = std::min<std::uint32_t>(seen, 7);
}

Predictor::Forward Predictor::forward(std::uint32_t partial, int bit_pos) const {
  Forward f;
  for (int i = 0; i < kContextModels; ++i) {
    f.inputs[i] = clamp_stretch(stretch(models_[i].predict(hashes_[i], partial)));
  }
  const auto match = match_.predict(partial, bit_pos);
  f.inputs[kContextModels] = clamp_stretch(stretch(match.p));
  f.inputs[kContextModels + 1] = kBias;

  GateInputs g = gate_;
  g.partial_byte = partial;
  g.bit_position = static_cast<std::uint32_t>(bit_pos);
  g.longest_match = match.length;
  f.nodes = select_nodes(g, layer1_.sizes());

  f.hidden = layer1_.forward(f.inputs, f.nodes);
  for (int s = 0; s < kNumSets; ++s) f.hidden_stretch[s] = clamp_stretch(stretch(f.hidden[s]));

  if (config_.second_layer == SecondLayer::kEkf) {
    f.mixed = squash(dot(ekf_.w, f.hidden_stretch) * kWeightUnit);
  } else {
    f.mixed = squash(dot(layer2_, f.hidden_stretch));
  }
  f.refined = config_.apm_enabled ? 0.5 * (f.mixed + apm_.apply(f.mixed, partial)) : f.mixed;
  f.p = Probability::from_double(f.refined);
  return f;
}

Probability Predictor::predict_bit() {
  pending_ = forward(partial_, bit_pos_);
  return pending_->p;
}

void Predictor::update_bit(int bit) {
  if (!pending_) pending_ = forward(partial_, bit_pos_);
  const Forward& f = *pending_;

  layer1_.update(f.inputs, f.nodes, f.hidden, bit, config_.eta);
  if (config_.second_layer == SecondLayer::kEkf) {
    Vec7 x;
    for (int s = 0; s < kNumSets; ++s) x[s] = f.hidden_stretch[s] * kWeightUnit;
    ekf_update(ekf_, x, bit, f.mixed);
  } else {
    sgd_update(layer2_, f.hidden_stretch, bit, f.mixed, config_.eta);
  }
  if (config_.apm_enabled) apm_.update(f.mixed, partial_, bit);
  for (int i = 0; i < kContextModels; ++i) models_[i].update(hashes_[i], partial_, bit);

  pending_.reset();
  partial_ = (partial_ << 1) | static_cast<std::uint32_t>(bit);
  if (++bit_pos_ == 8) end_byte(static_cast<std::uint8_t>(partial_ & 0xFFu));
}

void Predictor::end_byte(std::uint8_t byte) {
  match_.update(byte);
  gate_.last_four_bytes = (gate_.last_four_bytes << 8) | byte;
  partial_ = 1;
  bit_pos_ = 0;
  ++bytes_processed_;
  refresh_contexts();
}

double Predictor::update_byte(std::uint8_t byte) {
  double bits = 0.0;
  for (int i = 7; i >= 0; --i) {
    const int bit = (byte >> i) & 1;
    bits += cost_bits(predict_bit(), bit);
    update_bit(bit);
  }
  return bits;
}

double Predictor::train(std::span<const std::uint8_t> bytes) {
  double bits = 0.0;
  for (auto b : bytes) bits += update_byte(b);
  return bits;
}

double Predictor::cross_entropy_of(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw Error(ErrorCode::kInvalidInput, "cross entropy of empty input is undefined");
  return train(bytes) / static_cast<double>(bytes.size());
}

double Predictor::byte_probability(std::uint8_t byte) const {
  if (bit_pos_ != 0) throw std::logic_error("byte_probability requires a byte boundary");
  double p = 1.0;
  std::uint32_t partial = 1;
  for (int i = 0; i < 8; ++i) {
    const int bit = (byte >> (7 - i)) & 1;
    p *= forward(partial, i).p.of(bit);
    partial = (partial << 1) | static_cast<std::uint32_t>(bit);
  }
  return p;
}

std::uint8_t Predictor::most_likely_byte() const {
  if (bit_pos_ != 0) throw std::logic_error("most_likely_byte requires a byte boundary");
  double best_p = -1.0;
  std::uint32_t best = 0;
  // Depth-first, likelier branch first; prune branches that cannot beat the best leaf.
  auto search = [&](auto&& self, std::uint32_t partial, int depth, double prob) -> void {
    if (depth == 8) {
      if (prob > best_p) {
        best_p = prob;
        best = partial & 0xFFu;
      }
      return;
    }
    const double p1 = forward(partial, depth).p.value();
    const int first = p1 >= 0.5 ? 1 : 0;
    for (int bit : {first, 1 - first}) {
      const double q = prob * (bit ? p1 : 1.0 - p1);
      if (q > best_p) self(self, (partial << 1) | static_cast<std::uint32_t>(bit), depth + 1, q);
    }
  };
  search(search, 1, 0, 1.0);
  return static_cast<std::uint8_t>(best);
}

std::string Predictor::predict_next_chars(int n) const {
  std::string out;
  if (n <= 0) return out;
  Predictor scratch(*this);
  scratch.pending_.reset();
  for (int i = 0; i < n; ++i) {
    const std::uint8_t b = scratch.most_likely_byte();
    out.push_back(static_cast<char>(b));
    scratch.update_byte(b);
  }
  return out;
}

std::size_t Predictor::memory_bytes() const {
  std::size_t total = sizeof(*this);
  for (const auto& m : models_) total += m.table_size() * sizeof(BitCounter);
  total += match_.history().capacity();
  total += match_.index_.size() * (std::size_t{1} << match_.index_bits()) * sizeof(std::uint32_t);
  total += layer1_.all_weights().size() * sizeof(double);
  total += apm_.cells().size() * sizeof(double);
  return total;
}

Snapshot Predictor::snapshot() const {
  detail::ByteWriter w;
  w.put(kSnapshotMagic);
  w.put(Snapshot::kVersion);
  w.put_string(config_.canonical());
  w.put(config_.ppm_order);
  for (const auto& m : models_) w.put_span(m.table());
  w.put_span(std::span<const std::uint64_t>(hashes_));
  w.put_span(std::span<const std::uint8_t>(match_.history_));
  for (const auto& idx : match_.index_) w.put_span(std::span<const std::uint32_t>(idx));
  w.put<std::uint64_t>(match_.ptr_);
  w.put(match_.length_);
  w.put_span(layer1_.all_weights());
  w.put(layer2_);
  w.put(ekf_);
  w.put_span(apm_.cells());
  w.put(gate_);
  w.put(partial_);
  w.put(bit_pos_);
  w.put(bytes_processed_);
  return Snapshot{w.take()};
}

Predictor Predictor::restore(const Snapshot& snap) {
  detail::ByteReader r(snap.bytes);
  if (r.get<std::array<std::uint8_t, 4>>() != kSnapshotMagic) {
    throw Error(ErrorCode::kBadMagic, "not a predictor snapshot");
  }
  if (r.get<std::uint32_t>() != Snapshot::kVersion) {
    throw Error(ErrorCode::kVersionMismatch, "unsupported snapshot version");
  }
  Config config = Config::parse(r.get_string());
  config.ppm_order = r.get<int>();
  Predictor p(config);
  for (auto& m : p.models_) r.get_into(m.table());
  r.get_into(std::span<std::uint64_t>(p.hashes_));
  p.match_.history_ = r.get_vector<std::uint8_t>();
  for (auto& idx : p.match_.index_) r.get_into(std::span<std::uint32_t>(idx));
  p.match_.ptr_ = static_cast<std::size_t>(r.get<std::uint64_t>());
  p.match_.length_ = r.get<std::uint32_t>();
  r.get_into(p.layer1_.all_weights());
  p.layer2_ = r.get<Vec7>();
  p.ekf_ = r.get<EkfState>();
  r.get_into(p.apm_.cells());
  p.gate_ = r.get<GateInputs>();
  p.partial_ = r.get<std::uint32_t>();
  p.bit_pos_ = r.get<int>();
  p.bytes_processed_ = r.get<std::uint64_t>();
  if (r.remaining() != 0) throw Error(ErrorCode::kCorruptArchive, "trailing bytes in snapshot");
  if (p.match_.length_ > 0 && p.match_.ptr_ >= p.match_.history_.size()) {
    throw Error(ErrorCode::kCorruptArchive, "match pointer outside history");
  }
  return p;
}

std::uint64_t Predictor::state_digest() const {
  const auto snap = snapshot();
  return fnv1a64(std::string_view(reinterpret_cast<const char*>(snap.bytes.data()), snap.bytes.size()));
}

std::vector<std::uint8_t> Archive::serialize() const {
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  out.push_back(version);
  out.push_back(flags);
  put_le64(out, config_digest);
  put_le64(out, original_length);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Archive Archive::parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::kBadMagic, "not a CMX1 archive");
  }
  if (bytes.size() < kHeaderSize) throw Error(ErrorCode::kTruncated, "archive header truncated");
  Archive a;
  a.version = bytes[4];
  if (a.version != kVersion) throw Error(ErrorCode::kVersionMismatch, "unsupported archive version");
  a.flags = bytes[5];
  a.config_digest = get_le64(bytes.subspan(6, 8));
  a.original_length = get_le64(bytes.subspan(14, 8));
  a.payload.assign(bytes.begin() + kHeaderSize, bytes.end());
  return a;
}

std::vector<std::uint8_t> compress(std::span<const std::uint8_t> bytes, const Config& config) {
  Archive a;
  a.flags = config.second_layer == SecondLayer::kEkf ? Archive::kFlagEkf : 0;
  a.config_digest = config.digest();
  a.original_length = bytes.size();
  if (!bytes.empty()) {
    Predictor pred(config);
    Encoder enc;
    for (auto b : bytes) {
      for (int i = 7; i >= 0; --i) {
        const int bit = (b >> i) & 1;
        enc.encode(bit, pred.predict_bit());
        pred.update_bit(bit);
      }
    }
    a.payload = enc.finish();
  }
  return a.serialize();
}

std::vector<std::uint8_t> decompress(std::span<const std::uint8_t> archive, const Config& config) {
  const Archive a = Archive::parse(archive);
  if ((a.flags & Archive::kFlagPpm) != 0) {
    throw Error(ErrorCode::kConfigMismatch, "archive holds a PPM stream");
  }
  if (a.config_digest != config.digest()) {
    throw Error(ErrorCode::kConfigMismatch, "archive was made with a different model configuration");
  }
  std::vector<std::uint8_t> out;
  if (a.original_length == 0) {
    if (!a.payload.empty()) throw Error(ErrorCode::kCorruptArchive, "payload present for empty input");
    return out;
  }
  out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(a.original_length, 1u << 30)));
  Predictor pred(config);
  Decoder dec(a.payload);
  for (std::uint64_t n = 0; n < a.original_length; ++n) {
    std::uint32_t c = 0;
    for (int i = 0; i < 8; ++i) {
      const int bit = dec.decode(pred.predict_bit());
      pred.update_bit(bit);
      c = (c << 1) | static_cast<std::uint32_t>(bit);
    }
    out.push_back(static_cast<std::uint8_t>(c));
  }
  if (!dec.fully_consumed()) throw Error(ErrorCode::kCorruptArchive, "trailing bytes after coded stream");
  return out;
}

Config resolve_config(const Archive& archive, const Config& base) {
  for (int level = 0; level <= Config::kMaxLevel; ++level) {
    Config c = base;
    c.table_bits = 16 + level;
    c.second_layer = (archive.flags & Archive::kFlagEkf) ? SecondLayer::kEkf : SecondLayer::kSgd;
    if (c.digest() == archive.config_digest) return c;
  }
  if (base.digest() == archive.config_digest) return base;
  throw Error(ErrorCode::kConfigMismatch, "no known configuration matches the archive digest");
}

std::vector<std::uint8_t> decompress(std::span<const std::uint8_t> archive) {
  return decompress(archive, resolve_config(Archive::parse(archive)));
}

}  // namespace cmx
