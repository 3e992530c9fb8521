#include "cmx/config.hpp"

#include <charconv>
#include <sstream>

#include "cmx/error.hpp"

namespace cmx {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::kInvalidInput,
                "bad value '" + std::string(value) + "' for " + std::string(key));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw Error(ErrorCode::kInvalidInput, "bad boolean for " + std::string(key));
}

std::string format(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

Config Config::for_level(int level) {
  if (level < 0 || level > kMaxLevel) {
    throw Error(ErrorCode::kInvalidInput, "level must be in [0, 8]");
  }
  Config c;
  c.table_bits = 16 + level;
  return c;
}

void Config::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "models.table_bits") {
    table_bits = parse_number<int>(key, value);
    if (table_bits < 4 || table_bits > 28) throw Error(ErrorCode::kInvalidInput, "table_bits out of range");
  } else if (key == "mixer.eta") {
    eta = parse_number<double>(key, value);
  } else if (key == "mixer.set_divisor") {
    set_divisor = parse_number<int>(key, value);
    if (set_divisor < 1) throw Error(ErrorCode::kInvalidInput, "set_divisor must be >= 1");
  } else if (key == "mixer.second_layer") {
    if (value == "sgd") {
      second_layer = SecondLayer::kSgd;
    } else if (value == "ekf") {
      second_layer = SecondLayer::kEkf;
    } else {
      throw Error(ErrorCode::kInvalidInput, "mixer.second_layer must be sgd or ekf");
    }
  } else if (key == "mixer.layer1_init") {
    layer1_init = parse_number<double>(key, value);
  } else if (key == "mixer.layer2_init") {
    layer2_init = parse_number<double>(key, value);
  } else if (key == "ekf.q") {
    ekf.q = parse_number<double>(key, value);
  } else if (key == "ekf.p0") {
    ekf.p0 = parse_number<double>(key, value);
  } else if (key == "ekf.w0") {
    ekf.w0 = parse_number<double>(key, value);
  } else if (key == "ekf.r") {
    ekf.r = parse_number<double>(key, value);
    if (!(ekf.r > 0)) throw Error(ErrorCode::kInvalidInput, "ekf.r must be positive");
  } else if (key == "apm.enabled") {
    apm_enabled = parse_bool(key, value);
  } else if (key == "apm.rate") {
    apm_rate = parse_number<int>(key, value);
    if (apm_rate < 0 || apm_rate > 16) throw Error(ErrorCode::kInvalidInput, "apm.rate out of range");
  } else if (key == "ppm.order") {
    ppm_order = parse_number<int>(key, value);
    if (ppm_order < 0 || ppm_order > 16) throw Error(ErrorCode::kInvalidInput, "ppm.order out of range");
  } else {
    throw Error(ErrorCode::kInvalidInput, "unknown config key " + std::string(key));
  }
}

Config Config::parse(std::string_view text) {
  Config c;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidInput, "config line " + std::to_string(line_no) + " lacks '='");
    }
    c.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return c;
}

std::string Config::canonical() const {
  std::ostringstream out;
  out << "apm.enabled=" << (apm_enabled ? "true" : "false") << '\n'
      << "apm.rate=" << apm_rate << '\n'
      << "ekf.p0=" << format(ekf.p0) << '\n'
      << "ekf.q=" << format(ekf.q) << '\n'
      << "ekf.r=" << format(ekf.r) << '\n'
      << "ekf.w0=" << format(ekf.w0) << '\n'
      << "mixer.eta=" << format(eta) << '\n'
      << "mixer.layer1_init=" << format(layer1_init) << '\n'
      << "mixer.layer2_init=" << format(layer2_init) << '\n'
      << "mixer.second_layer=" << (second_layer == SecondLayer::kEkf ? "ekf" : "sgd") << '\n'
      << "mixer.set_divisor=" << set_divisor << '\n'
      << "models.table_bits=" << table_bits << '\n';
  return out.str();
}

std::uint64_t Config::digest() const { return fnv1a64(canonical()); }

}  // namespace cmx
