#include "cmx/classify.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>

#include "cmx/error.hpp"

namespace cmx {

namespace {

void check_training_set(const TrainingSet& classes) {
  if (classes.size() < 2) throw Error(ErrorCode::kInvalidInput, "need at least two classes");
  for (const auto& [label, docs] : classes) {
    if (docs.empty()) throw Error(ErrorCode::kInvalidInput, "class '" + label + "' has no documents");
  }
}

Document concat(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  Document out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

double archive_size(std::span<const std::uint8_t> bytes, const Config& config) {
  return static_cast<double>(compress(bytes, config).size());
}

}  // namespace

std::string best_label(const std::map<std::string, double>& scores) {
  if (scores.empty()) throw Error(ErrorCode::kInvalidInput, "no scores");
  auto best = scores.begin();
  for (auto it = scores.begin(); it != scores.end(); ++it) {
    if (it->second < best->second) best = it;
  }
  return best->first;
}

SmdlClassifier SmdlClassifier::train(const TrainingSet& classes, const Config& config) {
  check_training_set(classes);
  SmdlClassifier c;
  for (const auto& [label, docs] : classes) {
    Predictor p(config);
    for (const auto& d : docs) p.train(d);
    c.counters_.train_bytes += p.bytes_processed();
    c.models_.push_back({label, p.snapshot(), p.bytes_processed()});
  }
  return c;
}

Scored SmdlClassifier::classify(std::span<const std::uint8_t> test) const {
  if (models_.empty()) throw Error(ErrorCode::kInvalidInput, "classifier has no models");
  std::vector<std::future<std::pair<double, std::uint64_t>>> jobs;
  for (const auto& m : models_) {
    jobs.push_back(std::async(std::launch::async, [&m, test] {
      Predictor p = Predictor::restore(m.snap);
      const std::uint64_t before = p.bytes_processed();
      const double ce = p.cross_entropy_of(test);
      return std::pair{ce, p.bytes_processed() - before};
    }));
  }
  Scored out;
  for (std::size_t i = 0; i < models_.size(); ++i) {
    const auto [ce, processed] = jobs[i].get();
    out.scores[models_[i].label] = ce;
    counters_.test_bytes += processed;
  }
  out.label = best_label(out.scores);
  return out;
}

Scored amdl_classify(const TrainingSet& classes, std::span<const std::uint8_t> test, const Config& config) {
  check_training_set(classes);
  Scored out;
  for (const auto& [label, docs] : classes) {
    Document all;
    for (const auto& d : docs) all.insert(all.end(), d.begin(), d.end());
    out.scores[label] = archive_size(concat(all, test), config) - archive_size(all, config);
  }
  out.label = best_label(out.scores);
  return out;
}

Scored bcn_classify(const TrainingSet& classes, std::span<const std::uint8_t> test, const Config& config) {
  check_training_set(classes);
  Scored out;
  for (const auto& [label, docs] : classes) {
    double best = INFINITY;
    for (const auto& d : docs) best = std::min(best, archive_size(concat(d, test), config) - archive_size(d, config));
    out.scores[label] = best;
  }
  out.label = best_label(out.scores);
  return out;
}

namespace {

double indicator(const Image& img, int x, int y) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return 0.0;
  return is_foreground(img, x, y) ? 1.0 : 0.0;
}

// Pixel (x, y) is sampled at its integer coordinates.
double bilinear(const Image& img, double fx, double fy) {
  const double x0 = std::floor(fx);
  const double y0 = std::floor(fy);
  const double tx = fx - x0;
  const double ty = fy - y0;
  const int ix = static_cast<int>(x0);
  const int iy = static_cast<int>(y0);
  return (1 - ty) * ((1 - tx) * indicator(img, ix, iy) + tx * indicator(img, ix + 1, iy)) +
         ty * ((1 - tx) * indicator(img, ix, iy + 1) + tx * indicator(img, ix + 1, iy + 1));
}

}  // namespace

std::vector<std::uint8_t> shape_to_series(const Image& img, int n_measurements) {
  if (n_measurements < 1) throw Error(ErrorCode::kInvalidInput, "need at least one measurement");
  double sx = 0, sy = 0;
  std::size_t count = 0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (is_foreground(img, x, y)) {
        sx += x;
        sy += y;
        ++count;
      }
    }
  }
  if (count == 0) throw Error(ErrorCode::kInvalidInput, "image has no foreground pixels");
  const double cx = sx / static_cast<double>(count);
  const double cy = sy / static_cast<double>(count);

  constexpr double kStep = 0.25;
  const double max_dist = std::hypot(img.width, img.height) + 2.0;
  std::vector<std::uint8_t> series;
  series.reserve(n_measurements);
  for (int k = 0; k < n_measurements; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / n_measurements;
    const double dx = std::cos(theta);
    const double dy = -std::sin(theta);
    auto f = [&](double t) { return bilinear(img, cx + t * dx, cy + t * dy); };

    double last_inside = -1.0;
    for (double t = 0.0; t <= max_dist; t += kStep) {
      if (f(t) >= 0.5) last_inside = t;
    }
    double d = 0.0;
    if (last_inside >= 0.0) {
      double lo = last_inside;
      double hi = last_inside + kStep;
      for (int i = 0; i < 40; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) >= 0.5 ? lo : hi) = mid;
      }
      d = lo;
    }
    const long v = std::lround(100.0 * d / img.width);
    series.push_back(static_cast<std::uint8_t>(std::clamp(v, 0L, 255L)));
  }
  return series;
}

std::vector<std::uint8_t> raster_scan(const Image& img) { return img.pixels; }

std::pair<int, int> hilbert_d2xy(int n, std::uint64_t d) {
  std::uint64_t t = d;
  int x = 0, y = 0;
  for (int s = 1; s < n; s *= 2) {
    const int rx = static_cast<int>(1 & (t / 2));
    const int ry = static_cast<int>(1 & (t ^ static_cast<std::uint64_t>(rx)));
    if (ry == 0) {
      if (rx == 1) {
        x = s - 1 - x;
        y = s - 1 - y;
      }
      std::swap(x, y);
    }
    x += s * rx;
    y += s * ry;
    t /= 4;
  }
  return {x, y};
}

std::vector<std::uint8_t> hilbert_scan(const Image& img) {
  int n = 1;
  while (n < img.width || n < img.height) n *= 2;
  std::vector<std::uint8_t> out;
  out.reserve(img.pixels.size());
  const std::uint64_t cells = static_cast<std::uint64_t>(n) * n;
  for (std::uint64_t d = 0; d < cells; ++d) {
    const auto [x, y] = hilbert_d2xy(n, d);
    if (x >= img.width || y >= img.height) continue;
    for (int c = 0; c < img.channels; ++c) out.push_back(img.at(x, y, c));
  }
  return out;
}

}  // namespace cmx
