#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cmx/config.hpp"
#include "cmx/engine.hpp"
#include "cmx/image.hpp"

namespace cmx {

using Document = std::vector<std::uint8_t>;
// Label -> training documents. std::map keeps labels in sort order.
using TrainingSet = std::map<std::string, std::vector<Document>>;

struct ClassModel {
  std::string label;
  Snapshot snap;
  std::uint64_t trained_bytes = 0;
};

struct Scored {
  std::string label;
  std::map<std::string, double> scores;  // lower is better
};

// Bytes pushed through a predictor, for checking how often each byte is
// compressed.
struct WorkCounters {
  std::uint64_t train_bytes = 0;
  std::uint64_t test_bytes = 0;
};

// SMDL: one model per class, trained once on the concatenation of the
// class's documents, scored by adaptive cross entropy.
class SmdlClassifier {
 public:
  // Throws Error(kInvalidInput) for fewer than 2 classes or an empty class.
  static SmdlClassifier train(const TrainingSet& classes, const Config& config = {});

  // Restores every class snapshot, scores `test` by cross entropy (the
  // restored model adapts while scoring) and returns the lowest; ties go to
  // the label that sorts first. Classes are scored concurrently.
  Scored classify(std::span<const std::uint8_t> test) const;

  const std::vector<ClassModel>& models() const { return models_; }
  const WorkCounters& counters() const { return counters_; }

 private:
  std::vector<ClassModel> models_;
  mutable WorkCounters counters_;
};

// AMDL: score = C(A_i T) - C(A_i) with C the archive size of compress().
Scored amdl_classify(const TrainingSet& classes, std::span<const std::uint8_t> test, const Config& config = {});

// BCN: score per class = min over its documents a of C(a T) - C(a).
Scored bcn_classify(const TrainingSet& classes, std::span<const std::uint8_t> test, const Config& config = {});

// Returns the label with the minimum score, first in sort order on ties.
std::string best_label(const std::map<std::string, double>& scores);

// Foreground = sample >= 128 on the first channel.
inline bool is_foreground(const Image& img, int x, int y) { return img.at(x, y) >= 128; }

// Rays from the foreground centroid at angles 2*pi*k/n, k = 0..n-1; angle 0
// points along +x and angles grow counter-clockwise (y axis pointing up on
// screen). Each sample is round(100 * d / width) capped at 255, d being the
// distance to the furthest point where the bilinearly interpolated
// foreground indicator crosses 1/2. Throws Error(kInvalidInput) for an
// empty foreground or n < 1.
std::vector<std::uint8_t> shape_to_series(const Image& img, int n_measurements = 40);

// Rows top to bottom, pixels left to right, all channels of a pixel together.
std::vector<std::uint8_t> raster_scan(const Image& img);

// Hilbert order over the enclosing power-of-two square; padding positions
// are skipped.
std::vector<std::uint8_t> hilbert_scan(const Image& img);

// Curve position d -> (x, y) on an n x n grid, n a power of two.
std::pair<int, int> hilbert_d2xy(int n, std::uint64_t d);

}  // namespace cmx
