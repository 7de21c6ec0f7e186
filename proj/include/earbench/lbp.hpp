// Copyright 2026 The earbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "earbench/image.hpp"

namespace earbench::lbp {

struct LbpConfig {
  int radius = 1;
  int neighbors = 8;
  int grid_rows = 8;
  int grid_cols = 8;
  bool uniform = true;
  int working_size = 128;

  /// Only the 8-neighbor operator is implemented.
  void validate() const;
  /// 59 when uniform, else 256.
  int bins() const { return uniform ? 59 : 256; }
  std::size_t feature_length() const {
    return static_cast<std::size_t>(grid_rows) * grid_cols * bins();
  }
};

struct FeatureVector {
  std::vector<float> values;

  std::size_t size() const { return values.size(); }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// 3x3 window in row-major order; index 4 is the center.
using Window = std::array<std::uint8_t, 9>;

/// Bit i is set iff neighbor i >= center. Neighbors run clockwise from the
/// top-left: (0,0) (1,0) (2,0) (2,1) (2,2) (1,2) (0,2) (0,1) as (col,row).
std::uint8_t lbp_code(const Window& window);

/// Number of 0/1 transitions in the circular 8-bit pattern.
int transitions(std::uint8_t code);

/// Maps codes to histogram bins: the 58 uniform codes (at most two
/// transitions) get bins 0..57 in ascending code order, the rest share bin 58.
const std::array<std::uint8_t, 256>& uniform_bin_table();

/// LBP code image over the interior (pixels at least `radius` from the border),
/// sampling the 8 neighbors at offset `radius`.
std::vector<std::uint8_t> code_image(const EarImage& gray, int radius, int& out_width, int& out_height);

/// Grayscale, bilinear resize to working_size^2, per-cell histograms over a
/// grid_rows x grid_cols partition of the code image, each L1-normalized
/// (empty cells stay zero), concatenated row-major.
FeatureVector extract_features(const EarImage& image, const LbpConfig& config = {});

/// Sum over bins with a_i + b_i > 0 of (a_i - b_i)^2 / (a_i + b_i).
/// Throws UsageError on length mismatch.
double chi_square_distance(const FeatureVector& a, const FeatureVector& b);

/// exp(-d / temperature) normalized over classes, computed relative to the
/// smallest distance.
std::vector<double> softmax_of_distances(const std::vector<double>& distances, double temperature);

struct LabeledFeature {
  std::string label;
  FeatureVector features;
};

/// Immutable 1-NN gallery over chi-square distance.
class Gallery {
 public:
  /// Throws UsageError when empty or when vector lengths differ.
  explicit Gallery(std::vector<LabeledFeature> items);

  /// Sorted distinct labels; score vectors follow this order.
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return items_.size(); }

  /// Median chi-square distance between gallery vectors, computed once.
  /// Galleries above 128 vectors use an evenly spaced subset of 128.
  /// Falls back to 1.0 when the median is zero or there is a single vector.
  double default_temperature() const { return default_temperature_; }

  /// Minimum distance from the probe to each class, in labels() order.
  std::vector<double> class_distances(const FeatureVector& probe) const;

  /// Class probabilities: softmax of negative per-class minimum distances.
  /// The result sums to 1 and its argmax is the nearest-neighbor class.
  std::vector<double> classify(const FeatureVector& probe, std::optional<double> temperature = {}) const;

 private:
  std::vector<LabeledFeature> items_;
  std::vector<std::string> labels_;
  std::vector<std::size_t> label_index_;
  double default_temperature_ = 1.0;
};

/// Index of the largest score; the lowest index wins ties.
std::size_t argmax(const std::vector<double>& scores);

struct FeatureRecord {
  std::string image_id;
  FeatureVector features;

  friend bool operator==(const FeatureRecord&, const FeatureRecord&) = default;
};

/// Binary cache: "LBPF", version byte 1, then per record a uint32 id length,
/// the id bytes, a uint32 value count and that many float32 values. All
/// integers and floats are little-endian.
void write_feature_cache(const std::vector<FeatureRecord>& records, const std::filesystem::path& path);
std::vector<FeatureRecord> read_feature_cache(const std::filesystem::path& path);

}  // namespace earbench::lbp
