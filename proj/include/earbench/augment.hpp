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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "earbench/common.hpp"
#include "earbench/image.hpp"
#include "earbench/manifest.hpp"

namespace earbench {

enum class Family {
  crop,
  flip,
  brightness_add,
  brightness_mul,
  blur,
  sharpen,
  dropout,
  contrast,
  scale,
  translate,
  rotate,
  shear,
};

std::string_view to_string(Family family);
/// Throws UsageError for names that are not a supported family.
Family parse_family(std::string_view name);

/// Parameter grid per transform family. An empty list disables the family.
///
/// The brightness, blur, sharpen, rotation and shear grids default to the
/// UERC augmentation grid. Dropout, contrast, scale, translate and the crop
/// count are toolkit conventions.
struct AugmentConfig {
  std::vector<double> brightness_add_values;
  std::vector<double> brightness_mul_values;
  std::vector<double> blur_sigmas;
  std::vector<double> sharpen_values;
  std::vector<double> rotation_degrees;
  std::vector<double> shear_degrees;
  std::vector<double> dropout_rates;
  std::vector<double> contrast_alphas;
  std::vector<double> scale_factors;
  std::vector<double> translate_fractions;
  int crop_count = 0;
  int crop_size = 224;
  bool flip_enabled = false;

  /// Full grid: 12 additive, 11 multiplicative, 8 blur, 16 sharpen,
  /// 9 rotation, 7 shear values plus the toolkit defaults.
  static AugmentConfig uerc();
  /// Reduced grid for large controlled datasets. The exact reduction is a
  /// toolkit approximation.
  static AugmentConfig multipie();
  /// Every family disabled.
  static AugmentConfig none();

  /// Throws UsageError on out-of-range values.
  void validate() const;

  friend bool operator==(const AugmentConfig&, const AugmentConfig&) = default;
};

AugmentConfig augment_preset(std::string_view name);

/// Flat key=value text. Keys are the field names above, lists are comma
/// separated, '#' starts a comment. The optional "preset" key selects the
/// starting grid (default uerc); later keys override it.
AugmentConfig parse_augment_config(std::istream& in);
AugmentConfig read_augment_config(const std::filesystem::path& path);
void write_augment_config(const AugmentConfig& config, std::ostream& out);

/// One concrete transform. `seed` only matters for crop and dropout.
struct TransformSpec {
  Family family = Family::flip;
  double parameter = 0.0;
  std::uint64_t seed = 0;
  int crop_size = 224;  ///< crop family only; parameter is then the crop index

  /// "<family>=<parameter>", the suffix used for derived image ids.
  std::string label() const;
};

/// One spec per grid value per enabled family, in a fixed family order.
/// Flip is planned only when flip_enabled and not aligned_mode.
std::vector<TransformSpec> plan_augmentations(const AugmentConfig& config, bool aligned_mode);

/// Pure function of (image, spec). Pixel arithmetic saturates to [0, 255].
/// Sharpen blends identity and the 3x3 kernel with center 8 + lightness
/// (ring -1) at strength 0.5, so the parameter scales output lightness.
/// Geometric families (rotate, shear, scale, translate) warp about the image
/// center with bilinear sampling and edge replication and keep the size. The
/// crop family resizes to 256x256 and cuts a crop_size square at an offset
/// drawn from the seed.
EarImage apply_transform(const EarImage& image, const TransformSpec& spec);

struct AugmentOptions {
  bool aligned_mode = false;
  std::uint64_t seed = kDefaultSeed;
  unsigned jobs = 1;
};

/// Writes |plan| PNGs per train image into output_directory and returns the
/// input entries plus one derived entry per written image, sorted by id.
/// Derived entries keep the parent's subject, dataset and side; their id is
/// parent_id + "#" + spec.label(). Per-image seeds are
/// derive_seed(seed, parent_id), so the result does not depend on jobs.
DatasetManifest augment_dataset(const DatasetManifest& manifest, const AugmentConfig& config,
                                const std::filesystem::path& output_directory,
                                const AugmentOptions& options = {});

/// File name used for a derived image id.
std::string derived_file_name(std::string_view image_id);

}  // namespace earbench
