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
#include <string>
#include <vector>

#include "earbench/image.hpp"
#include "earbench/manifest.hpp"

namespace earbench {

enum class Layout {
  subject_dirs,  ///< root/<subject>/<image files>
  label_file,    ///< root/labels.tsv with relative_path<TAB>subject lines
};

Layout parse_layout(std::string_view text);

struct BuildResult {
  DatasetManifest manifest;
  std::vector<std::string> warnings;  ///< one per skipped file
};

/// Scans a dataset directory. Image ids are "<dataset_name>/<relative path>",
/// entries are sorted by id, and sides come from infer_side(). Undecodable
/// files are skipped with a warning; an unreadable root or a directory
/// without images throws DataError.
BuildResult build_manifest(const std::filesystem::path& root, const std::string& dataset_name,
                           Layout layout, const std::filesystem::path& label_file = {});

/// "_l" / "_r" suffix on the file stem (case-insensitive), else unknown.
Side infer_side(const std::filesystem::path& filename);

struct SplitRatios {
  double train = 0.0;
  double val = 0.0;
  double test = 0.0;

  /// Throws UsageError unless each fraction is in [0,1] and they sum to 1 within 1e-9.
  void validate() const;
};

/// Per-subject counts for n images: floor of n * fraction, then the leftover
/// images go one each to the splits with the largest fractional parts, ties
/// resolved train > test > val. Splits with fraction 0 never receive images.
std::array<std::size_t, 3> split_counts(std::size_t n, const SplitRatios& ratios);

/// Stratified by subject. Each subject's images (ordered by id) are shuffled
/// with a seed derived from (seed, subject), then assigned train, val, test
/// in that order according to split_counts(). Entry order is preserved.
DatasetManifest split_manifest(const DatasetManifest& manifest, const SplitRatios& ratios,
                               std::uint64_t seed);

/// Mirrors the image iff side differs from target. Unknown sides are
/// rejected so callers decide whether to skip or label them.
EarImage align_side(const EarImage& image, Side side, Side target);

enum class PreprocessMode { train, test };

inline constexpr int kResizeEdge = 256;

/// Resizes to 256x256 and returns crop_size x crop_size windows: the four
/// corners then the center in train mode, only the center in test mode.
/// The center window starts at (256 - crop_size) / 2.
std::vector<EarImage> preprocess(const EarImage& image, PreprocessMode mode, int crop_size);

}  // namespace earbench
