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

#include "earbench/dataset.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "earbench/common.hpp"

namespace fs = std::filesystem;

namespace earbench {

Layout parse_layout(std::string_view text) {
  if (text == "subject-dirs" || text == "subject_dirs") return Layout::subject_dirs;
  if (text == "label-file" || text == "label_file") return Layout::label_file;
  throw UsageError("unknown layout '" + std::string(text) + "' (expected subject-dirs or label-file)");
}

namespace {

bool has_image_extension(const fs::path& p) {
  static const std::set<std::string> kExt = {".png", ".jpg", ".jpeg", ".bmp", ".pgm",
                                             ".ppm", ".pnm", ".tif", ".tiff", ".webp"};
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return kExt.count(ext) > 0;
}

struct Candidate {
  fs::path relative;
  std::string subject;
};

std::vector<Candidate> scan_subject_dirs(const fs::path& root) {
  std::vector<Candidate> out;
  for (const auto& subject_dir : fs::directory_iterator(root)) {
    if (!subject_dir.is_directory()) continue;
    const std::string subject = subject_dir.path().filename().string();
    for (const auto& f : fs::recursive_directory_iterator(subject_dir.path())) {
      if (f.is_regular_file() && has_image_extension(f.path()))
        out.push_back({fs::relative(f.path(), root), subject});
    }
  }
  return out;
}

std::vector<Candidate> scan_label_file(const fs::path& root, const fs::path& label_file) {
  const fs::path file = label_file.empty() ? root / "labels.tsv" : label_file;
  std::ifstream in(file);
  if (!in) throw DataError("cannot open label file " + file.string());
  std::vector<Candidate> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != 2)
      throw DataError(file.string() + ":" + std::to_string(lineno) + ": expected path<TAB>subject");
    out.push_back({fs::path(f[0]), f[1]});
  }
  return out;
}

}  // namespace

Side infer_side(const fs::path& filename) {
  std::string stem = filename.stem().string();
  std::transform(stem.begin(), stem.end(), stem.begin(), [](unsigned char c) { return std::tolower(c); });
  if (stem.ends_with("_l")) return Side::left;
  if (stem.ends_with("_r")) return Side::right;
  return Side::unknown;
}

BuildResult build_manifest(const fs::path& root, const std::string& dataset_name, Layout layout,
                           const fs::path& label_file) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw DataError("cannot read dataset directory " + root.string());
  if (dataset_name.empty()) throw UsageError("dataset name must not be empty");

  std::vector<Candidate> candidates;
  try {
    candidates = layout == Layout::subject_dirs ? scan_subject_dirs(root) : scan_label_file(root, label_file);
  } catch (const fs::filesystem_error& e) {
    throw DataError(std::string("cannot read dataset directory: ") + e.what());
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const auto& a, const auto& b) { return a.relative.generic_string() < b.relative.generic_string(); });

  BuildResult result;
  std::vector<ManifestEntry> entries;
  for (const auto& c : candidates) {
    const fs::path full = root / c.relative;
    EarImage image;
    try {
      image = load_image(full);
    } catch (const DataError& e) {
      result.warnings.push_back(std::string("skipped: ") + e.what());
      continue;
    }
    ManifestEntry e;
    e.image_id = dataset_name + "/" + c.relative.generic_string();
    e.path = full.generic_string();
    e.subject = c.subject;
    e.dataset_name = dataset_name;
    e.side = infer_side(c.relative);
    e.width = image.width();
    e.height = image.height();
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw DataError("no images found in " + root.string());
  result.manifest = DatasetManifest(std::move(entries));
  return result;
}

void SplitRatios::validate() const {
  for (double f : {train, val, test})
    if (!(f >= 0.0 && f <= 1.0)) throw UsageError("split fractions must lie in [0,1]");
  if (std::abs(train + val + test - 1.0) > 1e-9)
    throw UsageError("split fractions must sum to 1, got " + format_real(train + val + test));
}

std::array<std::size_t, 3> split_counts(std::size_t n, const SplitRatios& ratios) {
  // Index order train, val, test; remainder priority train > test > val.
  const std::array<double, 3> frac = {ratios.train, ratios.val, ratios.test};
  constexpr std::array<int, 3> kPriority = {0, 2, 1};
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double q = static_cast<double>(n) * frac[k];
    counts[k] = static_cast<std::size_t>(std::floor(q + 1e-9));
    rem[k] = frac[k] > 0.0 ? std::max(0.0, q - static_cast<double>(counts[k])) : -1.0;
    assigned += counts[k];
  }
  std::array<int, 3> order = kPriority;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b] + 1e-12; });
  for (std::size_t left = n - std::min(n, assigned), i = 0; left > 0; --left, i = (i + 1) % 3) {
    // Skip zero-fraction splits; at least one split has a positive fraction.
    while (rem[order[i]] < 0.0) i = (i + 1) % 3;
    ++counts[order[i]];
  }
  return counts;
}

DatasetManifest split_manifest(const DatasetManifest& manifest, const SplitRatios& ratios,
                               std::uint64_t seed) {
  ratios.validate();
  std::map<std::string, std::vector<std::size_t>> by_subject;
  for (std::size_t i = 0; i < manifest.size(); ++i) by_subject[manifest.entries()[i].subject].push_back(i);

  std::vector<ManifestEntry> entries = manifest.entries();
  for (auto& [subject, indices] : by_subject) {
    std::sort(indices.begin(), indices.end(),
              [&](std::size_t a, std::size_t b) { return entries[a].image_id < entries[b].image_id; });
    Rng rng(derive_seed(seed, subject));
    shuffle(indices, rng);
    const auto counts = split_counts(indices.size(), ratios);
    std::size_t pos = 0;
    for (std::size_t k = 0; k < counts[0]; ++k) entries[indices[pos++]].split = Split::train;
    for (std::size_t k = 0; k < counts[1]; ++k) entries[indices[pos++]].split = Split::val;
    for (std::size_t k = 0; k < counts[2]; ++k) entries[indices[pos++]].split = Split::test;
  }
  return DatasetManifest(std::move(entries));
}

EarImage align_side(const EarImage& image, Side side, Side target) {
  if (side == Side::unknown)
    throw DataError("cannot align an image with unknown side; skip it or label it with a side override");
  if (target == Side::unknown) throw UsageError("alignment target must be left or right");
  return side == target ? image : mirror_horizontal(image);
}

std::vector<EarImage> preprocess(const EarImage& image, PreprocessMode mode, int crop_size) {
  if (crop_size < 1 || crop_size > kResizeEdge)
    throw UsageError("crop size must be in [1, 256], got " + std::to_string(crop_size));
  const EarImage resized = resize_bilinear(image, kResizeEdge, kResizeEdge);
  const int far = kResizeEdge - crop_size;
  const int mid = far / 2;
  std::vector<EarImage> out;
  if (mode == PreprocessMode::train) {
    out.push_back(crop(resized, 0, 0, crop_size, crop_size));
    out.push_back(crop(resized, far, 0, crop_size, crop_size));
    out.push_back(crop(resized, 0, far, crop_size, crop_size));
    out.push_back(crop(resized, far, far, crop_size, crop_size));
  }
  out.push_back(crop(resized, mid, mid, crop_size, crop_size));
  return out;
}

}  // namespace earbench
