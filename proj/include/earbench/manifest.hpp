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

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace earbench {

enum class Side { left, right, unknown };
enum class Split { train, val, test, unassigned };

std::string_view to_string(Side side);
std::string_view to_string(Split split);
Side parse_side(std::string_view text);
Split parse_split(std::string_view text);

struct ManifestEntry {
  std::string image_id;
  std::string path;
  std::string subject;
  std::string dataset_name;
  Side side = Side::unknown;
  Split split = Split::unassigned;
  int width = 0;
  int height = 0;

  /// height / width
  double aspect_ratio() const { return static_cast<double>(height) / width; }
  long long resolution() const { return static_cast<long long>(width) * height; }

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Immutable catalog of images. Entries are kept in the order given;
/// image ids are unique and dimensions positive.
class DatasetManifest {
 public:
  DatasetManifest() = default;
  explicit DatasetManifest(std::vector<ManifestEntry> entries);

  const std::vector<ManifestEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const ManifestEntry* find(std::string_view image_id) const;
  /// Sorted distinct subject labels.
  std::vector<std::string> subjects() const;
  std::size_t count(Split split) const;
  DatasetManifest filter(Split split) const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;

 private:
  std::vector<ManifestEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

inline constexpr std::string_view kManifestHeader = "#manifest v1";

/// Tab-separated, one entry per line:
/// image_id, path, subject, dataset_name, side, split, width, height.
void write_manifest(const DatasetManifest& manifest, std::ostream& out);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest read_manifest(std::istream& in, std::string_view source = "<stream>");
DatasetManifest read_manifest(const std::filesystem::path& path);

/// Tab-separated image_id -> side lines; '#' lines are comments.
std::map<std::string, Side> read_side_overrides(const std::filesystem::path& path);
/// DataError when an override names an image that is not in the manifest.
DatasetManifest apply_side_overrides(const DatasetManifest& manifest,
                                     const std::map<std::string, Side>& overrides);

/// Tab-separated sample_id -> class lines.
std::map<std::string, std::string> read_truth(const std::filesystem::path& path);
void write_truth(const std::map<std::string, std::string>& truth,
                 const std::filesystem::path& path);
/// sample_id -> subject for every entry of the given split.
std::map<std::string, std::string> truth_from_manifest(const DatasetManifest& manifest,
                                                        std::optional<Split> split = {});

}  // namespace earbench
