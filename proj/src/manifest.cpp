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

#include "earbench/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "earbench/common.hpp"

namespace earbench {

std::string_view to_string(Side side) {
  switch (side) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::unassigned: return "unassigned";
  }
  return "unassigned";
}

Side parse_side(std::string_view text) {
  if (text == "left" || text == "l" || text == "L") return Side::left;
  if (text == "right" || text == "r" || text == "R") return Side::right;
  if (text == "unknown") return Side::unknown;
  throw DataError("invalid side '" + std::string(text) + "'");
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "val") return Split::val;
  if (text == "test") return Split::test;
  if (text == "unassigned") return Split::unassigned;
  throw DataError("invalid split '" + std::string(text) + "'");
}

DatasetManifest::DatasetManifest(std::vector<ManifestEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.image_id.empty()) throw DataError("manifest entry with empty image_id");
    if (e.width < 1 || e.height < 1)
      throw DataError("manifest entry " + e.image_id + " has non-positive dimensions");
    if (!index_.emplace(e.image_id, i).second)
      throw DataError("duplicate image_id in manifest: " + e.image_id);
  }
}

const ManifestEntry* DatasetManifest::find(std::string_view image_id) const {
  auto it = index_.find(image_id);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

std::vector<std::string> DatasetManifest::subjects() const {
  std::set<std::string> s;
  for (const auto& e : entries_) s.insert(e.subject);
  return {s.begin(), s.end()};
}

std::size_t DatasetManifest::count(Split split) const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.split == split; }));
}

DatasetManifest DatasetManifest::filter(Split split) const {
  std::vector<ManifestEntry> out;
  std::copy_if(entries_.begin(), entries_.end(), std::back_inserter(out),
               [&](const auto& e) { return e.split == split; });
  return DatasetManifest(std::move(out));
}

namespace {

void check_field(const std::string& value, std::string_view what) {
  if (value.find_first_of("\t\n\r") != std::string::npos)
    throw DataError(std::string(what) + " contains a tab or newline: " + value);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_manifest(const DatasetManifest& manifest, std::ostream& out) {
  out << kManifestHeader << "\timage_id\tpath\tsubject\tdataset_name\tside\tsplit\twidth\theight\n";
  for (const auto& e : manifest.entries()) {
    check_field(e.image_id, "image_id");
    check_field(e.path, "path");
    check_field(e.subject, "subject");
    check_field(e.dataset_name, "dataset_name");
    out << e.image_id << '\t' << e.path << '\t' << e.subject << '\t' << e.dataset_name << '\t'
        << to_string(e.side) << '\t' << to_string(e.split) << '\t' << e.width << '\t' << e.height
        << '\n';
  }
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  auto out = open_output(path);
  write_manifest(manifest, out);
  if (!out) throw DataError("error writing " + path.string());
}

DatasetManifest read_manifest(std::istream& in, std::string_view source) {
  std::string line;
  if (!std::getline(in, line) || !line.starts_with(kManifestHeader))
    throw DataError(std::string(source) + ": missing '#manifest v1' header");
  std::vector<ManifestEntry> entries;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != 8)
      throw DataError(std::string(source) + ":" + std::to_string(lineno) + ": expected 8 fields, got " +
                      std::to_string(f.size()));
    try {
      ManifestEntry e;
      e.image_id = f[0];
      e.path = f[1];
      e.subject = f[2];
      e.dataset_name = f[3];
      e.side = parse_side(f[4]);
      e.split = parse_split(f[5]);
      e.width = static_cast<int>(parse_int(f[6]));
      e.height = static_cast<int>(parse_int(f[7]));
      entries.push_back(std::move(e));
    } catch (const DataError& err) {
      throw DataError(std::string(source) + ":" + std::to_string(lineno) + ": " + err.what());
    }
  }
  return DatasetManifest(std::move(entries));
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_manifest(in, path.string());
}

std::map<std::string, Side> read_side_overrides(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::map<std::string, Side> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != 2)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected image_id<TAB>side");
    out[f[0]] = parse_side(trim(f[1]));
  }
  return out;
}

DatasetManifest apply_side_overrides(const DatasetManifest& manifest,
                                     const std::map<std::string, Side>& overrides) {
  for (const auto& [id, side] : overrides)
    if (!manifest.find(id)) throw DataError("side override for unknown image " + id);
  std::vector<ManifestEntry> entries = manifest.entries();
  for (auto& e : entries) {
    if (auto it = overrides.find(e.image_id); it != overrides.end()) e.side = it->second;
  }
  return DatasetManifest(std::move(entries));
}

std::map<std::string, std::string> read_truth(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != 2)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected sample_id<TAB>class");
    if (!out.emplace(f[0], f[1]).second)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": duplicate sample " + f[0]);
  }
  return out;
}

void write_truth(const std::map<std::string, std::string>& truth, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const auto& [id, label] : truth) out << id << '\t' << label << '\n';
  if (!out) throw DataError("error writing " + path.string());
}

std::map<std::string, std::string> truth_from_manifest(const DatasetManifest& manifest,
                                                        std::optional<Split> split) {
  std::map<std::string, std::string> out;
  for (const auto& e : manifest.entries())
    if (!split || e.split == *split) out[e.image_id] = e.subject;
  return out;
}

}  // namespace earbench
