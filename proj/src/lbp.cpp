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

#include "earbench/lbp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>

#include "earbench/common.hpp"

namespace earbench::lbp {

void LbpConfig::validate() const {
  if (neighbors != 8) throw UsageError("only 8-neighbor LBP is supported");
  if (radius < 1) throw UsageError("LBP radius must be >= 1");
  if (grid_rows < 1 || grid_cols < 1) throw UsageError("LBP grid must be at least 1x1");
  if (working_size < 2 * radius + 1) throw UsageError("working size too small for LBP radius");
}

namespace {
// (col, row) offsets, clockwise from the top-left.
constexpr std::array<std::array<int, 2>, 8> kOffsets = {{
    {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}}};
}  // namespace

std::uint8_t lbp_code(const Window& w) {
  const std::uint8_t center = w[4];
  std::uint8_t code = 0;
  for (int i = 0; i < 8; ++i) {
    const auto [dx, dy] = kOffsets[i];
    if (w[(dy + 1) * 3 + (dx + 1)] >= center) code |= static_cast<std::uint8_t>(1u << i);
  }
  return code;
}

int transitions(std::uint8_t code) {
  const std::uint8_t rotated = static_cast<std::uint8_t>((code >> 1) | (code << 7));
  return std::popcount(static_cast<unsigned>(code ^ rotated));
}

const std::array<std::uint8_t, 256>& uniform_bin_table() {
  static const auto table = [] {
    std::array<std::uint8_t, 256> t{};
    std::uint8_t next = 0;
    for (int c = 0; c < 256; ++c)
      t[c] = transitions(static_cast<std::uint8_t>(c)) <= 2 ? next++ : 58;
    return t;
  }();
  return table;
}

std::vector<std::uint8_t> code_image(const EarImage& gray, int radius, int& out_width, int& out_height) {
  out_width = std::max(0, gray.width() - 2 * radius);
  out_height = std::max(0, gray.height() - 2 * radius);
  std::vector<std::uint8_t> codes(static_cast<std::size_t>(out_width) * out_height);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const int cx = x + radius, cy = y + radius;
      const std::uint8_t center = gray.at(cx, cy);
      std::uint8_t code = 0;
      for (int i = 0; i < 8; ++i) {
        const auto [dx, dy] = kOffsets[i];
        if (gray.at(cx + dx * radius, cy + dy * radius) >= center) code |= static_cast<std::uint8_t>(1u << i);
      }
      codes[static_cast<std::size_t>(y) * out_width + x] = code;
    }
  }
  return codes;
}

FeatureVector extract_features(const EarImage& image, const LbpConfig& config) {
  config.validate();
  const EarImage gray = resize_bilinear(to_gray(image), config.working_size, config.working_size);
  int cw = 0, chh = 0;
  const auto codes = code_image(gray, config.radius, cw, chh);
  const int bins = config.bins();
  const auto& table = uniform_bin_table();

  FeatureVector fv;
  fv.values.assign(config.feature_length(), 0.0f);
  std::vector<std::uint32_t> hist(bins);
  for (int r = 0; r < config.grid_rows; ++r) {
    const int y0 = r * chh / config.grid_rows, y1 = (r + 1) * chh / config.grid_rows;
    for (int c = 0; c < config.grid_cols; ++c) {
      const int x0 = c * cw / config.grid_cols, x1 = (c + 1) * cw / config.grid_cols;
      std::fill(hist.begin(), hist.end(), 0u);
      std::uint32_t total = 0;
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
          const std::uint8_t code = codes[static_cast<std::size_t>(y) * cw + x];
          ++hist[config.uniform ? table[code] : code];
          ++total;
        }
      if (total == 0) continue;
      float* cell = fv.values.data() + (static_cast<std::size_t>(r) * config.grid_cols + c) * bins;
      for (int b = 0; b < bins; ++b) cell[b] = static_cast<float>(static_cast<double>(hist[b]) / total);
    }
  }
  return fv;
}

double chi_square_distance(const FeatureVector& a, const FeatureVector& b) {
  if (a.size() != b.size())
    throw UsageError("feature length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double s = static_cast<double>(a.values[i]) + b.values[i];
    if (s > 0.0) {
      const double diff = static_cast<double>(a.values[i]) - b.values[i];
      d += diff * diff / s;
    }
  }
  return d;
}

std::vector<double> softmax_of_distances(const std::vector<double>& distances, double temperature) {
  if (!(temperature > 0.0)) throw UsageError("temperature must be > 0");
  if (distances.empty()) return {};
  const double dmin = *std::min_element(distances.begin(), distances.end());
  std::vector<double> p(distances.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += p[i] = std::exp(-(distances[i] - dmin) / temperature);
  for (auto& v : p) v /= sum;
  return p;
}

std::size_t argmax(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

Gallery::Gallery(std::vector<LabeledFeature> items) : items_(std::move(items)) {
  if (items_.empty()) throw UsageError("gallery must not be empty");
  std::set<std::string> labels;
  for (const auto& it : items_) {
    if (it.features.size() != items_.front().features.size())
      throw UsageError("gallery feature vectors differ in length");
    labels.insert(it.label);
  }
  labels_.assign(labels.begin(), labels.end());
  label_index_.reserve(items_.size());
  for (const auto& it : items_)
    label_index_.push_back(static_cast<std::size_t>(
        std::lower_bound(labels_.begin(), labels_.end(), it.label) - labels_.begin()));

  constexpr std::size_t kMaxSample = 128;
  std::vector<std::size_t> sample;
  if (items_.size() <= kMaxSample) {
    for (std::size_t i = 0; i < items_.size(); ++i) sample.push_back(i);
  } else {
    for (std::size_t k = 0; k < kMaxSample; ++k) sample.push_back(k * items_.size() / kMaxSample);
  }
  std::vector<double> d;
  for (std::size_t i = 0; i < sample.size(); ++i)
    for (std::size_t j = i + 1; j < sample.size(); ++j)
      d.push_back(chi_square_distance(items_[sample[i]].features, items_[sample[j]].features));
  if (!d.empty()) {
    std::sort(d.begin(), d.end());
    const std::size_t n = d.size();
    const double median = n % 2 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
    if (median > 0.0) default_temperature_ = median;
  }
}

std::vector<double> Gallery::class_distances(const FeatureVector& probe) const {
  std::vector<double> best(labels_.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < items_.size(); ++i) {
    double& slot = best[label_index_[i]];
    slot = std::min(slot, chi_square_distance(probe, items_[i].features));
  }
  return best;
}

std::vector<double> Gallery::classify(const FeatureVector& probe, std::optional<double> temperature) const {
  return softmax_of_distances(class_distances(probe), temperature.value_or(default_temperature_));
}

namespace {

constexpr char kMagic[4] = {'L', 'B', 'P', 'F'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

bool get_u32(std::istream& in, std::uint32_t& v) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
  v = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return true;
}

}  // namespace

void write_feature_cache(const std::vector<FeatureRecord>& records, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kMagic, 4);
  out.put(static_cast<char>(kVersion));
  for (const auto& r : records) {
    put_u32(out, static_cast<std::uint32_t>(r.image_id.size()));
    out.write(r.image_id.data(), static_cast<std::streamsize>(r.image_id.size()));
    put_u32(out, static_cast<std::uint32_t>(r.features.size()));
    for (float f : r.features.values) put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  if (!out) throw DataError("error writing " + path.string());
}

std::vector<FeatureRecord> read_feature_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open feature cache " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError(path.string() + ": not an LBPF feature cache");
  const int version = in.get();
  if (version != kVersion) throw DataError(path.string() + ": unsupported feature cache version");
  std::vector<FeatureRecord> records;
  std::uint32_t len = 0;
  while (get_u32(in, len)) {
    FeatureRecord r;
    r.image_id.resize(len);
    std::uint32_t count = 0;
    if (!in.read(r.image_id.data(), len) || !get_u32(in, count))
      throw DataError(path.string() + ": truncated record");
    r.features.values.resize(count);
    for (auto& f : r.features.values) {
      std::uint32_t bits = 0;
      if (!get_u32(in, bits)) throw DataError(path.string() + ": truncated record");
      f = std::bit_cast<float>(bits);
    }
    records.push_back(std::move(r));
  }
  if (in.gcount() != 0) throw DataError(path.string() + ": truncated record");
  if (!in.eof()) throw DataError(path.string() + ": read error");
  return records;
}

}  // namespace earbench::lbp
