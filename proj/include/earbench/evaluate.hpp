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
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "earbench/common.hpp"
#include "earbench/fusion.hpp"
#include "earbench/image.hpp"
#include "earbench/lbp.hpp"
#include "earbench/manifest.hpp"

namespace earbench::eval {

/// Bins [e0,e1), [e1,e2), ..., with the last finite interval closed on the
/// right. With open_ended an extra bin [e_last, +inf) is appended.
struct BinSpec {
  std::vector<double> edges;
  bool open_ended = false;

  /// Throws UsageError unless there are >= 2 strictly increasing edges.
  void validate() const;
  std::size_t bin_count() const;
  /// nullopt when the value falls outside every bin.
  std::optional<std::size_t> bin_of(double value) const;
  /// Interval text such as "[0.5,1)" or "[2.5,inf)".
  std::string bin_label(std::size_t bin) const;

  /// 0, 0.5, 1.0, 1.5, 2.0, 2.5, open-ended.
  static BinSpec aspect_ratio_default();
  /// Every 32 gray levels from 0 to 256.
  static BinSpec intensity_default();
  /// Decades of pixel count: 0, 1e2, 1e3, 1e4, 1e5, open-ended.
  static BinSpec resolution_default();
};

/// "e0,e1,...[,+]" where a trailing "+" marks the spec open-ended.
BinSpec parse_bins(std::string_view text);

enum class QualityKey { aspect_ratio, mean_intensity, resolution };

std::string_view to_string(QualityKey key);
QualityKey parse_quality_key(std::string_view text);
BinSpec default_bins(QualityKey key);

using ImageLoader = std::function<EarImage(const ManifestEntry&)>;
/// Decodes entry.path.
EarImage load_entry(const ManifestEntry& entry);

/// height/width, width*height, or the mean of the grayscale image (the only
/// key that needs the pixels).
double quality_value(const ManifestEntry& entry, QualityKey key, const ImageLoader& loader = load_entry);

struct CmcCurve {
  /// cmc[r - 1] is the rank-r accuracy.
  std::vector<double> cmc;
  std::size_t samples = 0;

  double rank1() const { return cmc.empty() ? 0.0 : cmc.front(); }
};

/// 1-based rank of the true class in a score row. Classes scoring higher
/// rank first; equal scores rank by class-label order, earlier first.
/// Returns 0 when the true class is not among the labels.
std::size_t true_rank(const std::vector<double>& row, const std::vector<std::string>& labels,
                      const std::string& true_class);

/// Rank-1..max_rank accuracy over the canonical (label-sorted) matrix.
/// DataError for samples without truth; UsageError unless 1 <= max_rank <= M.
CmcCurve rank_accuracy(const fusion::ScoreMatrix& scores, const std::map<std::string, std::string>& truth,
                       std::size_t max_rank);

/// sample_id -> whether the rank-1 class equals truth.
std::map<std::string, bool> rank1_correct(const fusion::ScoreMatrix& scores,
                                          const std::map<std::string, std::string>& truth);

struct BinStat {
  std::string label;
  std::size_t count = 0;
  std::size_t errors = 0;
  /// nullopt for empty bins.
  std::optional<double> error_rate;
};

/// Partitions the evaluated samples by quality key. DataError when a sample
/// is missing from the manifest or its value lies outside every bin.
std::vector<BinStat> stratify(const DatasetManifest& manifest, const std::map<std::string, bool>& per_sample_correct,
                              QualityKey key, const BinSpec& bins, const ImageLoader& loader = load_entry);

struct Distribution {
  std::string name;
  std::vector<std::string> bin_labels;
  std::vector<std::size_t> counts;
};

/// Counts over every manifest entry.
Distribution distribution_histogram(const DatasetManifest& manifest, QualityKey key, const BinSpec& bins,
                                    const ImageLoader& loader = load_entry);

/// A classifier that can be fit on labeled images and asked for a label.
/// predict() must be safe to call concurrently after fit().
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual void fit(const std::vector<std::pair<EarImage, std::string>>& examples) = 0;
  virtual std::string predict(const EarImage& image) const = 0;
};

/// LBP features with a 1-NN chi-square gallery.
class LbpScorer : public Scorer {
 public:
  explicit LbpScorer(lbp::LbpConfig config = {}) : config_(config) {}
  void fit(const std::vector<std::pair<EarImage, std::string>>& examples) override;
  std::string predict(const EarImage& image) const override;

 private:
  lbp::LbpConfig config_;
  std::optional<lbp::Gallery> gallery_;
};

/// Normalized grayscale histogram (32 bins of 8 levels) with a 1-NN
/// chi-square gallery. Sees global intensity, which LBP codes ignore.
class HistogramScorer : public Scorer {
 public:
  void fit(const std::vector<std::pair<EarImage, std::string>>& examples) override;
  std::string predict(const EarImage& image) const override;

  static lbp::FeatureVector histogram(const EarImage& image);

 private:
  std::optional<lbp::Gallery> gallery_;
};

/// "lbp" or "histogram".
std::unique_ptr<Scorer> make_scorer(std::string_view name, const lbp::LbpConfig& config = {});

struct BiasOptions {
  double train_fraction = 0.5;
  std::uint64_t seed = kDefaultSeed;
  unsigned jobs = 1;
};

struct BiasResult {
  std::vector<std::string> datasets;  ///< sorted; confusion matrix axis order
  std::vector<std::vector<std::size_t>> confusion;  ///< [true][predicted]
  std::size_t train_count = 0;
  std::size_t test_count = 0;
  double accuracy = 0.0;
};

/// Dataset identification: every image is relabeled with its dataset name,
/// each dataset is split train/test with the given fraction, the scorer is
/// fit on the train part and evaluated on the test part.
/// UsageError with fewer than 2 datasets; DataError for a dataset with
/// fewer than 2 images.
BiasResult bias_experiment(const std::vector<DatasetManifest>& manifests, Scorer& scorer,
                           const BiasOptions& options = {}, const ImageLoader& loader = load_entry);

struct EvaluationReport {
  std::optional<CmcCurve> cmc;
  std::map<std::string, std::vector<BinStat>> strata;  ///< keyed by quality key name
  std::vector<Distribution> histograms;
  std::optional<BiasResult> bias;
};

/// report.txt with sorted key=value lines, plus one CSV per curve,
/// stratum and histogram. Rates use 6 decimals; empty bins print "null".
void write_report(const EvaluationReport& report, const std::filesystem::path& directory);
std::string report_text(const EvaluationReport& report);

}  // namespace earbench::eval
