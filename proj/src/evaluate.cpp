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

#include "earbench/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "earbench/common.hpp"
#include "earbench/dataset.hpp"

namespace fs = std::filesystem;

namespace earbench::eval {

void BinSpec::validate() const {
  if (edges.size() < 2) throw UsageError("bin spec needs at least 2 edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) throw UsageError("bin edges must be strictly increasing");
  if (open_ended && std::isinf(edges.back())) throw UsageError("open-ended bins need a finite last edge");
}

std::size_t BinSpec::bin_count() const { return edges.size() - 1 + (open_ended ? 1 : 0); }

std::optional<std::size_t> BinSpec::bin_of(double value) const {
  if (std::isnan(value) || value < edges.front()) return std::nullopt;
  const std::size_t finite = edges.size() - 1;
  if (value >= edges.back()) {
    if (open_ended) return finite;
    if (value == edges.back()) return finite - 1;
    return std::nullopt;
  }
  const auto it = std::upper_bound(edges.begin(), edges.end(), value);
  return static_cast<std::size_t>(it - edges.begin()) - 1;
}

std::string BinSpec::bin_label(std::size_t bin) const {
  auto num = [](double v) { return std::isinf(v) ? std::string("inf") : format_real(v); };
  const std::size_t finite = edges.size() - 1;
  if (bin >= finite) return "[" + num(edges.back()) + ",inf)";
  const bool closed = bin + 1 == finite && !open_ended;
  return "[" + num(edges[bin]) + "," + num(edges[bin + 1]) + (closed ? "]" : ")");
}

BinSpec BinSpec::aspect_ratio_default() { return {{0.0, 0.5, 1.0, 1.5, 2.0, 2.5}, true}; }

BinSpec BinSpec::intensity_default() {
  BinSpec b;
  for (int v = 0; v <= 256; v += 32) b.edges.push_back(v);
  return b;
}

BinSpec BinSpec::resolution_default() { return {{0.0, 1e2, 1e3, 1e4, 1e5}, true}; }

BinSpec parse_bins(std::string_view text) {
  BinSpec b;
  auto parts = split(text, ',');
  if (!parts.empty() && trim(parts.back()) == "+") {
    b.open_ended = true;
    parts.pop_back();
  }
  try {
    for (const auto& p : parts) b.edges.push_back(parse_real(p));
  } catch (const DataError& e) {
    throw UsageError(std::string("invalid bin spec: ") + e.what());
  }
  b.validate();
  return b;
}

std::string_view to_string(QualityKey key) {
  switch (key) {
    case QualityKey::aspect_ratio: return "aspect_ratio";
    case QualityKey::mean_intensity: return "mean_intensity";
    case QualityKey::resolution: return "resolution";
  }
  return "aspect_ratio";
}

QualityKey parse_quality_key(std::string_view text) {
  if (text == "aspect_ratio" || text == "aspect-ratio") return QualityKey::aspect_ratio;
  if (text == "mean_intensity" || text == "mean-intensity") return QualityKey::mean_intensity;
  if (text == "resolution") return QualityKey::resolution;
  throw UsageError("unknown quality key '" + std::string(text) +
                   "' (expected aspect_ratio, mean_intensity, resolution)");
}

BinSpec default_bins(QualityKey key) {
  switch (key) {
    case QualityKey::aspect_ratio: return BinSpec::aspect_ratio_default();
    case QualityKey::mean_intensity: return BinSpec::intensity_default();
    case QualityKey::resolution: return BinSpec::resolution_default();
  }
  return BinSpec::aspect_ratio_default();
}

EarImage load_entry(const ManifestEntry& entry) { return load_image(entry.path); }

double quality_value(const ManifestEntry& entry, QualityKey key, const ImageLoader& loader) {
  switch (key) {
    case QualityKey::aspect_ratio: return entry.aspect_ratio();
    case QualityKey::resolution: return static_cast<double>(entry.resolution());
    case QualityKey::mean_intensity: return mean_intensity(loader(entry));
  }
  return 0.0;
}

std::size_t true_rank(const std::vector<double>& row, const std::vector<std::string>& labels,
                      const std::string& true_class) {
  const auto it = std::find(labels.begin(), labels.end(), true_class);
  if (it == labels.end()) return 0;
  const auto t = static_cast<std::size_t>(it - labels.begin());
  std::size_t ahead = 0;
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (row[c] > row[t] || (row[c] == row[t] && labels[c] < labels[t])) ++ahead;
  }
  return ahead + 1;
}

CmcCurve rank_accuracy(const fusion::ScoreMatrix& scores, const std::map<std::string, std::string>& truth,
                       std::size_t max_rank) {
  if (max_rank < 1 || max_rank > scores.classes())
    throw UsageError("max rank must be in [1, " + std::to_string(scores.classes()) + "]");
  std::vector<std::size_t> hits(max_rank, 0);
  for (std::size_t i = 0; i < scores.samples(); ++i) {
    const auto& id = scores.sample_ids()[i];
    auto it = truth.find(id);
    if (it == truth.end()) throw DataError("no ground truth for sample " + id);
    const std::size_t r = true_rank(scores.rows()[i], scores.class_labels(), it->second);
    if (r >= 1 && r <= max_rank) ++hits[r - 1];
  }
  CmcCurve curve;
  curve.samples = scores.samples();
  std::size_t cumulative = 0;
  for (std::size_t r = 0; r < max_rank; ++r) {
    cumulative += hits[r];
    curve.cmc.push_back(curve.samples ? static_cast<double>(cumulative) / static_cast<double>(curve.samples) : 0.0);
  }
  return curve;
}

std::map<std::string, bool> rank1_correct(const fusion::ScoreMatrix& scores,
                                          const std::map<std::string, std::string>& truth) {
  std::map<std::string, bool> out;
  for (std::size_t i = 0; i < scores.samples(); ++i) {
    const auto& id = scores.sample_ids()[i];
    auto it = truth.find(id);
    if (it == truth.end()) throw DataError("no ground truth for sample " + id);
    out[id] = true_rank(scores.rows()[i], scores.class_labels(), it->second) == 1;
  }
  return out;
}

std::vector<BinStat> stratify(const DatasetManifest& manifest, const std::map<std::string, bool>& per_sample_correct,
                              QualityKey key, const BinSpec& bins, const ImageLoader& loader) {
  bins.validate();
  std::vector<BinStat> stats(bins.bin_count());
  for (std::size_t b = 0; b < stats.size(); ++b) stats[b].label = bins.bin_label(b);
  for (const auto& [id, correct] : per_sample_correct) {
    const ManifestEntry* e = manifest.find(id);
    if (!e) throw DataError("sample " + id + " is not in the manifest");
    const double v = quality_value(*e, key, loader);
    const auto b = bins.bin_of(v);
    if (!b) throw DataError("sample " + id + " has " + std::string(to_string(key)) + " " + format_real(v) +
                            " outside every bin");
    ++stats[*b].count;
    if (!correct) ++stats[*b].errors;
  }
  for (auto& s : stats)
    if (s.count) s.error_rate = static_cast<double>(s.errors) / static_cast<double>(s.count);
  return stats;
}

Distribution distribution_histogram(const DatasetManifest& manifest, QualityKey key, const BinSpec& bins,
                                    const ImageLoader& loader) {
  bins.validate();
  Distribution d;
  d.name = std::string(to_string(key));
  d.counts.assign(bins.bin_count(), 0);
  for (std::size_t b = 0; b < bins.bin_count(); ++b) d.bin_labels.push_back(bins.bin_label(b));
  for (const auto& e : manifest.entries()) {
    const double v = quality_value(e, key, loader);
    const auto b = bins.bin_of(v);
    if (!b) throw DataError("image " + e.image_id + " has " + d.name + " " + format_real(v) + " outside every bin");
    ++d.counts[*b];
  }
  return d;
}

namespace {

std::string nearest_label(const lbp::Gallery& gallery, const lbp::FeatureVector& probe) {
  const auto d = gallery.class_distances(probe);
  // Nearest class; the lowest label index wins ties.
  const auto best = static_cast<std::size_t>(std::min_element(d.begin(), d.end()) - d.begin());
  return gallery.labels()[best];
}

}  // namespace

void LbpScorer::fit(const std::vector<std::pair<EarImage, std::string>>& examples) {
  std::vector<lbp::LabeledFeature> items;
  items.reserve(examples.size());
  for (const auto& [image, label] : examples) items.push_back({label, lbp::extract_features(image, config_)});
  gallery_.emplace(std::move(items));
}

std::string LbpScorer::predict(const EarImage& image) const {
  if (!gallery_) throw UsageError("LbpScorer::predict called before fit");
  return nearest_label(*gallery_, lbp::extract_features(image, config_));
}

lbp::FeatureVector HistogramScorer::histogram(const EarImage& image) {
  const EarImage gray = to_gray(image);
  lbp::FeatureVector f;
  f.values.assign(32, 0.0f);
  for (auto p : gray.pixels()) f.values[p / 8] += 1.0f;
  const auto n = static_cast<float>(gray.pixels().size());
  for (auto& v : f.values) v /= n;
  return f;
}

void HistogramScorer::fit(const std::vector<std::pair<EarImage, std::string>>& examples) {
  std::vector<lbp::LabeledFeature> items;
  items.reserve(examples.size());
  for (const auto& [image, label] : examples) items.push_back({label, histogram(image)});
  gallery_.emplace(std::move(items));
}

std::string HistogramScorer::predict(const EarImage& image) const {
  if (!gallery_) throw UsageError("HistogramScorer::predict called before fit");
  return nearest_label(*gallery_, histogram(image));
}

std::unique_ptr<Scorer> make_scorer(std::string_view name, const lbp::LbpConfig& config) {
  if (name == "lbp") return std::make_unique<LbpScorer>(config);
  if (name == "histogram") return std::make_unique<HistogramScorer>();
  throw UsageError("unknown scorer '" + std::string(name) + "' (expected lbp or histogram)");
}

BiasResult bias_experiment(const std::vector<DatasetManifest>& manifests, Scorer& scorer, const BiasOptions& options,
                           const ImageLoader& loader) {
  std::vector<ManifestEntry> entries;
  std::map<std::string, std::size_t> per_dataset;
  for (const auto& m : manifests)
    for (ManifestEntry e : m.entries()) {
      ++per_dataset[e.dataset_name];
      e.subject = e.dataset_name;
      entries.push_back(std::move(e));
    }
  if (per_dataset.size() < 2) throw UsageError("dataset identification needs at least 2 distinct datasets");
  for (const auto& [name, n] : per_dataset)
    if (n < 2) throw DataError("dataset " + name + " has fewer than 2 images");

  SplitRatios ratios{options.train_fraction, 0.0, 1.0 - options.train_fraction};
  const DatasetManifest split =
      split_manifest(DatasetManifest(std::move(entries)), ratios, derive_seed(options.seed, "bias"));

  std::vector<const ManifestEntry*> train, test;
  for (const auto& e : split.entries()) (e.split == Split::train ? train : test).push_back(&e);

  std::vector<std::pair<EarImage, std::string>> examples(train.size());
  parallel_for(train.size(), options.jobs, [&](std::size_t i) {
    examples[i] = {loader(*train[i]), train[i]->subject};
  });
  scorer.fit(examples);

  std::vector<std::string> predicted(test.size());
  parallel_for(test.size(), options.jobs, [&](std::size_t i) { predicted[i] = scorer.predict(loader(*test[i])); });

  BiasResult r;
  for (const auto& [name, n] : per_dataset) r.datasets.push_back(name);
  r.confusion.assign(r.datasets.size(), std::vector<std::size_t>(r.datasets.size(), 0));
  auto index_of = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::lower_bound(r.datasets.begin(), r.datasets.end(), name);
    if (it == r.datasets.end() || *it != name) return std::nullopt;
    return static_cast<std::size_t>(it - r.datasets.begin());
  };
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto t = index_of(test[i]->subject);
    const auto p = index_of(predicted[i]);
    if (!p) throw DataError("scorer predicted unknown dataset '" + predicted[i] + "'");
    ++r.confusion[*t][*p];
    if (*t == *p) ++correct;
  }
  r.train_count = train.size();
  r.test_count = test.size();
  r.accuracy = test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());
  return r;
}

namespace {

std::string rate(std::optional<double> v) { return v ? format_fixed(*v, 6) : "null"; }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("error writing " + path.string());
}

}  // namespace

std::string report_text(const EvaluationReport& report) {
  std::map<std::string, std::string> kv;
  if (report.cmc) {
    kv["samples"] = std::to_string(report.cmc->samples);
    kv["rank1"] = format_fixed(report.cmc->rank1(), 6);
    for (std::size_t r = 0; r < report.cmc->cmc.size(); ++r) {
      char key[32];
      std::snprintf(key, sizeof key, "cmc.%04zu", r + 1);
      kv[key] = format_fixed(report.cmc->cmc[r], 6);
    }
  }
  for (const auto& [name, bins] : report.strata)
    for (std::size_t b = 0; b < bins.size(); ++b) {
      const std::string k = "stratum." + name + "." + std::to_string(b) + ".";
      kv[k + "bin"] = bins[b].label;
      kv[k + "count"] = std::to_string(bins[b].count);
      kv[k + "errors"] = std::to_string(bins[b].errors);
      kv[k + "error_rate"] = rate(bins[b].error_rate);
    }
  for (const auto& h : report.histograms)
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      const std::string k = "histogram." + h.name + "." + std::to_string(b) + ".";
      kv[k + "bin"] = h.bin_labels[b];
      kv[k + "count"] = std::to_string(h.counts[b]);
    }
  if (report.bias) {
    const auto& b = *report.bias;
    kv["bias.accuracy"] = format_fixed(b.accuracy, 6);
    kv["bias.train_count"] = std::to_string(b.train_count);
    kv["bias.test_count"] = std::to_string(b.test_count);
    for (std::size_t i = 0; i < b.datasets.size(); ++i)
      for (std::size_t j = 0; j < b.datasets.size(); ++j)
        kv["bias.confusion." + b.datasets[i] + "." + b.datasets[j]] = std::to_string(b.confusion[i][j]);
  }
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

void write_report(const EvaluationReport& report, const fs::path& directory) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (!fs::is_directory(directory)) throw DataError("cannot create report directory " + directory.string());
  write_file(directory / "report.txt", report_text(report));
  if (report.cmc) {
    std::string csv = "rank,accuracy\n";
    for (std::size_t r = 0; r < report.cmc->cmc.size(); ++r)
      csv += std::to_string(r + 1) + "," + format_fixed(report.cmc->cmc[r], 6) + "\n";
    write_file(directory / "cmc.csv", csv);
  }
  for (const auto& [name, bins] : report.strata) {
    std::string csv = "bin,count,errors,error_rate\n";
    for (const auto& b : bins)
      csv += csv_field(b.label) + "," + std::to_string(b.count) + "," + std::to_string(b.errors) + "," +
             rate(b.error_rate) + "\n";
    write_file(directory / ("stratum_" + name + ".csv"), csv);
  }
  for (const auto& h : report.histograms) {
    std::string csv = "bin,count\n";
    for (std::size_t b = 0; b < h.counts.size(); ++b)
      csv += csv_field(h.bin_labels[b]) + "," + std::to_string(h.counts[b]) + "\n";
    write_file(directory / ("histogram_" + h.name + ".csv"), csv);
  }
  if (report.bias) {
    const auto& b = *report.bias;
    std::string csv = "true\\predicted";
    for (const auto& d : b.datasets) csv += "," + csv_field(d);
    csv += "\n";
    for (std::size_t i = 0; i < b.datasets.size(); ++i) {
      csv += csv_field(b.datasets[i]);
      for (auto c : b.confusion[i]) csv += "," + std::to_string(c);
      csv += "\n";
    }
    write_file(directory / "bias_confusion.csv", csv);
  }
}

}  // namespace earbench::eval
