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

#include "earbench/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "earbench/common.hpp"

namespace earbench::fusion {

ScoreMatrix::ScoreMatrix(std::string model_name, std::vector<std::string> class_labels,
                         std::vector<std::string> sample_ids, std::vector<std::vector<double>> rows)
    : model_name_(std::move(model_name)),
      class_labels_(std::move(class_labels)),
      sample_ids_(std::move(sample_ids)),
      rows_(std::move(rows)) {
  const std::string who = "score matrix '" + model_name_ + "': ";
  if (std::set<std::string>(class_labels_.begin(), class_labels_.end()).size() != class_labels_.size())
    throw DataError(who + "duplicate class label");
  if (std::set<std::string>(sample_ids_.begin(), sample_ids_.end()).size() != sample_ids_.size())
    throw DataError(who + "duplicate sample id");
  if (rows_.size() != sample_ids_.size()) throw DataError(who + "row count differs from sample count");
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& row = rows_[i];
    if (row.size() != class_labels_.size())
      throw DataError(who + "row " + sample_ids_[i] + " has " + std::to_string(row.size()) + " values, expected " +
                      std::to_string(class_labels_.size()));
    double sum = 0.0;
    for (double v : row) {
      if (!std::isfinite(v) || v < 0.0) throw DataError(who + "row " + sample_ids_[i] + " has a negative or non-finite value");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance)
      throw DataError(who + "row " + sample_ids_[i] + " sums to " + format_real(sum) + ", not 1");
  }
}

namespace {

std::vector<std::size_t> sorted_order(const std::vector<std::string>& keys) {
  std::vector<std::size_t> idx(keys.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  return idx;
}

}  // namespace

ScoreMatrix ScoreMatrix::canonical() const {
  const auto cls = sorted_order(class_labels_);
  const auto smp = sorted_order(sample_ids_);
  std::vector<std::string> labels, ids;
  std::vector<std::vector<double>> rows;
  for (auto c : cls) labels.push_back(class_labels_[c]);
  for (auto s : smp) {
    ids.push_back(sample_ids_[s]);
    std::vector<double> row;
    row.reserve(cls.size());
    for (auto c : cls) row.push_back(rows_[s][c]);
    rows.push_back(std::move(row));
  }
  ScoreMatrix out;
  out.model_name_ = model_name_;
  out.class_labels_ = std::move(labels);
  out.sample_ids_ = std::move(ids);
  out.rows_ = std::move(rows);
  return out;
}

std::string_view to_string(ConfidenceMethod method) {
  switch (method) {
    case ConfidenceMethod::basic: return "basic";
    case ConfidenceMethod::d2s: return "d2s";
    case ConfidenceMethod::d2sr: return "d2sr";
    case ConfidenceMethod::avg_diff: return "avg-diff";
    case ConfidenceMethod::diff1: return "diff1";
  }
  return "basic";
}

ConfidenceMethod parse_method(std::string_view name) {
  if (name == "basic") return ConfidenceMethod::basic;
  if (name == "d2s") return ConfidenceMethod::d2s;
  if (name == "d2sr") return ConfidenceMethod::d2sr;
  if (name == "avg-diff" || name == "avg_diff") return ConfidenceMethod::avg_diff;
  if (name == "diff1") return ConfidenceMethod::diff1;
  throw UsageError("unknown confidence method '" + std::string(name) +
                   "' (expected basic, d2s, d2sr, avg-diff, diff1)");
}

double confidence(std::span<const double> row, ConfidenceMethod method) {
  const std::size_t m = row.size();
  if (m < 2) throw UsageError("confidence needs at least 2 classes");
  std::vector<double> s(row.begin(), row.end());
  std::sort(s.begin(), s.end(), std::greater<>());
  switch (method) {
    case ConfidenceMethod::basic: return s[0];
    case ConfidenceMethod::d2s: return s[0] - s[1];
    case ConfidenceMethod::d2sr:
      if (s[0] == 0.0) throw UsageError("d2sr undefined when the top score is 0");
      return 1.0 - s[1] / s[0];
    case ConfidenceMethod::avg_diff: {
      double sum = 0.0;
      for (std::size_t i = 1; i < m; ++i) sum += s[0] - s[i];
      return sum / static_cast<double>(m - 1);
    }
    case ConfidenceMethod::diff1: {
      double sum = 0.0;
      for (std::size_t i = 1; i < m; ++i) sum += (s[i - 1] - s[i]) / static_cast<double>(i);
      return sum;
    }
  }
  throw UsageError("unknown confidence method");
}

namespace {

void check_same_axis(const std::vector<std::string>& expected, const std::vector<std::string>& got,
                     const std::string& what, const std::string& ref_model, const std::string& model) {
  const std::size_t n = std::min(expected.size(), got.size());
  for (std::size_t i = 0; i < n; ++i)
    if (expected[i] != got[i])
      throw DataError("model '" + model + "' " + what + " #" + std::to_string(i + 1) + " is '" + got[i] +
                      "' but model '" + ref_model + "' has '" + expected[i] + "'");
  if (expected.size() != got.size())
    throw DataError("model '" + model + "' has " + std::to_string(got.size()) + " " + what + "s but model '" +
                    ref_model + "' has " + std::to_string(expected.size()));
}

}  // namespace

std::vector<FusionDecision> fuse_max(const std::vector<ScoreMatrix>& matrices, ConfidenceMethod method) {
  if (matrices.size() < 2) throw UsageError("fusion needs at least 2 score matrices");
  std::vector<ScoreMatrix> canon;
  canon.reserve(matrices.size());
  for (const auto& m : matrices) canon.push_back(m.canonical());
  const auto& ref = canon.front();
  for (std::size_t k = 1; k < canon.size(); ++k) {
    check_same_axis(ref.class_labels(), canon[k].class_labels(), "class label", ref.model_name(), canon[k].model_name());
    check_same_axis(ref.sample_ids(), canon[k].sample_ids(), "sample id", ref.model_name(), canon[k].model_name());
  }

  std::vector<FusionDecision> out;
  out.reserve(ref.samples());
  for (std::size_t i = 0; i < ref.samples(); ++i) {
    std::size_t best_model = 0;
    double best = confidence(canon[0].rows()[i], method);
    for (std::size_t k = 1; k < canon.size(); ++k) {
      const double c = confidence(canon[k].rows()[i], method);
      if (c > best) {
        best = c;
        best_model = k;
      }
    }
    const auto& row = canon[best_model].rows()[i];
    const auto top = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    out.push_back({ref.sample_ids()[i], canon[best_model].model_name(), best, ref.class_labels()[top]});
  }
  return out;
}

double fused_accuracy(const std::vector<FusionDecision>& decisions,
                      const std::map<std::string, std::string>& truth) {
  if (decisions.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& d : decisions) {
    auto it = truth.find(d.sample_id);
    if (it == truth.end()) throw DataError("no ground truth for sample " + d.sample_id);
    if (it->second == d.predicted_class) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(decisions.size());
}

void write_scores(const ScoreMatrix& matrix, std::ostream& out) {
  out << "#scores v1 model=" << matrix.model_name() << '\n';
  for (std::size_t c = 0; c < matrix.classes(); ++c) out << (c ? "\t" : "") << matrix.class_labels()[c];
  out << '\n';
  for (std::size_t i = 0; i < matrix.samples(); ++i) {
    out << matrix.sample_ids()[i];
    for (double v : matrix.rows()[i]) out << '\t' << format_precise(v);
    out << '\n';
  }
}

void write_scores(const ScoreMatrix& matrix, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_scores(matrix, out);
  if (!out) throw DataError("error writing " + path.string());
}

ScoreMatrix read_scores(std::istream& in, std::string_view source) {
  const std::string src(source);
  std::string line;
  constexpr std::string_view kHeader = "#scores v1 model=";
  if (!std::getline(in, line)) throw DataError(src + ":1: empty score file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (!line.starts_with(kHeader)) throw DataError(src + ":1: expected '#scores v1 model=<name>' header");
  std::string model = line.substr(kHeader.size());
  if (model.empty()) throw DataError(src + ":1: empty model name");
  if (!std::getline(in, line)) throw DataError(src + ":2: missing class label line");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> labels = split(line, '\t');
  if (labels.size() < 2) throw DataError(src + ":2: need at least 2 class labels");
  if (std::set<std::string>(labels.begin(), labels.end()).size() != labels.size())
    throw DataError(src + ":2: duplicate class label");

  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  std::set<std::string> seen;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = src + ":" + std::to_string(lineno) + ": ";
    auto f = split(line, '\t');
    if (f.size() != labels.size() + 1)
      throw DataError(where + "expected " + std::to_string(labels.size()) + " scores, got " + std::to_string(f.size() - 1));
    if (!seen.insert(f[0]).second) throw DataError(where + "duplicate sample id " + f[0]);
    std::vector<double> row;
    row.reserve(labels.size());
    double sum = 0.0;
    for (std::size_t c = 1; c < f.size(); ++c) {
      double v;
      try {
        v = parse_real(f[c]);
      } catch (const DataError& e) {
        throw DataError(where + e.what());
      }
      if (!std::isfinite(v) || v < 0.0) throw DataError(where + "scores must be finite and non-negative");
      sum += v;
      row.push_back(v);
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance)
      throw DataError(where + "row sums to " + format_real(sum) + "; rows must sum to 1 within 1e-6");
    ids.push_back(f[0]);
    rows.push_back(std::move(row));
  }
  return ScoreMatrix(std::move(model), std::move(labels), std::move(ids), std::move(rows));
}

ScoreMatrix read_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open score file " + path.string());
  return read_scores(in, path.string());
}

void write_decisions(const std::vector<FusionDecision>& decisions, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "#sample_id\tchosen_model\tconfidence\tpredicted_class\n";
  for (const auto& d : decisions)
    out << d.sample_id << '\t' << d.chosen_model << '\t' << format_precise(d.confidence) << '\t' << d.predicted_class
        << '\n';
}

}  // namespace earbench::fusion
