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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace earbench::fusion {

/// Rows must lie on the probability simplex within this tolerance.
inline constexpr double kRowSumTolerance = 1e-6;

/// N x M class probabilities of one model: N probe samples, M classes.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  /// Throws DataError if labels or ids repeat, a row has the wrong length,
  /// an entry is negative or not finite, or a row sum is off by more than
  /// kRowSumTolerance. Unnormalized rows are rejected, never rescaled.
  ScoreMatrix(std::string model_name, std::vector<std::string> class_labels,
              std::vector<std::string> sample_ids, std::vector<std::vector<double>> rows);

  const std::string& model_name() const { return model_name_; }
  const std::vector<std::string>& class_labels() const { return class_labels_; }
  const std::vector<std::string>& sample_ids() const { return sample_ids_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }
  std::size_t samples() const { return rows_.size(); }
  std::size_t classes() const { return class_labels_.size(); }

  /// Same data with classes and samples sorted lexicographically.
  ScoreMatrix canonical() const;

 private:
  std::string model_name_;
  std::vector<std::string> class_labels_;
  std::vector<std::string> sample_ids_;
  std::vector<std::vector<double>> rows_;
};

enum class ConfidenceMethod { basic, d2s, d2sr, avg_diff, diff1 };

inline constexpr ConfidenceMethod kAllMethods[] = {ConfidenceMethod::basic, ConfidenceMethod::d2s,
                                                   ConfidenceMethod::d2sr, ConfidenceMethod::avg_diff,
                                                   ConfidenceMethod::diff1};

std::string_view to_string(ConfidenceMethod method);
/// Accepts basic, d2s, d2sr, avg-diff (or avg_diff), diff1.
ConfidenceMethod parse_method(std::string_view name);

/// With s the row sorted in descending order and M its length:
///   basic     s[0]
///   d2s       s[0] - s[1]
///   d2sr      1 - s[1] / s[0]
///   avg_diff  (1 / (M-1)) * sum_{i=1}^{M-1} (s[0] - s[i])
///   diff1     sum_{i=1}^{M-1} (s[i-1] - s[i]) / i
/// The avg_diff sum covers every non-top entry; an upper bound of M would
/// index past the end of s.
/// Throws UsageError if M < 2, or for d2sr when s[0] is 0.
double confidence(std::span<const double> row, ConfidenceMethod method);

struct FusionDecision {
  std::string sample_id;
  std::string chosen_model;
  double confidence = 0.0;
  std::string predicted_class;
};

/// Max rule: for every sample the model with the highest confidence is
/// trusted and its top class is the prediction. Equal confidences go to the
/// model listed first; equal top scores go to the first class in sorted
/// label order. Matrices are compared after canonical(); differing class
/// labels or sample ids raise DataError naming the first divergence.
/// Output follows sorted sample id order.
std::vector<FusionDecision> fuse_max(const std::vector<ScoreMatrix>& matrices, ConfidenceMethod method);

/// Fraction of decisions whose predicted class matches truth. DataError if a
/// sample has no truth entry.
double fused_accuracy(const std::vector<FusionDecision>& decisions,
                      const std::map<std::string, std::string>& truth);

/// Text format:
///   #scores v1 model=<name>
///   <class labels, tab separated>
///   <sample_id> TAB <M values> ...
/// Values are written with 17 significant digits.
void write_scores(const ScoreMatrix& matrix, std::ostream& out);
void write_scores(const ScoreMatrix& matrix, const std::filesystem::path& path);
/// DataError messages carry the offending line number.
ScoreMatrix read_scores(std::istream& in, std::string_view source = "<stream>");
ScoreMatrix read_scores(const std::filesystem::path& path);

void write_decisions(const std::vector<FusionDecision>& decisions, const std::filesystem::path& path);

}  // namespace earbench::fusion
