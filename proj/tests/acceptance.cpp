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

// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "earbench/augment.hpp"
#include "earbench/cli.hpp"
#include "earbench/common.hpp"
#include "earbench/evaluate.hpp"
#include "earbench/fusion.hpp"
#include "earbench/lbp.hpp"
#include "earbench/synthetic.hpp"
#include "test_support.hpp"

using namespace earbench;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<double> random_simplex(Rng& rng, std::size_t m) {
  std::vector<double> r(m);
  double s = 0;
  for (auto& v : r) s += v = -std::log(1.0 - rng.uniform());
  for (auto& v : r) v /= s;
  return r;
}

// Independent evaluation of the confidence formulas: selection sort in long
// double, then each definition written out term by term.
long double oracle_confidence(const std::vector<double>& row, fusion::ConfidenceMethod method) {
  std::vector<long double> s(row.begin(), row.end());
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::size_t best = i;
    for (std::size_t j = i + 1; j < s.size(); ++j)
      if (s[j] > s[best]) best = j;
    std::swap(s[i], s[best]);
  }
  const std::size_t m = s.size();
  switch (method) {
    case fusion::ConfidenceMethod::basic: return s[0];
    case fusion::ConfidenceMethod::d2s: return s[0] - s[1];
    case fusion::ConfidenceMethod::d2sr: return 1.0L - s[1] / s[0];
    case fusion::ConfidenceMethod::avg_diff: {
      long double acc = 0;
      for (std::size_t i = 1; i <= m - 1; ++i) acc += s[0] - s[i];
      return acc / static_cast<long double>(m - 1);
    }
    case fusion::ConfidenceMethod::diff1: {
      long double acc = 0;
      for (std::size_t i = 1; i <= m - 1; ++i) acc += (s[i - 1] - s[i]) / static_cast<long double>(i);
      return acc;
    }
  }
  return 0;
}

std::vector<std::vector<double>> oracle_rows() {
  Rng rng(2018);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 1000; ++i) rows.push_back(random_simplex(rng, 2 + rng.below(19)));
  return rows;
}

Check fusion_oracle() {
  Check c;
  const auto rows = oracle_rows();
  const auto t0 = Clock::now();
  long double worst = 0;
  for (const auto& r : rows)
    for (auto m : fusion::kAllMethods) {
      const long double diff = std::fabs(static_cast<long double>(fusion::confidence(r, m)) - oracle_confidence(r, m));
      worst = std::max(worst, diff);
      c.expect(diff <= 1e-12L, std::string(fusion::to_string(m)) + " differs from the oracle");
    }
  const double secs = seconds_since(t0);
  c.expect(secs < 1.0, "runtime " + format_fixed(secs, 3) + " s >= 1 s");
  if (c.ok)
    c.detail = "1000 rows x 5 methods, max |diff| " + format_precise(static_cast<double>(worst)) + ", " +
               format_fixed(secs, 3) + " s";
  return c;
}

Check fusion_invariants() {
  Check c;
  using M = fusion::ConfidenceMethod;
  for (const auto& r : oracle_rows()) {
    const double basic = fusion::confidence(r, M::basic), d2s = fusion::confidence(r, M::d2s);
    const double d2sr = fusion::confidence(r, M::d2sr), avg = fusion::confidence(r, M::avg_diff);
    c.expect(0.0 <= d2s && d2s <= basic && basic <= 1.0, "0 <= d2s <= basic <= 1 violated");
    c.expect(0.0 <= d2sr && d2sr <= 1.0, "d2sr outside [0,1]");
    c.expect(avg <= basic, "avg_diff > basic");
  }
  for (std::size_t m = 2; m <= 20; ++m) {
    const std::vector<double> u(m, 1.0 / static_cast<double>(m));
    for (auto method : {M::d2s, M::d2sr, M::avg_diff, M::diff1})
      c.expect(fusion::confidence(u, method) == 0.0, "nonzero difference on a uniform row, M=" + std::to_string(m));
  }
  if (c.ok) c.detail = "1000 random rows, uniform rows M=2..20 exact zero";
  return c;
}

Check max_rule() {
  Check c;
  constexpr int kModels = 3, kSamples = 50, kClasses = 5;
  Rng rng(77);
  std::vector<std::string> labels, ids;
  for (int k = 0; k < kClasses; ++k) labels.push_back("class" + std::to_string(k));
  std::vector<std::vector<std::vector<double>>> rows(kModels);
  std::map<std::string, std::string> truth;
  for (int i = 0; i < kSamples; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "s%02d", i);
    ids.push_back(id);
    const auto t = static_cast<std::size_t>(rng.below(kClasses));
    truth[id] = labels[t];
    for (int k = 0; k < kModels; ++k) {
      std::vector<double> row(kClasses);
      if (i % kModels == k) {
        // This model's strong sample: a confident, correct row.
        const double top = 0.7 + 0.25 * rng.uniform();
        auto rest = random_simplex(rng, kClasses - 1);
        for (std::size_t j = 0, r = 0; j < kClasses; ++j) row[j] = j == t ? top : (1.0 - top) * rest[r++];
      } else {
        // A hesitant row, wrong half of the time.
        const std::size_t top_class = rng.below(2) ? t : (t + 1 + rng.below(kClasses - 1)) % kClasses;
        const double top = 0.28 + 0.04 * rng.uniform();
        for (std::size_t j = 0; j < kClasses; ++j) row[j] = j == top_class ? top : (1.0 - top) / (kClasses - 1);
      }
      rows[k].push_back(row);
    }
  }
  std::vector<fusion::ScoreMatrix> models;
  for (int k = 0; k < kModels; ++k) models.emplace_back("model" + std::to_string(k), labels, ids, rows[k]);

  auto row_argmax = [](const std::vector<double>& r) {
    return static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
  };
  double best_single = 0;
  for (int k = 0; k < kModels; ++k) {
    int correct = 0;
    for (int i = 0; i < kSamples; ++i) correct += labels[row_argmax(rows[k][i])] == truth[ids[i]];
    best_single = std::max(best_single, static_cast<double>(correct) / kSamples);
  }
  double worst_fused = 1.0;
  for (auto method : fusion::kAllMethods) {
    const auto decisions = fusion::fuse_max(models, method);
    c.expect(decisions.size() == kSamples, "decision count");
    // Exhaustive enumeration: every model's confidence for every sample.
    int oracle_correct = 0;
    for (int i = 0; i < kSamples && c.ok; ++i) {
      int chosen = 0;
      long double best = oracle_confidence(rows[0][i], method);
      for (int k = 1; k < kModels; ++k) {
        const long double v = oracle_confidence(rows[k][i], method);
        if (v > best) best = v, chosen = k;
      }
      const std::string predicted = labels[row_argmax(rows[chosen][i])];
      oracle_correct += predicted == truth[ids[i]];
      c.expect(decisions[i].sample_id == ids[i], "sample order");
      c.expect(decisions[i].chosen_model == "model" + std::to_string(chosen),
               std::string(fusion::to_string(method)) + ": chosen model differs from enumeration at " + ids[i]);
      c.expect(decisions[i].predicted_class == predicted, "predicted class differs from enumeration");
    }
    const double fused = fusion::fused_accuracy(decisions, truth);
    c.expect(fused == static_cast<double>(oracle_correct) / kSamples, "fused accuracy differs from enumeration");
    c.expect(fused > best_single, std::string(fusion::to_string(method)) + ": fusion does not beat the best model");
    worst_fused = std::min(worst_fused, fused);
  }
  if (c.ok)
    c.detail = "3 models x 50 samples, fused >= " + format_fixed(worst_fused, 2) + " vs best single " +
               format_fixed(best_single, 2) + " for all 5 methods";
  return c;
}

Check augmentation_count() {
  Check c;
  earbench::testing::TempDir dir("acc_aug");
  std::vector<ManifestEntry> entries;
  for (int i = 0; i < 50; ++i) {
    const auto path = dir / ("src_" + std::to_string(i) + ".png");
    EarImage img = synthetic::subject_image(i % 10, i, 99);
    if (i % 2) {
      // Half the inputs are color.
      EarImage rgb(img.width(), img.height(), 3);
      for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
          for (int ch = 0; ch < 3; ++ch) rgb.at(x, y, ch) = static_cast<std::uint8_t>(img.at(x, y) / (ch + 1));
      img = rgb;
    }
    save_png(img, path);
    ManifestEntry e;
    e.image_id = "toy/s" + std::to_string(i % 10) + "/" + std::to_string(i) + ".png";
    e.path = path.string();
    e.subject = "s" + std::to_string(i % 10);
    e.dataset_name = "toy";
    e.split = Split::train;
    e.width = img.width();
    e.height = img.height();
    entries.push_back(e);
  }
  const DatasetManifest m(entries);
  const auto cfg = AugmentConfig::uerc();
  const std::size_t plan = plan_augmentations(cfg, false).size();
  // 12 + 11 + 8 + 16 + 9 + 7 grid values, dropout 2, contrast 4, scale 2,
  // translate 2, 5 crops and 1 flip.
  const std::size_t expected_plan = 12 + 11 + 8 + 16 + 9 + 7 + 2 + 4 + 2 + 2 + 5 + 1;
  c.expect(plan == expected_plan, "plan size " + std::to_string(plan));

  const auto t0 = Clock::now();
  AugmentOptions serial, threaded;
  threaded.jobs = 4;
  const auto a = augment_dataset(m, cfg, dir / "a", serial);
  const double first = seconds_since(t0);
  const auto b = augment_dataset(m, cfg, dir / "b", threaded);
  const double total = seconds_since(t0);
  c.expect(a.size() == 50 * (expected_plan + 1), "output count " + std::to_string(a.size()));
  c.expect(a.size() == b.size(), "second run count differs");
  std::size_t compared = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size() && c.ok; ++i) {
    c.expect(a.entries()[i].image_id == b.entries()[i].image_id, "ids differ between runs");
    if (a.entries()[i].image_id.find('#') == std::string::npos) continue;
    c.expect(earbench::testing::slurp(a.entries()[i].path) == earbench::testing::slurp(b.entries()[i].path),
             "PNG bytes differ for " + a.entries()[i].image_id);
    ++compared;
  }
  c.expect(first < 60.0, "single run took " + format_fixed(first, 1) + " s");
  if (c.ok)
    c.detail = "50 x (" + std::to_string(plan) + "+1) = " + std::to_string(a.size()) + " entries; " +
               std::to_string(compared) + " PNGs byte-identical across jobs=1/jobs=4; " + format_fixed(first, 1) +
               " s per run (" + format_fixed(total, 1) + " s both)";
  return c;
}

Check transform_identities() {
  Check c;
  Rng rng(5);
  auto spec = [](Family f, double p) {
    TransformSpec s;
    s.family = f;
    s.parameter = p;
    s.seed = 3;
    return s;
  };
  auto clamp255 = [](double v) { return static_cast<int>(std::clamp(std::lround(v), 0L, 255L)); };
  const auto cfg = AugmentConfig::uerc();
  int images = 0;
  for (int trial = 0; trial < 40; ++trial, ++images) {
    EarImage img(8 + static_cast<int>(rng.below(40)), 8 + static_cast<int>(rng.below(40)), rng.below(2) ? 3 : 1);
    for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(rng.below(256));
    c.expect(apply_transform(img, spec(Family::brightness_add, 0)) == img, "add 0 changed the image");
    c.expect(apply_transform(img, spec(Family::brightness_mul, 1.0)) == img, "mul 1.0 changed the image");
    c.expect(apply_transform(img, spec(Family::rotate, 0)) == img, "rotate 0 changed the image");
    c.expect(apply_transform(img, spec(Family::scale, 1.0)) == img, "scale 1.0 changed the image");
    c.expect(apply_transform(img, spec(Family::shear, 0)) == img, "shear 0 changed the image");
    c.expect(apply_transform(img, spec(Family::translate, 0)) == img, "translate 0 changed the image");
    for (double a : cfg.brightness_add_values) {
      const auto out = apply_transform(img, spec(Family::brightness_add, a));
      for (std::size_t i = 0; i < img.pixels().size(); ++i)
        c.expect(out.pixels()[i] == clamp255(img.pixels()[i] + a), "add does not saturate to [0,255]");
    }
    // Exact integer oracle: v * k / 10 rounded half up.
    for (double m : cfg.brightness_mul_values) {
      const long k = std::lround(m * 10);
      const auto out = apply_transform(img, spec(Family::brightness_mul, m));
      for (std::size_t i = 0; i < img.pixels().size(); ++i)
        c.expect(out.pixels()[i] == std::min(255L, (img.pixels()[i] * k * 2 + 10) / 20),
                 "mul does not saturate to [0,255]");
    }
    for (double a : cfg.contrast_alphas) {
      const auto out = apply_transform(img, spec(Family::contrast, a));
      for (std::size_t i = 0; i < img.pixels().size(); ++i)
        c.expect(out.pixels()[i] == clamp255(a * (img.pixels()[i] - 128.0) + 128.0), "contrast does not saturate");
    }
    // Sharpen on a flat patch scales it by (1 + L) / 2, i.e. v * (10 + k) / 20 for L = k / 10.
    const EarImage flat(5, 5, 1, static_cast<std::uint8_t>(rng.below(256)));
    for (double l : cfg.sharpen_values) {
      const long a = flat.at(0, 0) * (10 + std::lround(l * 10));
      const auto out = apply_transform(flat, spec(Family::sharpen, l));
      c.expect(out.at(2, 2) == std::min(255L, (2 * a + 20) / 40), "sharpen does not saturate");
    }
  }
  if (c.ok) c.detail = std::to_string(images) + " random images: 6 identities exact, add/mul/contrast/sharpen clamp";
  return c;
}

EarImage checkerboard(int w, int h, int period, int phase) {
  EarImage img(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = (((x + phase) / period + y / period) % 2) ? 210 : 40;
  return img;
}

Check lbp_suite() {
  Check c;
  const auto t0 = Clock::now();
  c.expect(lbp::lbp_code({9, 9, 9, 9, 9, 9, 9, 9, 9}) == 255, "flat window is not 255");
  c.expect(lbp::lbp_code({1, 1, 1, 1, 200, 1, 1, 1, 1}) == 0, "peak window is not 0");
  c.expect(lbp::lbp_code({6, 6, 6, 4, 5, 6, 4, 4, 4}) == 15, "ordered window is not 15");

  Rng rng(11);
  for (auto [rows, cols] : {std::pair{8, 8}, std::pair{4, 6}, std::pair{1, 1}}) {
    lbp::LbpConfig cfg;
    cfg.grid_rows = rows;
    cfg.grid_cols = cols;
    EarImage img(30 + static_cast<int>(rng.below(100)), 30 + static_cast<int>(rng.below(100)), 3);
    for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(rng.below(256));
    const auto f = lbp::extract_features(img, cfg);
    c.expect(f.size() == static_cast<std::size_t>(rows * cols * 59), "feature length");
    for (int cell = 0; cell < rows * cols; ++cell) {
      double s = 0;
      for (int b = 0; b < 59; ++b) s += f.values[cell * 59 + b];
      c.expect(std::abs(s - 1.0) <= 1e-6, "cell histogram L1 != 1");
    }
  }
  for (int t = 0; t < 100; ++t) {
    lbp::FeatureVector a, b;
    for (int i = 0; i < 300; ++i) {
      a.values.push_back(rng.below(3) ? static_cast<float>(rng.uniform()) : 0.0f);
      b.values.push_back(rng.below(3) ? static_cast<float>(rng.uniform()) : 0.0f);
    }
    c.expect(lbp::chi_square_distance(a, a) == 0.0, "d(x,x) != 0");
    c.expect(lbp::chi_square_distance(a, b) == lbp::chi_square_distance(b, a), "asymmetric distance");
    c.expect(lbp::chi_square_distance(a, b) >= 0.0, "negative distance");
    std::vector<double> d(2 + rng.below(15));
    for (auto& v : d) v = rng.uniform() * 3;
    const auto nearest = lbp::argmax(lbp::softmax_of_distances(d, 1.0));
    for (double temp : {1e-3, 0.1, 10.0, 1e4})
      c.expect(lbp::argmax(lbp::softmax_of_distances(d, temp)) == nearest, "argmax depends on temperature");
  }

  // Self-probe gallery: 10 checkerboard periods, 3 phase-shifted variants each.
  std::vector<lbp::LabeledFeature> items;
  std::vector<std::pair<std::string, lbp::FeatureVector>> probes;
  for (int period = 2; period < 12; ++period)
    for (int v = 0; v < 3; ++v) {
      auto f = lbp::extract_features(checkerboard(96 + 8 * v, 128, period, v));
      const std::string label = "period" + std::to_string(period);
      items.push_back({label, f});
      probes.emplace_back(label, f);
    }
  const lbp::Gallery gallery(items);
  std::size_t hits = 0;
  for (const auto& [label, f] : probes) hits += gallery.labels()[lbp::argmax(gallery.classify(f))] == label;
  c.expect(hits == probes.size(), "self-probe rank-1 " + std::to_string(hits) + "/" + std::to_string(probes.size()));
  const double secs = seconds_since(t0);
  c.expect(secs < 10.0, "runtime " + format_fixed(secs, 2) + " s >= 10 s");
  if (c.ok)
    c.detail = "code examples, lengths, L1, chi-square, temperature invariance, self-probe " + std::to_string(hits) +
               "/" + std::to_string(probes.size()) + ", " + format_fixed(secs, 2) + " s";
  return c;
}

Check evaluation_suite() {
  Check c;
  Rng rng(21);
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = 2 + rng.below(10), n = 1 + rng.below(40);
    std::vector<std::string> labels, ids;
    for (std::size_t k = 0; k < m; ++k) labels.push_back("c" + std::to_string(k));
    std::vector<std::vector<double>> rows;
    std::map<std::string, std::string> truth;
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back("s" + std::to_string(i));
      rows.push_back(random_simplex(rng, m));
      truth[ids.back()] = labels[rng.below(m)];
    }
    const auto cmc = eval::rank_accuracy(fusion::ScoreMatrix("m", labels, ids, rows), truth, m);
    for (std::size_t r = 1; r < m; ++r) c.expect(cmc.cmc[r - 1] <= cmc.cmc[r], "CMC not monotone");
    c.expect(cmc.cmc.back() == 1.0, "cmc[M] != 1");

    std::vector<ManifestEntry> entries;
    std::map<std::string, bool> correct;
    for (std::size_t i = 0; i < n; ++i) {
      ManifestEntry e;
      e.image_id = ids[i];
      e.path = ids[i];
      e.subject = "x";
      e.dataset_name = "d";
      e.width = 1 + static_cast<int>(rng.below(500));
      e.height = 1 + static_cast<int>(rng.below(500));
      entries.push_back(e);
      correct[ids[i]] = rng.below(2) == 0;
    }
    const DatasetManifest manifest(entries);
    for (auto key : {eval::QualityKey::aspect_ratio, eval::QualityKey::resolution}) {
      std::size_t sum = 0;
      for (const auto& b : eval::stratify(manifest, correct, key, eval::default_bins(key))) sum += b.count;
      c.expect(sum == n, "strata counts do not sum to N");
    }
  }

  // Hand-built 6 samples with aspect ratios 0.5, 0.8, 1.0, 1.5, 2.5, 3.0.
  const int heights[6] = {5, 8, 10, 15, 25, 30};
  const bool ok[6] = {true, false, true, false, false, false};
  std::vector<ManifestEntry> entries;
  std::map<std::string, bool> correct;
  for (int i = 0; i < 6; ++i) {
    ManifestEntry e;
    e.image_id = "p" + std::to_string(i);
    e.path = e.image_id;
    e.subject = "x";
    e.dataset_name = "d";
    e.width = 10;
    e.height = heights[i];
    entries.push_back(e);
    correct[e.image_id] = ok[i];
  }
  const auto strata =
      eval::stratify(DatasetManifest(entries), correct, eval::QualityKey::aspect_ratio, eval::BinSpec{{0, 1, 2}, true});
  std::size_t count[3] = {}, errors[3] = {};
  for (int i = 0; i < 6; ++i) {
    const double ar = heights[i] / 10.0;
    const int b = ar < 1 ? 0 : ar < 2 ? 1 : 2;
    ++count[b];
    errors[b] += !ok[i];
  }
  c.expect(strata.size() == 3, "bin count");
  for (int b = 0; b < 3 && c.ok; ++b) {
    c.expect(strata[b].count == count[b], "hand-built count mismatch in bin " + std::to_string(b));
    c.expect(strata[b].errors == errors[b], "hand-built error mismatch in bin " + std::to_string(b));
  }
  if (c.ok) c.detail = "200 random matrices/manifests, hand-built 6-sample strata 2/2/2 match";
  return c;
}

Check bias_experiment() {
  Check c;
  std::vector<ManifestEntry> dark, light;
  for (int i = 0; i < 30; ++i) {
    ManifestEntry e;
    e.image_id = "dark/" + std::to_string(i);
    e.path = e.image_id;
    e.subject = "x";
    e.dataset_name = "dark";
    e.width = 40 + i;
    e.height = 60;
    dark.push_back(e);
    e.image_id = "light/" + std::to_string(i);
    e.path = e.image_id;
    e.dataset_name = "light";
    light.push_back(e);
  }
  const eval::ImageLoader constant = [](const ManifestEntry& e) {
    return EarImage(e.width, e.height, 1, e.dataset_name == "dark" ? 40 : 200);
  };
  eval::HistogramScorer hist;
  const auto separable = eval::bias_experiment({DatasetManifest(dark), DatasetManifest(light)}, hist, {}, constant);
  c.expect(separable.accuracy == 1.0, "disjoint intensities gave " + format_fixed(separable.accuracy, 4));

  // One distribution split in two under different names.
  std::vector<ManifestEntry> halves;
  for (int i = 0; i < 400; ++i) {
    ManifestEntry e;
    e.image_id = "img" + std::to_string(i);
    e.path = e.image_id;
    e.subject = "x";
    e.dataset_name = i % 2 ? "half_a" : "half_b";
    e.width = 32;
    e.height = 32;
    halves.push_back(e);
  }
  const eval::ImageLoader noise = [](const ManifestEntry& e) {
    return synthetic::noise_image(e.width, e.height, 0, 255, derive_seed(1, e.image_id));
  };
  eval::LbpScorer lbp_scorer;
  eval::BiasOptions opt;
  opt.jobs = 4;
  const auto chance = eval::bias_experiment({DatasetManifest(halves)}, lbp_scorer, opt, noise);
  const double n = static_cast<double>(chance.test_count);
  const double half_width = 1.96 * std::sqrt(0.25 / n);
  c.expect(chance.test_count == 200, "test count " + std::to_string(chance.test_count));
  c.expect(std::abs(chance.accuracy - 0.5) <= half_width,
           "split-in-two accuracy " + format_fixed(chance.accuracy, 4) + " outside 0.5 +- " +
               format_fixed(half_width, 4));
  if (c.ok)
    c.detail = "disjoint intensities 1.0000; split-in-two " + format_fixed(chance.accuracy, 4) + " over " +
               std::to_string(chance.test_count) + " in [" + format_fixed(0.5 - half_width, 4) + ", " +
               format_fixed(0.5 + half_width, 4) + "]";
  return c;
}

std::string value_of(const std::string& report, const std::string& key) {
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line))
    if (line.starts_with(key + "=")) return line.substr(key.size() + 1);
  return {};
}

Check end_to_end() {
  Check c;
  const fs::path recipe = fs::path(EARBENCH_RECIPE_DIR) / "toy.recipe";
  const fs::path original = fs::current_path();
  std::vector<std::string> reports, scores;
  double slowest = 0;
  std::string log_tail;
  for (int run = 0; run < 2 && c.ok; ++run) {
    earbench::testing::TempDir dir("acc_e2e");
    synthetic::write_toy_dataset(dir / "toy");
    fs::current_path(dir.path());
    std::ostringstream out, err;
    const auto t0 = Clock::now();
    const int code = cli::run({"pipeline", "--recipe", recipe.string()}, out, err);
    const double secs = seconds_since(t0);
    slowest = std::max(slowest, secs);
    fs::current_path(original);
    c.expect(code == 0, "pipeline exit " + std::to_string(code) + ": " + err.str());
    if (!c.ok) break;
    reports.push_back(earbench::testing::slurp(dir / "work/report/report.txt"));
    scores.push_back(earbench::testing::slurp(dir / "work/lbp_scores.tsv"));
  }
  if (!c.ok) return c;
  c.expect(reports[0] == reports[1] && scores[0] == scores[1], "two runs produced different outputs");
  const std::string rank1 = value_of(reports[0], "rank1");
  c.expect(!rank1.empty(), "report has no rank1");
  const double r1 = rank1.empty() ? 0.0 : parse_real(rank1);
  c.expect(r1 >= 0.9, "rank-1 " + rank1 + " < 0.9");
  c.expect(slowest < 120.0, "pipeline took " + format_fixed(slowest, 1) + " s");
  if (c.ok)
    c.detail = "10 subjects, split 60/40 -> augment -> extract -> classify -> evaluate: rank-1 " + rank1 +
               " over " + value_of(reports[0], "samples") + " probes, identical reports across runs, " +
               format_fixed(slowest, 1) + " s per run";
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"fusion arithmetic oracle (1e-12, <1 s)", fusion_oracle},
      {"fusion order invariants", fusion_invariants},
      {"max-rule correctness vs enumeration", max_rule},
      {"augmentation count and determinism (<1 min)", augmentation_count},
      {"transform identities and saturation", transform_identities},
      {"LBP suite (<10 s)", lbp_suite},
      {"evaluation suite", evaluation_suite},
      {"bias experiment properties", bias_experiment},
      {"end-to-end toy recipe (rank-1 >= 0.9, <2 min)", end_to_end},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    try {
      c = fn();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    failed += !c.ok;
    std::cout << (c.ok ? "PASS  " : "FAIL  ") << name << " -- " << c.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " acceptance criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
