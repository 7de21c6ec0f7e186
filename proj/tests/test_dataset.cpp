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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "earbench/common.hpp"
#include "earbench/dataset.hpp"
#include "earbench/image.hpp"
#include "earbench/manifest.hpp"
#include "test_support.hpp"

using namespace earbench;
using earbench::testing::TempDir;
namespace fs = std::filesystem;

namespace {

ManifestEntry entry(std::string id, std::string subject, int w = 10, int h = 20) {
  ManifestEntry e;
  e.image_id = id;
  e.path = "/nonexistent/" + id;
  e.subject = std::move(subject);
  e.dataset_name = "d";
  e.width = w;
  e.height = h;
  return e;
}

DatasetManifest many(const std::vector<std::pair<std::string, int>>& per_subject) {
  std::vector<ManifestEntry> v;
  for (const auto& [s, n] : per_subject)
    for (int i = 0; i < n; ++i) v.push_back(entry(s + "/" + std::to_string(i), s));
  return DatasetManifest(std::move(v));
}

void write_tiny(const fs::path& p, int w = 4, int h = 6) {
  fs::create_directories(p.parent_path());
  save_png(EarImage(w, h, 1, 100), p);
}

}  // namespace

TEST_CASE("manifest from 2 subjects x 3 images") {
  TempDir dir("ds");
  for (auto s : {"alice", "bob"})
    for (int i = 0; i < 3; ++i) write_tiny(dir / (std::string(s) + "/" + std::to_string(i) + ".png"));
  const auto r = build_manifest(dir.path(), "toy", Layout::subject_dirs);
  CHECK(r.manifest.size() == 6);
  CHECK(r.manifest.subjects() == std::vector<std::string>{"alice", "bob"});
  CHECK(r.warnings.empty());
  const auto* e = r.manifest.find("toy/alice/0.png");
  REQUIRE(e != nullptr);
  CHECK(e->width == 4);
  CHECK(e->height == 6);
  CHECK(e->aspect_ratio() == doctest::Approx(1.5));
  CHECK(e->split == Split::unassigned);
}

TEST_CASE("empty directory reports no images found") {
  TempDir dir("empty");
  CHECK_THROWS_WITH_AS(build_manifest(dir.path(), "x", Layout::subject_dirs), doctest::Contains("no images found"),
                       DataError);
  CHECK_THROWS_AS(build_manifest(dir / "missing", "x", Layout::subject_dirs), DataError);
}

TEST_CASE("undecodable images are skipped with a warning") {
  TempDir dir("bad");
  write_tiny(dir / "s1/good.png");
  earbench::testing::write_text(dir / "s1/bad.png", "garbage");
  const auto r = build_manifest(dir.path(), "x", Layout::subject_dirs);
  CHECK(r.manifest.size() == 1);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("bad.png") != std::string::npos);
}

TEST_CASE("label-file layout and side inference") {
  TempDir dir("lf");
  write_tiny(dir / "img/a_L.png");
  write_tiny(dir / "img/b_r.png");
  write_tiny(dir / "img/c.png");
  earbench::testing::write_text(dir / "labels.tsv", "# path\tsubject\nimg/a_L.png\tp1\nimg/b_r.png\tp1\nimg/c.png\tp2\n");
  const auto r = build_manifest(dir.path(), "lf", Layout::label_file);
  REQUIRE(r.manifest.size() == 3);
  CHECK(r.manifest.find("lf/img/a_L.png")->side == Side::left);
  CHECK(r.manifest.find("lf/img/b_r.png")->side == Side::right);
  CHECK(r.manifest.find("lf/img/c.png")->side == Side::unknown);
  CHECK(r.manifest.find("lf/img/c.png")->subject == "p2");
  CHECK(infer_side("x/ear_l.jpg") == Side::left);
  CHECK(infer_side("x/earl.jpg") == Side::unknown);
}

TEST_CASE("UERC-sized training layout: 2304 images of 166 subjects") {
  TempDir dir("uerc");
  // 146 subjects with 14 images and 20 with 13.
  int total = 0;
  for (int s = 0; s < 166; ++s) {
    const int n = s < 146 ? 14 : 13;
    for (int i = 0; i < n; ++i, ++total) {
      char name[64];
      std::snprintf(name, sizeof name, "%04d/%02d.png", s, i);
      write_tiny(dir / name, 2 + i % 3, 3);
    }
  }
  REQUIRE(total == 2304);
  const auto m = build_manifest(dir.path(), "uerc", Layout::subject_dirs).manifest;
  CHECK(m.size() == 2304);
  CHECK(m.subjects().size() == 166);

  const auto split = split_manifest(m, {0.6, 0.0, 0.4}, 11);
  const std::size_t train = split.count(Split::train), test = split.count(Split::test);
  CHECK(train + test == 2304);
  CHECK(split.count(Split::val) == 0);
  // Per-subject rounding moves at most one image per subject.
  CHECK(std::abs(static_cast<double>(train) - 0.6 * 2304) <= 166.0);
}

TEST_CASE("split_counts examples") {
  using A = std::array<std::size_t, 3>;
  CHECK(split_counts(10, {0.8, 0.1, 0.1}) == A{8, 1, 1});
  CHECK(split_counts(10, {0.6, 0.0, 0.4}) == A{6, 0, 4});
  // Remainders go to the largest fractional part; ties favor train, then test.
  CHECK(split_counts(1, {0.5, 0.0, 0.5}) == A{1, 0, 0});
  CHECK(split_counts(2, {0.34, 0.33, 0.33}) == A{1, 0, 1});
  CHECK(split_counts(3, {0.34, 0.33, 0.33}) == A{1, 1, 1});
  CHECK(split_counts(0, {0.6, 0.0, 0.4}) == A{0, 0, 0});
}

TEST_CASE("split_counts properties") {
  Rng rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    double a = rng.uniform(), b = rng.uniform() * (1.0 - a);
    if (trial % 5 == 0) b = 0.0;
    const SplitRatios r{a, b, 1.0 - a - b};
    const std::size_t n = rng.below(40);
    const auto c = split_counts(n, r);
    REQUIRE(c[0] + c[1] + c[2] == n);
    const double f[3] = {r.train, r.val, r.test};
    for (int k = 0; k < 3; ++k) {
      CHECK(std::abs(static_cast<double>(c[k]) - n * f[k]) < 1.0 + 1e-9);
      if (f[k] == 0.0) CHECK(c[k] == 0);
    }
  }
}

TEST_CASE("split ratios are validated") {
  CHECK_THROWS_AS(SplitRatios({0.5, 0.5, 0.5}).validate(), UsageError);
  CHECK_THROWS_AS(SplitRatios({1.2, -0.2, 0.0}).validate(), UsageError);
  CHECK_NOTHROW(SplitRatios({0.8, 0.1, 0.1}).validate());
  CHECK_THROWS_AS(split_manifest(many({{"a", 3}}), {0.5, 0.4, 0.0}, 1), UsageError);
}

TEST_CASE("10 images of one subject split 8/1/1 for any seed") {
  const auto m = many({{"s", 10}});
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL, 123456789ULL}) {
    const auto s = split_manifest(m, {0.8, 0.1, 0.1}, seed);
    CHECK(s.count(Split::train) == 8);
    CHECK(s.count(Split::val) == 1);
    CHECK(s.count(Split::test) == 1);
  }
}

TEST_CASE("split is deterministic, stratified and preserves ids") {
  const auto m = many({{"a", 7}, {"b", 1}, {"c", 12}, {"d", 3}});
  const SplitRatios r{0.6, 0.2, 0.2};
  const auto s1 = split_manifest(m, r, 77), s2 = split_manifest(m, r, 77);
  CHECK(s1 == s2);
  const auto s3 = split_manifest(m, r, 78);
  bool differs = false;
  for (std::size_t i = 0; i < s1.size(); ++i) differs |= s1.entries()[i].split != s3.entries()[i].split;
  CHECK(differs);

  std::multiset<std::string> ids_in, ids_out;
  for (const auto& e : m.entries()) ids_in.insert(e.image_id);
  for (const auto& e : s1.entries()) ids_out.insert(e.image_id);
  CHECK(ids_in == ids_out);

  std::map<std::string, std::array<std::size_t, 3>> per;
  for (const auto& e : s1.entries()) {
    REQUIRE(e.split != Split::unassigned);
    ++per[e.subject][static_cast<int>(e.split)];
  }
  for (const auto& [subject, c] : per) {
    const std::size_t n = c[0] + c[1] + c[2];
    CHECK(c == split_counts(n, r));
  }
}

TEST_CASE("align_side mirrors only mismatched sides") {
  EarImage img(3, 2, 1);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 3; ++x) img.at(x, y) = static_cast<std::uint8_t>(10 * y + x);
  CHECK(align_side(img, Side::left, Side::left) == img);
  const auto m = align_side(img, Side::right, Side::left);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 3; ++x) CHECK(m.at(x, y) == img.at(2 - x, y));
  CHECK(align_side(m, Side::left, Side::right) == img);
  CHECK_THROWS_AS(align_side(img, Side::unknown, Side::left), DataError);
}

TEST_CASE("preprocess crop geometry") {
  EarImage img(100, 150, 3);
  for (int y = 0; y < 150; ++y)
    for (int x = 0; x < 100; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<std::uint8_t>((x + 2 * y + c) % 256);

  const auto test = preprocess(img, PreprocessMode::test, 224);
  REQUIRE(test.size() == 1);
  CHECK(test[0].width() == 224);
  CHECK(test[0].height() == 224);
  const auto resized = resize_bilinear(img, 256, 256);
  // Center crop: offset (256 - 224) / 2 = 16 on both axes.
  CHECK(test[0] == crop(resized, 16, 16, 224, 224));

  const auto train = preprocess(img, PreprocessMode::train, 227);
  REQUIRE(train.size() == 5);
  for (const auto& c : train) {
    CHECK(c.width() == 227);
    CHECK(c.height() == 227);
  }
  CHECK(train[0] == crop(resized, 0, 0, 227, 227));
  CHECK(train[3] == crop(resized, 29, 29, 227, 227));

  const auto full = preprocess(img, PreprocessMode::test, 256);
  REQUIRE(full.size() == 1);
  CHECK(full[0] == resized);
  CHECK_THROWS_AS(preprocess(img, PreprocessMode::test, 257), UsageError);
}

TEST_CASE("manifest file round trip") {
  std::vector<ManifestEntry> v = {entry("x/1", "s1"), entry("x/2", "s2", 33, 44)};
  v[0].side = Side::left;
  v[1].split = Split::test;
  const DatasetManifest m(v);
  std::stringstream ss;
  write_manifest(m, ss);
  CHECK(ss.str().starts_with("#manifest v1"));
  CHECK(read_manifest(ss) == m);
}

TEST_CASE("manifest validation") {
  CHECK_THROWS_AS(DatasetManifest({entry("a", "s"), entry("a", "t")}), DataError);
  CHECK_THROWS_AS(DatasetManifest({entry("a", "s", 0, 5)}), DataError);
  std::stringstream bad("#manifest v1\nid\tp\ts\td\tleft\ttrain\t10\n");
  CHECK_THROWS_WITH_AS(read_manifest(bad, "m.tsv"), doctest::Contains("m.tsv:2"), DataError);
  std::stringstream noheader("id\tp\ts\td\tleft\ttrain\t10\t10\n");
  CHECK_THROWS_AS(read_manifest(noheader), DataError);
  std::stringstream badside("#manifest v1\nid\tp\ts\td\tup\ttrain\t10\t10\n");
  CHECK_THROWS_AS(read_manifest(badside), DataError);
}

TEST_CASE("side override file") {
  TempDir dir("sides");
  earbench::testing::write_text(dir / "sides.tsv", "x/1\tright\n# comment\n");
  const DatasetManifest m({entry("x/1", "s"), entry("x/2", "s")});
  const auto o = apply_side_overrides(m, read_side_overrides(dir / "sides.tsv"));
  CHECK(o.find("x/1")->side == Side::right);
  CHECK(o.find("x/2")->side == Side::unknown);
  earbench::testing::write_text(dir / "bad.tsv", "x/9\tleft\n");
  CHECK_THROWS_AS(apply_side_overrides(m, read_side_overrides(dir / "bad.tsv")), DataError);
}

TEST_CASE("truth files") {
  TempDir dir("truth");
  const std::map<std::string, std::string> t = {{"a", "s1"}, {"b", "s2"}};
  write_truth(t, dir / "t.tsv");
  CHECK(read_truth(dir / "t.tsv") == t);
  CHECK_THROWS_AS(read_truth(dir / "missing.tsv"), DataError);
  auto m = many({{"p", 2}, {"q", 1}});
  CHECK(truth_from_manifest(m).size() == 3);
  CHECK(truth_from_manifest(m).at("q/0") == "q");
}
