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

#include "earbench/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>

#include <CLI11.hpp>

#include "earbench/augment.hpp"
#include "earbench/common.hpp"
#include "earbench/dataset.hpp"
#include "earbench/evaluate.hpp"
#include "earbench/fusion.hpp"
#include "earbench/lbp.hpp"
#include "earbench/manifest.hpp"

namespace fs = std::filesystem;

namespace earbench::cli {

const std::vector<std::string>& commands() {
  static const std::vector<std::string> kCommands = {"manifest", "split", "align",    "augment", "extract", "classify",
                                                     "fuse",     "evaluate", "stats", "bias",    "pipeline"};
  return kCommands;
}

namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("EARBENCH_SEED"); env && *env) {
    try {
      const auto v = parse_int(env);
      return static_cast<std::uint64_t>(v);
    } catch (const DataError&) {
      throw UsageError(std::string("EARBENCH_SEED is not an integer: ") + env);
    }
  }
  return kDefaultSeed;
}

struct Common {
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool verbose = false;
};

void add_common(CLI::App* app, Common& c, bool with_seed, bool with_jobs) {
  if (with_seed)
    app->add_option("--seed", c.seed, "Global seed (default: $EARBENCH_SEED or " + std::to_string(kDefaultSeed) + ")");
  if (with_jobs) app->add_option("--jobs", c.jobs, "Worker thread cap")->check(CLI::Range(1u, 256u));
  app->add_flag("-v,--verbose", c.verbose, "Print progress details");
}

void add_lbp_options(CLI::App* app, lbp::LbpConfig& cfg) {
  app->add_option("--radius", cfg.radius, "LBP sampling radius in pixels")->capture_default_str();
  app->add_option("--grid-rows", cfg.grid_rows, "Histogram grid rows")->capture_default_str();
  app->add_option("--grid-cols", cfg.grid_cols, "Histogram grid columns")->capture_default_str();
  app->add_option("--working-size", cfg.working_size, "Square size images are resized to")->capture_default_str();
  app->add_flag("!--no-uniform", cfg.uniform, "Use all 256 codes instead of 59 uniform bins");
}

SplitRatios parse_ratios(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw UsageError("--ratios expects train,val,test");
  try {
    return {parse_real(parts[0]), parse_real(parts[1]), parse_real(parts[2])};
  } catch (const DataError& e) {
    throw UsageError(std::string("--ratios: ") + e.what());
  }
}

std::optional<Split> parse_split_filter(const std::string& text) {
  if (text == "all") return std::nullopt;
  return parse_split(text);
}

std::vector<fusion::ScoreMatrix> read_all_scores(const std::vector<std::string>& files) {
  std::vector<fusion::ScoreMatrix> out;
  for (const auto& f : files) out.push_back(fusion::read_scores(fs::path(f)));
  return out;
}

// ---- subcommands ----------------------------------------------------------

struct ManifestCmd {
  std::string root, dataset, layout = "subject-dirs", labels, sides, out;
  Common common;

  void setup(CLI::App* app) {
    app->add_option("--root", root, "Dataset root directory")->required();
    app->add_option("--dataset", dataset, "Dataset name tag")->required();
    app->add_option("--layout", layout, "subject-dirs or label-file")
        ->check(CLI::IsMember({"subject-dirs", "label-file"}))
        ->capture_default_str();
    app->add_option("--labels", labels, "Label file for label-file layout (default <root>/labels.tsv)");
    app->add_option("--sides", sides, "Side override file (image_id<TAB>side)");
    app->add_option("--out", out, "Output manifest")->required();
    add_common(app, common, false, false);
  }

  int run(std::ostream& o, std::ostream& e) {
    auto result = build_manifest(root, dataset, parse_layout(layout), labels);
    for (const auto& w : result.warnings) e << "warning: " << w << '\n';
    DatasetManifest m = std::move(result.manifest);
    if (!sides.empty()) m = apply_side_overrides(m, read_side_overrides(sides));
    write_manifest(m, fs::path(out));
    o << "manifest: " << m.size() << " images, " << m.subjects().size() << " subjects -> " << out << '\n';
    return kSuccess;
  }
};

struct SplitCmd {
  std::string manifest, ratios = "0.6,0,0.4", out;
  Common common;

  void setup(CLI::App* app) {
    app->add_option("--manifest", manifest, "Input manifest")->required();
    app->add_option("--ratios", ratios, "train,val,test fractions")->capture_default_str();
    app->add_option("--out", out, "Output manifest")->required();
    add_common(app, common, true, false);
  }

  int run(std::ostream& o, std::ostream&) {
    const auto r = parse_ratios(ratios);
    r.validate();
    const auto m = split_manifest(read_manifest(fs::path(manifest)), r, derive_seed(common.seed, "split"));
    write_manifest(m, fs::path(out));
    o << "split: train=" << m.count(Split::train) << " val=" << m.count(Split::val)
      << " test=" << m.count(Split::test) << " -> " << out << '\n';
    return kSuccess;
  }
};

struct AlignCmd {
  std::string manifest, target = "left", out_dir, out, split_filter = "all";
  bool skip_unknown = false;
  Common common;

  void setup(CLI::App* app) {
    app->add_option("--manifest", manifest, "Input manifest")->required();
    app->add_option("--target", target, "Side every image is mirrored to")
        ->check(CLI::IsMember({"left", "right"}))
        ->capture_default_str();
    app->add_option("--out-dir", out_dir, "Directory for mirrored images")->required();
    app->add_option("--out", out, "Output manifest")->required();
    app->add_option("--split", split_filter, "Only align this split: train, val, test or all")
        ->check(CLI::IsMember({"train", "val", "test", "all"}))
        ->capture_default_str();
    app->add_flag("--skip-unknown", skip_unknown, "Leave images with unknown side untouched instead of failing");
    add_common(app, common, false, true);
  }

  int run(std::ostream& o, std::ostream& e) {
    const auto m = read_manifest(fs::path(manifest));
    const Side tgt = parse_side(target);
    const auto only = parse_split_filter(split_filter);
    std::vector<ManifestEntry> entries = m.entries();
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      auto& en = entries[i];
      if (only && en.split != *only) continue;
      if (en.side == Side::unknown) {
        if (!skip_unknown)
          throw DataError("image " + en.image_id + " has unknown side; label it with a side override or use --skip-unknown");
        if (common.verbose) e << "skipping " << en.image_id << " (unknown side)\n";
        continue;
      }
      if (en.side != tgt) todo.push_back(i);
    }
    fs::create_directories(out_dir);
    parallel_for(todo.size(), common.jobs, [&](std::size_t k) {
      auto& en = entries[todo[k]];
      const auto img = align_side(load_image(en.path), en.side, tgt);
      const fs::path file = fs::path(out_dir) / derived_file_name(en.image_id + "#aligned");
      save_png(img, file);
      en.path = file.generic_string();
      en.side = tgt;
    });
    write_manifest(DatasetManifest(std::move(entries)), fs::path(out));
    o << "align: mirrored " << todo.size() << " images to " << target << " -> " << out << '\n';
    return kSuccess;
  }
};

struct AugmentCmd {
  std::string manifest, out_dir, out, config_file, preset = "uerc";
  bool aligned = false;
  Common common;

  void setup(CLI::App* app) {
    app->add_option("--manifest", manifest, "Input manifest (only train images are augmented)")->required();
    app->add_option("--out-dir", out_dir, "Directory for augmented PNG images")->required();
    app->add_option("--out", out, "Output manifest")->required();
    app->add_option("--augment-config", config_file, "key=value augmentation grid file");
    app->add_option("--preset", preset, "Grid used when no config file is given")
        ->check(CLI::IsMember({"uerc", "multipie", "none"}))
        ->capture_default_str();
    app->add_flag("--aligned", aligned, "Data is side-aligned: skip flipped copies");
    add_common(app, common, true, true);
  }

  int run(std::ostream& o, std::ostream&) {
    const AugmentConfig cfg = config_file.empty() ? augment_preset(preset) : read_augment_config(config_file);
    const auto m = read_manifest(fs::path(manifest));
    const auto plan = plan_augmentations(cfg, aligned);
    AugmentOptions opt;
    opt.aligned_mode = aligned;
    opt.seed = derive_seed(common.seed, "augment");
    opt.jobs = common.jobs;
    const auto result = augment_dataset(m, cfg, out_dir, opt);
    write_manifest(result, fs::path(out));
    const std::size_t train = m.count(Split::train);
    const std::size_t raw = train * (plan.size() + 1);
    o << "augment: plan=" << plan.size() << " transforms, train images=" << train
      << ", training set=" << raw << " images (" << raw * 5 << " with five-crop expansion) -> " << out << '\n';
    return kSuccess;
  }
};

struct ExtractCmd {
  std::string manifest, split_filter = "all", out;
  lbp::LbpConfig cfg;
  Common common;

  void setup(CLI::App* app) {
    app->add_option("--manifest", manifest, "Input manifest")->required();
    app->add_option("--split", split_filter, "train, val, test or all")
        ->check(CLI::IsMember({"train", "val", "test", "all"}))
        ->capture_default_str();
    app->add_option("--out", out, "Output LBPF feature cache")->required();
    add_lbp_options(app, cfg);
    add_common(app, common, false, true);
  }

  int run(std::ostream& o, std::ostream&) {
    cfg.validate();
    const auto m = read_manifest(fs::path(manifest));
    const auto only = parse_split_filter(split_filter);
    std::vector<const ManifestEntry*> todo;
    for (const auto& e : m.entries())
      if (!only || e.split == *only) todo.push_back(&e);
    std::vector<lbp::FeatureRecord> records(todo.size());
    parallel_for(todo.size(), common.jobs, [&](std::size_t i) {
      records[i] = {todo[i]->image_id, lbp::extract_features(load_image(todo[i]->path), cfg)};
    });
    lbp::write_feature_cache(records, out);
    o << "extract: " << records.size() << " feature vectors of length " << cfg.feature_length() << " -> " << out << '\n';
    return kSuccess;
  }
};

struct ClassifyCmd {
  std::string manifest, gallery, probes, out, model = "lbp", truth_out;
  std::optional<double> temperature;
  Common common;

  void setup(CLI::App* app) {
    app->add_option("--manifest", manifest, "Manifest providing subject labels")->required();
    app->add_option("--gallery", gallery, "Gallery feature cache")->required();
    app->add_option("--probes", probes, "Probe feature cache")->required();
    app->add_option("--out", out, "Output score matrix")->required();
    app->add_option("--model-name", model, "Model name written to the score file")->capture_default_str();
    app->add_option("--temperature", temperature, "Softmax temperature (default: median gallery distance)")
        ->check(CLI::PositiveNumber);
    app->add_option("--truth-out", truth_out, "Also write probe ground truth (sample_id<TAB>subject)");
    add_common(app, common, false, true);
  }

  int run(std::ostream& o, std::ostream&) {
    const auto m = read_manifest(fs::path(manifest));
    auto subject_of = [&](const std::string& id) {
      const auto* e = m.find(id);
      if (!e) throw DataError("feature record " + id + " is not in the manifest");
      return e->subject;
    };
    std::vector<lbp::LabeledFeature> items;
    for (auto& r : lbp::read_feature_cache(gallery)) items.push_back({subject_of(r.image_id), std::move(r.features)});
    const lbp::Gallery g(std::move(items));
    const auto probe_records = lbp::read_feature_cache(probes);
    std::vector<std::vector<double>> rows(probe_records.size());
    parallel_for(probe_records.size(), common.jobs,
                 [&](std::size_t i) { rows[i] = g.classify(probe_records[i].features, temperature); });
    std::vector<std::string> ids;
    for (const auto& r : probe_records) ids.push_back(r.image_id);
    const fusion::ScoreMatrix scores(model, g.labels(), ids, std::move(rows));
    fusion::write_scores(scores, fs::path(out));
    if (!truth_out.empty()) {
      std::map<std::string, std::string> truth;
      for (const auto& id : ids) truth[id] = subject_of(id);
      write_truth(truth, truth_out);
    }
    o << "classify: " << ids.size() << " probes x " << g.labels().size() << " classes (temperature "
      << format_real(temperature.value_or(g.default_temperature())) << ") -> " << out << '\n';
    return kSuccess;
  }
};

struct FuseCmd {
  std::string method;
  std::vector<std::string> scores;
  std::string truth, out;
  Common common;

  void setup(CLI::App* app) {
    app->add_option("--method", method, "Confidence method")
        ->required()
        ->check(CLI::IsMember({"basic", "d2s", "d2sr", "avg-diff", "diff1"}));
    app->add_option("--scores", scores, "Two or more score matrix files")->required();
    app->add_option("--truth", truth, "Ground truth file (sample_id<TAB>class)");
    app->add_option("--out", out, "Write per-sample decisions here");
    add_common(app, common, false, false);
  }

  int run(std::ostream& o, std::ostream&) {
    if (scores.size() < 2) throw UsageError("fuse needs at least two --scores files");
    const auto matrices = read_all_scores(scores);
    const auto m = fusion::parse_method(method);
    const auto decisions = fusion::fuse_max(matrices, m);
    if (!out.empty()) fusion::write_decisions(decisions, out);
    std::map<std::string, std::size_t> chosen;
    for (const auto& d : decisions) ++chosen[d.chosen_model];
    o << "fuse: method=" << fusion::to_string(m) << " samples=" << decisions.size() << '\n';
    for (const auto& [name, n] : chosen) o << "chosen." << name << "=" << n << '\n';
    if (!truth.empty()) {
      const auto t = read_truth(truth);
      for (const auto& mat : matrices)
        o << "rank1." << mat.model_name() << "=" << format_fixed(eval::rank_accuracy(mat, t, 1).rank1(), 6) << '\n';
      o << "fused_accuracy=" << format_fixed(fusion::fused_accuracy(decisions, t), 6) << '\n';
    }
    return kSuccess;
  }
};

struct BinOptions {
  std::string aspect, intensity, resolution;

  void setup(CLI::App* app) {
    app->add_option("--aspect-bins", aspect, "Aspect-ratio bin edges, e.g. 0,1,2,+ (trailing + = open-ended)");
    app->add_option("--intensity-bins", intensity, "Mean-intensity bin edges");
    app->add_option("--resolution-bins", resolution, "Resolution (pixel count) bin edges");
  }

  eval::BinSpec bins(eval::QualityKey key) const {
    const std::string& text = key == eval::QualityKey::aspect_ratio     ? aspect
                              : key == eval::QualityKey::mean_intensity ? intensity
                                                                        : resolution;
    return text.empty() ? eval::default_bins(key) : eval::parse_bins(text);
  }
};

std::vector<eval::QualityKey> parse_keys(const std::string& text) {
  std::vector<eval::QualityKey> keys;
  for (const auto& k : split(text, ','))
    if (!trim(k).empty()) keys.push_back(eval::parse_quality_key(trim(k)));
  return keys;
}

struct EvaluateCmd {
  std::string scores, truth, manifest, keys = "aspect_ratio,mean_intensity", report_dir;
  std::size_t max_rank = 0;
  BinOptions bins;
  Common common;

  void setup(CLI::App* app) {
    app->add_option("--scores", scores, "Score matrix file")->required();
    app->add_option("--truth", truth, "Ground truth file (default: subjects from --manifest)");
    app->add_option("--manifest", manifest, "Manifest for quality stratification");
    app->add_option("--max-rank", max_rank, "Highest CMC rank (default: all classes)");
    app->add_option("--stratify", keys, "Quality keys to stratify by when --manifest is given")->capture_default_str();
    bins.setup(app);
    app->add_option("--report-dir", report_dir, "Write report.txt and CSV files here");
    add_common(app, common, false, false);
  }

  int run(std::ostream& o, std::ostream&) {
    if (truth.empty() && manifest.empty()) throw UsageError("evaluate needs --truth or --manifest");
    const auto s = fusion::read_scores(fs::path(scores));
    std::optional<DatasetManifest> m;
    if (!manifest.empty()) m = read_manifest(fs::path(manifest));
    const auto t = truth.empty() ? truth_from_manifest(*m) : read_truth(truth);
    eval::EvaluationReport report;
    report.cmc = eval::rank_accuracy(s, t, max_rank == 0 ? s.classes() : max_rank);
    if (m) {
      const auto correct = eval::rank1_correct(s, t);
      for (auto key : parse_keys(keys))
        report.strata[std::string(eval::to_string(key))] = eval::stratify(*m, correct, key, bins.bins(key));
    }
    if (!report_dir.empty()) eval::write_report(report, report_dir);
    o << "evaluate: samples=" << report.cmc->samples << " rank1=" << format_fixed(report.cmc->rank1(), 6);
    if (report.cmc->cmc.size() >= 5) o << " rank5=" << format_fixed(report.cmc->cmc[4], 6);
    o << '\n';
    return kSuccess;
  }
};

struct StatsCmd {
  std::string manifest, keys = "resolution,aspect_ratio", report_dir;
  BinOptions bins;
  Common common;

  void setup(CLI::App* app) {
    app->add_option("--manifest", manifest, "Input manifest")->required();
    app->add_option("--keys", keys, "Distributions to compute")->capture_default_str();
    bins.setup(app);
    app->add_option("--report-dir", report_dir, "Write report.txt and histogram CSV files here");
    add_common(app, common, false, false);
  }

  int run(std::ostream& o, std::ostream&) {
    const auto m = read_manifest(fs::path(manifest));
    eval::EvaluationReport report;
    for (auto key : parse_keys(keys)) report.histograms.push_back(eval::distribution_histogram(m, key, bins.bins(key)));
    if (!report_dir.empty()) eval::write_report(report, report_dir);
    for (const auto& h : report.histograms)
      for (std::size_t b = 0; b < h.counts.size(); ++b) o << h.name << ' ' << h.bin_labels[b] << ' ' << h.counts[b] << '\n';
    return kSuccess;
  }
};

struct BiasCmd {
  std::vector<std::string> manifests;
  double train_fraction = 0.5;
  std::string scorer = "lbp", report_dir;
  lbp::LbpConfig cfg;
  Common common;

  void setup(CLI::App* app) {
    app->add_option("--manifest", manifests, "One or more manifests covering at least two datasets")->required();
    app->add_option("--train-fraction", train_fraction, "Per-dataset training fraction")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app->add_option("--scorer", scorer, "lbp, or histogram for global intensity")
        ->check(CLI::IsMember({"lbp", "histogram"}))
        ->capture_default_str();
    app->add_option("--report-dir", report_dir, "Write report.txt and bias_confusion.csv here");
    add_lbp_options(app, cfg);
    add_common(app, common, true, true);
  }

  int run(std::ostream& o, std::ostream&) {
    std::vector<DatasetManifest> ms;
    for (const auto& f : manifests) ms.push_back(read_manifest(fs::path(f)));
    cfg.validate();
    const auto s = eval::make_scorer(scorer, cfg);
    eval::BiasOptions opt;
    opt.train_fraction = train_fraction;
    opt.seed = common.seed;
    opt.jobs = common.jobs;
    eval::EvaluationReport report;
    report.bias = eval::bias_experiment(ms, *s, opt);
    if (!report_dir.empty()) eval::write_report(report, report_dir);
    const auto& b = *report.bias;
    o << "bias: datasets=" << b.datasets.size() << " train=" << b.train_count << " test=" << b.test_count
      << " accuracy=" << format_fixed(b.accuracy, 6) << '\n';
    for (std::size_t i = 0; i < b.datasets.size(); ++i) {
      o << b.datasets[i];
      for (auto c : b.confusion[i]) o << '\t' << c;
      o << '\n';
    }
    return kSuccess;
  }
};

struct PipelineCmd {
  std::string recipe;
  Common common;

  void setup(CLI::App* app) {
    app->add_option("--recipe", recipe, "Recipe file: one subcommand per line, '#' comments")->required();
    add_common(app, common, false, false);
  }
};

struct Commands {
  ManifestCmd manifest;
  SplitCmd split;
  AlignCmd align;
  AugmentCmd augment;
  ExtractCmd extract;
  ClassifyCmd classify;
  FuseCmd fuse;
  EvaluateCmd evaluate;
  StatsCmd stats;
  BiasCmd bias;
  PipelineCmd pipeline;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    CLI::App app{"earbench: ear recognition experiment toolkit", "earbench"};
    app.require_subcommand(1, 1);
    app.failure_message(CLI::FailureMessage::help);
    app.fallthrough(false);

    auto cmds = std::make_unique<Commands>();
    const std::uint64_t seed = default_seed();
    for (Common* c : {&cmds->manifest.common, &cmds->split.common, &cmds->align.common, &cmds->augment.common,
                      &cmds->extract.common, &cmds->classify.common, &cmds->fuse.common, &cmds->evaluate.common,
                      &cmds->stats.common, &cmds->bias.common, &cmds->pipeline.common})
      c->seed = seed;

    auto* manifest = app.add_subcommand("manifest", "Build a manifest from a dataset directory");
    auto* split_app = app.add_subcommand("split", "Assign train/val/test splits stratified by subject");
    auto* align = app.add_subcommand("align", "Mirror images so every ear faces the target side");
    auto* augment = app.add_subcommand("augment", "Expand the training split with the augmentation grid");
    auto* extract = app.add_subcommand("extract", "Compute LBP features into a feature cache");
    auto* classify = app.add_subcommand("classify", "Score probes against a gallery with chi-square 1-NN");
    auto* fuse = app.add_subcommand("fuse", "Max-rule fusion of two or more score matrices");
    auto* evaluate = app.add_subcommand("evaluate", "Rank-1/CMC accuracy and quality-stratified errors");
    auto* stats = app.add_subcommand("stats", "Resolution, aspect-ratio and intensity distributions");
    auto* bias = app.add_subcommand("bias", "Dataset identification (dataset bias) experiment");
    auto* pipeline = app.add_subcommand("pipeline", "Run a recipe of subcommands, stopping at the first failure");
    cmds->manifest.setup(manifest);
    cmds->split.setup(split_app);
    cmds->align.setup(align);
    cmds->augment.setup(augment);
    cmds->extract.setup(extract);
    cmds->classify.setup(classify);
    cmds->fuse.setup(fuse);
    cmds->evaluate.setup(evaluate);
    cmds->stats.setup(stats);
    cmds->bias.setup(bias);
    cmds->pipeline.setup(pipeline);

    if (!args.empty() && !args.front().starts_with("-") &&
        std::find(commands().begin(), commands().end(), args.front()) == commands().end()) {
      err << "error: unknown command '" << args.front() << "'\n" << app.help();
      return kUsageError;
    }

    std::vector<std::string> argv_storage = {"earbench"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) argv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kSuccess : kUsageError;
    }

    if (manifest->parsed()) return cmds->manifest.run(out, err);
    if (split_app->parsed()) return cmds->split.run(out, err);
    if (align->parsed()) return cmds->align.run(out, err);
    if (augment->parsed()) return cmds->augment.run(out, err);
    if (extract->parsed()) return cmds->extract.run(out, err);
    if (classify->parsed()) return cmds->classify.run(out, err);
    if (fuse->parsed()) return cmds->fuse.run(out, err);
    if (evaluate->parsed()) return cmds->evaluate.run(out, err);
    if (stats->parsed()) return cmds->stats.run(out, err);
    if (bias->parsed()) return cmds->bias.run(out, err);
    if (pipeline->parsed()) return run_pipeline(cmds->pipeline.recipe, out, err);
    err << app.help();
    return kUsageError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool in_token = false, quoted = false;
  for (char c : line) {
    if (quoted) {
      if (c == '"') quoted = false;
      else cur += c;
    } else if (c == '"') {
      quoted = true;
      in_token = true;
    } else if (c == ' ' || c == '\t' || c == '\r') {
      if (in_token) out.push_back(std::move(cur));
      cur.clear();
      in_token = false;
    } else {
      cur += c;
      in_token = true;
    }
  }
  if (quoted) throw UsageError("unterminated quote");
  if (in_token) out.push_back(std::move(cur));
  return out;
}

int run_pipeline(const fs::path& recipe, std::ostream& out, std::ostream& err) {
  std::ifstream in(recipe);
  if (!in) {
    err << "error: cannot open recipe " << recipe.string() << '\n';
    return kDataError;
  }
  struct Stage {
    std::size_t line;
    std::vector<std::string> args;
  };
  std::vector<Stage> stages;
  std::string line;
  std::size_t lineno = 0;
  const auto& known = commands();
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::vector<std::string> args;
    try {
      args = tokenize(std::string(t));
    } catch (const UsageError& e) {
      err << recipe.string() << ":" << lineno << ": malformed recipe line: " << e.what() << '\n';
      return kUsageError;
    }
    if (args.empty() || args.front() == "pipeline" ||
        std::find(known.begin(), known.end(), args.front()) == known.end()) {
      err << recipe.string() << ":" << lineno << ": malformed recipe line: unknown subcommand '"
          << (args.empty() ? "" : args.front()) << "'\n";
      return kUsageError;
    }
    stages.push_back({lineno, std::move(args)});
  }

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto& s = stages[i];
    out << "[stage " << i + 1 << "/" << stages.size() << "] line " << s.line << ": " << s.args.front() << '\n';
    const auto t0 = clock::now();
    const int code = run(s.args, out, err);
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    if (code != kSuccess) {
      out << "[stage " << i + 1 << "/" << stages.size() << "] failed with exit code " << code << " after "
          << format_fixed(secs, 3) << " s; remaining stages skipped\n";
      return code;
    }
    out << "[stage " << i + 1 << "/" << stages.size() << "] ok in " << format_fixed(secs, 3) << " s\n";
  }
  out << "pipeline: " << stages.size() << " stages completed in "
      << format_fixed(std::chrono::duration<double>(clock::now() - start).count(), 3) << " s\n";
  return kSuccess;
}

}  // namespace earbench::cli
