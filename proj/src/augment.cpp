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

#include "earbench/augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>

#include "earbench/dataset.hpp"

namespace fs = std::filesystem;

namespace earbench {

namespace {

constexpr std::array<std::pair<Family, std::string_view>, 12> kFamilyNames = {{
    {Family::crop, "crop"},
    {Family::flip, "flip"},
    {Family::brightness_add, "brightness_add"},
    {Family::brightness_mul, "brightness_mul"},
    {Family::blur, "blur"},
    {Family::sharpen, "sharpen"},
    {Family::dropout, "dropout"},
    {Family::contrast, "contrast"},
    {Family::scale, "scale"},
    {Family::translate, "translate"},
    {Family::rotate, "rotate"},
    {Family::shear, "shear"},
}};

// Integer-stepped so every value is the double nearest its decimal spelling.
std::vector<double> stepped(int first, int last, int step, double divisor) {
  std::vector<double> out;
  for (int k = first; k <= last; k += step) out.push_back(k / divisor);
  return out;
}

// Parameters are short decimals, so a result within 1e-9 of a half is treated
// as an exact tie and rounded away from zero.
std::uint8_t saturate(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v + std::copysign(1e-9, v)), 0L, 255L));
}

template <typename F>
EarImage map_pixels(const EarImage& image, F f) {
  EarImage out = image;
  for (auto& p : out.pixels()) p = saturate(f(static_cast<double>(p)));
  return out;
}

// Inverse affine map: destination (x, y) samples the source at
// (a*x + b*y + c, d*x + e*y + f).
struct InverseAffine {
  double a, b, c, d, e, f;
};

EarImage warp(const EarImage& image, const InverseAffine& m) {
  const int w = image.width(), h = image.height(), ch = image.channels();
  EarImage out(w, h, ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Clamping the sample point replicates the border.
      const double sx = std::clamp(m.a * x + m.b * y + m.c, 0.0, static_cast<double>(w - 1));
      const double sy = std::clamp(m.d * x + m.e * y + m.f, 0.0, static_cast<double>(h - 1));
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const int x1 = std::min(x0 + 1, w - 1);
      const int y1 = std::min(y0 + 1, h - 1);
      const double fx = sx - x0, fy = sy - y0;
      for (int c = 0; c < ch; ++c) {
        const double top = image.at(x0, y0, c) * (1.0 - fx) + image.at(x1, y0, c) * fx;
        const double bot = image.at(x0, y1, c) * (1.0 - fx) + image.at(x1, y1, c) * fx;
        out.at(x, y, c) = saturate(top * (1.0 - fy) + bot * fy);
      }
    }
  }
  return out;
}

double radians(double degrees) { return degrees * std::numbers::pi / 180.0; }

EarImage rotate(const EarImage& image, double degrees) {
  const double cx = (image.width() - 1) / 2.0, cy = (image.height() - 1) / 2.0;
  const double cs = std::cos(radians(degrees)), sn = std::sin(radians(degrees));
  // Inverse of a rotation by +degrees (clockwise on screen, y pointing down).
  return warp(image, {cs, sn, cx - cs * cx - sn * cy, -sn, cs, cy + sn * cx - cs * cy});
}

EarImage shear(const EarImage& image, double degrees) {
  const double cy = (image.height() - 1) / 2.0;
  const double t = std::tan(radians(degrees));
  return warp(image, {1.0, -t, t * cy, 0.0, 1.0, 0.0});
}

EarImage scale(const EarImage& image, double factor) {
  const double cx = (image.width() - 1) / 2.0, cy = (image.height() - 1) / 2.0;
  const double inv = 1.0 / factor;
  return warp(image, {inv, 0.0, cx - inv * cx, 0.0, inv, cy - inv * cy});
}

EarImage translate(const EarImage& image, double fraction) {
  return warp(image, {1.0, 0.0, -fraction * image.width(), 0.0, 1.0, -fraction * image.height()});
}

// Separable convolution with replicated borders; the intermediate stays in double.
EarImage convolve_separable(const EarImage& image, const std::vector<double>& kernel) {
  const int w = image.width(), h = image.height(), ch = image.channels();
  const int r = static_cast<int>(kernel.size() / 2);
  std::vector<double> tmp(static_cast<std::size_t>(w) * h * ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -r; k <= r; ++k) acc += kernel[k + r] * image.at(std::clamp(x + k, 0, w - 1), y, c);
        tmp[(static_cast<std::size_t>(y) * w + x) * ch + c] = acc;
      }
  EarImage out(w, h, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -r; k <= r; ++k)
          acc += kernel[k + r] * tmp[(static_cast<std::size_t>(std::clamp(y + k, 0, h - 1)) * w + x) * ch + c];
        out.at(x, y, c) = saturate(acc);
      }
  return out;
}

EarImage gaussian_blur(const EarImage& image, double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * r + 1);
  double sum = 0.0;
  for (int k = -r; k <= r; ++k) sum += kernel[k + r] = std::exp(-(k * k) / (2.0 * sigma * sigma));
  for (auto& v : kernel) v /= sum;
  return convolve_separable(image, kernel);
}

constexpr double kSharpenAlpha = 0.5;

// (1 - alpha) * identity + alpha * [[-1 -1 -1] [-1 8+L -1] [-1 -1 -1]].
EarImage sharpen(const EarImage& image, double lightness, double alpha) {
  const int w = image.width(), h = image.height(), ch = image.channels();
  EarImage out(w, h, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double ring = 0.0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx)
            if (dx != 0 || dy != 0)
              ring += image.at(std::clamp(x + dx, 0, w - 1), std::clamp(y + dy, 0, h - 1), c);
        // 8v - ring is an exact integer, so flat regions avoid cancellation error.
        const double v = image.at(x, y, c);
        out.at(x, y, c) = saturate((1.0 - alpha) * v + alpha * (lightness * v + (8.0 * v - ring)));
      }
  return out;
}

// Each pixel (all channels together) is zeroed with probability rate. The
// draw for pixel i depends only on (seed, i).
EarImage dropout(const EarImage& image, double rate, std::uint64_t seed) {
  EarImage out = image;
  const std::size_t n = static_cast<std::size_t>(image.width()) * image.height();
  const int ch = image.channels();
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(splitmix64(seed ^ splitmix64(i)) >> 11) * 0x1.0p-53;
    if (u < rate)
      for (int c = 0; c < ch; ++c) out.pixels()[i * ch + c] = 0;
  }
  return out;
}

EarImage random_crop(const EarImage& image, int size, std::uint64_t seed) {
  if (size < 1 || size > kResizeEdge) throw UsageError("crop size must be in [1, 256]");
  const EarImage resized = resize_bilinear(image, kResizeEdge, kResizeEdge);
  Rng rng(seed);
  const auto span = static_cast<std::uint64_t>(kResizeEdge - size + 1);
  const int x = static_cast<int>(rng.below(span));
  const int y = static_cast<int>(rng.below(span));
  return crop(resized, x, y, size, size);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

}  // namespace

std::string_view to_string(Family family) {
  for (const auto& [f, name] : kFamilyNames)
    if (f == family) return name;
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (const auto& [f, n] : kFamilyNames)
    if (n == name) return f;
  throw UsageError("unsupported transform family '" + std::string(name) + "'");
}

AugmentConfig AugmentConfig::uerc() {
  AugmentConfig c;
  c.brightness_add_values = stepped(-55, 55, 10, 1.0);
  c.brightness_mul_values = stepped(5, 15, 1, 10.0);
  c.blur_sigmas = stepped(1, 8, 1, 4.0);
  c.sharpen_values = stepped(5, 20, 1, 10.0);
  c.rotation_degrees = stepped(-20, 20, 5, 1.0);
  c.shear_degrees = stepped(-15, 15, 5, 1.0);
  c.dropout_rates = {0.01, 0.05};
  c.contrast_alphas = {0.5, 0.75, 1.25, 1.5};
  c.scale_factors = {0.9, 1.1};
  c.translate_fractions = {-0.1, 0.1};
  c.crop_count = 5;
  c.flip_enabled = true;
  return c;
}

AugmentConfig AugmentConfig::multipie() {
  AugmentConfig c;
  c.brightness_add_values = stepped(-55, 55, 20, 1.0);
  c.brightness_mul_values = stepped(5, 15, 2, 10.0);
  c.blur_sigmas = stepped(2, 8, 2, 4.0);
  c.sharpen_values = stepped(5, 20, 5, 10.0);
  c.rotation_degrees = stepped(-20, 20, 10, 1.0);
  c.shear_degrees = stepped(-15, 15, 15, 1.0);
  c.dropout_rates = {0.05};
  c.contrast_alphas = {0.75, 1.25};
  c.scale_factors = {0.9, 1.1};
  c.translate_fractions = {-0.1, 0.1};
  c.crop_count = 5;
  c.flip_enabled = true;
  return c;
}

AugmentConfig AugmentConfig::none() {
  AugmentConfig c;
  c.crop_count = 0;
  c.flip_enabled = false;
  return c;
}

void AugmentConfig::validate() const {
  for (double v : brightness_add_values) require(std::isfinite(v), "brightness_add values must be finite");
  for (double v : brightness_mul_values) require(v >= 0.0 && std::isfinite(v), "brightness_mul values must be >= 0");
  for (double v : blur_sigmas) require(v > 0.0 && v <= 64.0, "blur sigmas must be in (0, 64]");
  for (double v : sharpen_values) require(std::isfinite(v), "sharpen values must be finite");
  for (double v : rotation_degrees) require(std::isfinite(v), "rotation degrees must be finite");
  for (double v : shear_degrees) require(v > -90.0 && v < 90.0, "shear degrees must be in (-90, 90)");
  for (double v : dropout_rates) require(v > 0.0 && v < 1.0, "dropout rates must be in (0, 1)");
  for (double v : contrast_alphas) require(v >= 0.0 && std::isfinite(v), "contrast alphas must be >= 0");
  for (double v : scale_factors) require(v > 0.0 && std::isfinite(v), "scale factors must be > 0");
  for (double v : translate_fractions) require(v > -1.0 && v < 1.0, "translate fractions must be in (-1, 1)");
  require(crop_count >= 0, "crop_count must be >= 0");
  require(crop_size >= 1 && crop_size <= kResizeEdge, "crop_size must be in [1, 256]");
}

AugmentConfig augment_preset(std::string_view name) {
  if (name == "uerc" || name == "default") return AugmentConfig::uerc();
  if (name == "multipie") return AugmentConfig::multipie();
  if (name == "none") return AugmentConfig::none();
  throw UsageError("unknown augmentation preset '" + std::string(name) + "' (expected uerc, multipie, none)");
}

namespace {

std::vector<double> parse_list(std::string_view value) {
  std::vector<double> out;
  if (trim(value).empty()) return out;
  for (const auto& item : split(value, ',')) out.push_back(parse_real(item));
  return out;
}

bool parse_bool(std::string_view value) {
  value = trim(value);
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw UsageError("invalid boolean '" + std::string(value) + "'");
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_real(values[i]);
  }
  return out;
}

}  // namespace

AugmentConfig parse_augment_config(std::istream& in) {
  AugmentConfig c = AugmentConfig::uerc();
  std::string line;
  std::size_t lineno = 0;
  bool seen_other = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "augment config line " + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw UsageError(where + "expected key=value");
    const std::string key(trim(std::string_view(line).substr(0, eq)));
    const std::string_view value = trim(std::string_view(line).substr(eq + 1));
    try {
      if (key == "preset") {
        if (seen_other) throw UsageError("preset must come before other keys");
        c = augment_preset(value);
        continue;
      }
      seen_other = true;
      if (key == "brightness_add_values") c.brightness_add_values = parse_list(value);
      else if (key == "brightness_mul_values") c.brightness_mul_values = parse_list(value);
      else if (key == "blur_sigmas") c.blur_sigmas = parse_list(value);
      else if (key == "sharpen_values") c.sharpen_values = parse_list(value);
      else if (key == "rotation_degrees") c.rotation_degrees = parse_list(value);
      else if (key == "shear_degrees") c.shear_degrees = parse_list(value);
      else if (key == "dropout_rates") c.dropout_rates = parse_list(value);
      else if (key == "contrast_alphas") c.contrast_alphas = parse_list(value);
      else if (key == "scale_factors") c.scale_factors = parse_list(value);
      else if (key == "translate_fractions") c.translate_fractions = parse_list(value);
      else if (key == "crop_count") c.crop_count = static_cast<int>(parse_int(value));
      else if (key == "crop_size") c.crop_size = static_cast<int>(parse_int(value));
      else if (key == "flip_enabled") c.flip_enabled = parse_bool(value);
      else throw UsageError("unknown key '" + key + "'");
    } catch (const Error& e) {
      throw UsageError(where + e.what());
    }
  }
  c.validate();
  return c;
}

AugmentConfig read_augment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open augment config " + path.string());
  return parse_augment_config(in);
}

void write_augment_config(const AugmentConfig& c, std::ostream& out) {
  out << "brightness_add_values=" << join(c.brightness_add_values) << '\n'
      << "brightness_mul_values=" << join(c.brightness_mul_values) << '\n'
      << "blur_sigmas=" << join(c.blur_sigmas) << '\n'
      << "sharpen_values=" << join(c.sharpen_values) << '\n'
      << "rotation_degrees=" << join(c.rotation_degrees) << '\n'
      << "shear_degrees=" << join(c.shear_degrees) << '\n'
      << "dropout_rates=" << join(c.dropout_rates) << '\n'
      << "contrast_alphas=" << join(c.contrast_alphas) << '\n'
      << "scale_factors=" << join(c.scale_factors) << '\n'
      << "translate_fractions=" << join(c.translate_fractions) << '\n'
      << "crop_count=" << c.crop_count << '\n'
      << "crop_size=" << c.crop_size << '\n'
      << "flip_enabled=" << (c.flip_enabled ? "true" : "false") << '\n';
}

std::string TransformSpec::label() const {
  return std::string(to_string(family)) + "=" + format_real(parameter);
}

std::vector<TransformSpec> plan_augmentations(const AugmentConfig& config, bool aligned_mode) {
  config.validate();
  std::vector<TransformSpec> plan;
  auto add = [&](Family f, const std::vector<double>& values) {
    for (double v : values) plan.push_back({f, v, 0, config.crop_size});
  };
  for (int k = 0; k < config.crop_count; ++k) plan.push_back({Family::crop, static_cast<double>(k), 0, config.crop_size});
  if (config.flip_enabled && !aligned_mode) plan.push_back({Family::flip, 1.0, 0, config.crop_size});
  add(Family::brightness_add, config.brightness_add_values);
  add(Family::brightness_mul, config.brightness_mul_values);
  add(Family::blur, config.blur_sigmas);
  add(Family::sharpen, config.sharpen_values);
  add(Family::dropout, config.dropout_rates);
  add(Family::contrast, config.contrast_alphas);
  add(Family::scale, config.scale_factors);
  add(Family::translate, config.translate_fractions);
  add(Family::rotate, config.rotation_degrees);
  add(Family::shear, config.shear_degrees);
  return plan;
}

EarImage apply_transform(const EarImage& image, const TransformSpec& spec) {
  const double p = spec.parameter;
  switch (spec.family) {
    case Family::crop: return random_crop(image, spec.crop_size, spec.seed);
    case Family::flip: return mirror_horizontal(image);
    case Family::brightness_add: return map_pixels(image, [p](double v) { return v + p; });
    case Family::brightness_mul: return map_pixels(image, [p](double v) { return v * p; });
    case Family::blur:
      require(p > 0.0, "blur sigma must be > 0");
      return gaussian_blur(image, p);
    case Family::sharpen: return sharpen(image, p, kSharpenAlpha);
    case Family::dropout:
      require(p > 0.0 && p < 1.0, "dropout rate must be in (0, 1)");
      return dropout(image, p, spec.seed);
    case Family::contrast: return map_pixels(image, [p](double v) { return p * (v - 128.0) + 128.0; });
    case Family::scale:
      require(p > 0.0, "scale factor must be > 0");
      return scale(image, p);
    case Family::translate: return translate(image, p);
    case Family::rotate: return rotate(image, p);
    case Family::shear:
      require(p > -90.0 && p < 90.0, "shear must be in (-90, 90) degrees");
      return shear(image, p);
  }
  throw UsageError("unsupported transform family");
}

std::string derived_file_name(std::string_view image_id) {
  std::string out;
  out.reserve(image_id.size() + 4);
  for (char c : image_id) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                      c == '.' || c == '-' || c == '_' || c == '=' || c == '#' || c == '+';
    out += keep ? c : '_';
  }
  return out + ".png";
}

DatasetManifest augment_dataset(const DatasetManifest& manifest, const AugmentConfig& config,
                                const fs::path& output_directory, const AugmentOptions& options) {
  const auto plan = plan_augmentations(config, options.aligned_mode);
  std::vector<const ManifestEntry*> parents;
  for (const auto& e : manifest.entries())
    if (e.split == Split::train) parents.push_back(&e);
  if (parents.empty() || plan.empty()) return manifest;

  std::error_code ec;
  fs::create_directories(output_directory, ec);
  if (ec || !fs::is_directory(output_directory))
    throw DataError("cannot create output directory " + output_directory.string());
  {
    const fs::path probe = output_directory / ".earbench_write_probe";
    std::ofstream f(probe);
    if (!f) throw DataError("output directory is not writable: " + output_directory.string());
    f.close();
    fs::remove(probe, ec);
  }

  std::set<std::string> names;
  for (const auto* parent : parents)
    for (const auto& spec : plan) {
      if (!names.insert(derived_file_name(parent->image_id + "#" + spec.label())).second)
        throw DataError("derived file name collision for " + parent->image_id);
    }

  std::vector<std::vector<ManifestEntry>> derived(parents.size());
  parallel_for(parents.size(), options.jobs, [&](std::size_t i) {
    const ManifestEntry& parent = *parents[i];
    const EarImage source = load_image(parent.path);
    const std::uint64_t image_seed = derive_seed(options.seed, parent.image_id);
    auto& out = derived[i];
    out.reserve(plan.size());
    for (TransformSpec spec : plan) {
      spec.seed = derive_seed(image_seed, spec.label());
      const EarImage result = apply_transform(source, spec);
      ManifestEntry e = parent;
      e.image_id = parent.image_id + "#" + spec.label();
      const fs::path file = output_directory / derived_file_name(e.image_id);
      save_png(result, file);
      e.path = file.generic_string();
      e.width = result.width();
      e.height = result.height();
      out.push_back(std::move(e));
    }
  });

  std::vector<ManifestEntry> entries = manifest.entries();
  for (auto& group : derived)
    for (auto& e : group) entries.push_back(std::move(e));
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.image_id < b.image_id; });
  return DatasetManifest(std::move(entries));
}

}  // namespace earbench
