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

#include "earbench/image.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "earbench/common.hpp"

namespace earbench {

EarImage::EarImage(int width, int height, int channels, std::uint8_t fill)
    : EarImage(width, height, channels,
               std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                             std::max(height, 0) * std::max(channels, 0),
                                         fill)) {}

EarImage::EarImage(int width, int height, int channels, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
  if (width < 1 || height < 1)
    throw DataError("image dimensions must be at least 1x1, got " + std::to_string(width) +
                    "x" + std::to_string(height));
  if (channels != 1 && channels != 3)
    throw DataError("image must have 1 or 3 channels, got " + std::to_string(channels));
  if (pixels_.size() != static_cast<std::size_t>(width) * height * channels)
    throw DataError("pixel buffer size does not match image dimensions");
}

EarImage to_gray(const EarImage& image) {
  if (image.channels() == 1) return image;
  EarImage out(image.width(), image.height(), 1);
  auto src = image.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    unsigned r = src[3 * i], g = src[3 * i + 1], b = src[3 * i + 2];
    dst[i] = static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
  }
  return out;
}

namespace {

struct Tap {
  int lo;
  int hi;
  double frac;
};

std::vector<Tap> bilinear_taps(int in, int out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    double s = (i + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(in - 1));
    int lo = static_cast<int>(std::floor(s));
    int hi = std::min(lo + 1, in - 1);
    taps[i] = {lo, hi, s - lo};
  }
  return taps;
}

}  // namespace

EarImage resize_bilinear(const EarImage& image, int width, int height) {
  if (width == image.width() && height == image.height()) return image;
  EarImage out(width, height, image.channels());
  const auto xs = bilinear_taps(image.width(), width);
  const auto ys = bilinear_taps(image.height(), height);
  const int ch = image.channels();
  for (int y = 0; y < height; ++y) {
    const Tap& ty = ys[y];
    for (int x = 0; x < width; ++x) {
      const Tap& tx = xs[x];
      for (int c = 0; c < ch; ++c) {
        double top = image.at(tx.lo, ty.lo, c) * (1.0 - tx.frac) + image.at(tx.hi, ty.lo, c) * tx.frac;
        double bot = image.at(tx.lo, ty.hi, c) * (1.0 - tx.frac) + image.at(tx.hi, ty.hi, c) * tx.frac;
        double v = top * (1.0 - ty.frac) + bot * ty.frac;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

EarImage crop(const EarImage& image, int x, int y, int width, int height) {
  if (x < 0 || y < 0 || width < 1 || height < 1 || x + width > image.width() ||
      y + height > image.height())
    throw UsageError("crop window out of bounds");
  EarImage out(width, height, image.channels());
  const std::size_t row = static_cast<std::size_t>(width) * image.channels();
  for (int r = 0; r < height; ++r) {
    auto src = image.pixels().subspan(
        (static_cast<std::size_t>(y + r) * image.width() + x) * image.channels(), row);
    std::copy(src.begin(), src.end(),
              out.pixels().begin() + static_cast<std::ptrdiff_t>(r * row));
  }
  return out;
}

EarImage mirror_horizontal(const EarImage& image) {
  EarImage out(image.width(), image.height(), image.channels());
  const int w = image.width();
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < image.channels(); ++c) out.at(w - 1 - x, y, c) = image.at(x, y, c);
  return out;
}

double mean_intensity(const EarImage& image) {
  const EarImage gray = to_gray(image);
  std::uint64_t sum = 0;
  for (auto v : gray.pixels()) sum += v;
  return static_cast<double>(sum) / static_cast<double>(gray.pixels().size());
}

EarImage load_image(const std::filesystem::path& path) {
  cv::Mat mat;
  try {
    mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception& e) {
    throw DataError("cannot decode image " + path.string() + ": " + e.what());
  }
  if (mat.empty()) throw DataError("cannot decode image " + path.string());
  if (mat.depth() == CV_16U) {
    mat.convertTo(mat, CV_8U, 1.0 / 257.0);
  } else if (mat.depth() != CV_8U) {
    throw DataError("unsupported pixel depth in " + path.string());
  }
  const int ch = mat.channels();
  if (ch != 1 && ch != 3 && ch != 4)
    throw DataError("unsupported channel count in " + path.string());
  const int out_ch = ch == 1 ? 1 : 3;
  EarImage out(mat.cols, mat.rows, out_ch);
  for (int y = 0; y < mat.rows; ++y) {
    const std::uint8_t* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < mat.cols; ++x) {
      if (ch == 1) {
        out.at(x, y) = row[x];
      } else {
        // OpenCV stores BGR(A).
        out.at(x, y, 0) = row[x * ch + 2];
        out.at(x, y, 1) = row[x * ch + 1];
        out.at(x, y, 2) = row[x * ch + 0];
      }
    }
  }
  return out;
}

void save_png(const EarImage& image, const std::filesystem::path& path) {
  const int ch = image.channels();
  cv::Mat mat(image.height(), image.width(), ch == 1 ? CV_8UC1 : CV_8UC3);
  for (int y = 0; y < image.height(); ++y) {
    std::uint8_t* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < image.width(); ++x) {
      if (ch == 1) {
        row[x] = image.at(x, y);
      } else {
        row[x * 3 + 0] = image.at(x, y, 2);
        row[x * 3 + 1] = image.at(x, y, 1);
        row[x * 3 + 2] = image.at(x, y, 0);
      }
    }
  }
  const std::vector<int> params = {cv::IMWRITE_PNG_COMPRESSION, 3};
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), mat, params);
  } catch (const cv::Exception& e) {
    throw DataError("cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw DataError("cannot write " + path.string());
}

}  // namespace earbench
