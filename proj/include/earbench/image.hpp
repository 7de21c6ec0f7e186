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
#include <span>
#include <vector>

namespace earbench {

/// 8-bit image, either grayscale (1 channel) or RGB (3 channels, interleaved).
class EarImage {
 public:
  EarImage() = default;
  EarImage(int width, int height, int channels, std::uint8_t fill = 0);
  EarImage(int width, int height, int channels, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return pixels_.empty(); }

  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t& at(int x, int y, int c = 0) {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> pixels() { return pixels_; }

  friend bool operator==(const EarImage&, const EarImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// ITU-R 601 luma, (299 R + 587 G + 114 B) / 1000 rounded to nearest.
/// Grayscale input is returned unchanged.
EarImage to_gray(const EarImage& image);

/// Bilinear resize with pixel-center alignment (source coordinate
/// (x + 0.5) * in / out - 0.5, clamped at the borders), results rounded to
/// nearest. Same-size requests return an exact copy.
EarImage resize_bilinear(const EarImage& image, int width, int height);

EarImage crop(const EarImage& image, int x, int y, int width, int height);

/// Pixel (x, y) moves to (width - 1 - x, y).
EarImage mirror_horizontal(const EarImage& image);

/// Mean of the grayscale conversion, in [0, 255].
double mean_intensity(const EarImage& image);

/// Decodes PNG, JPEG, BMP, PGM/PPM and the other formats OpenCV reads.
/// Alpha is dropped and 16-bit data is scaled to 8 bits. Throws DataError.
EarImage load_image(const std::filesystem::path& path);

/// Lossless PNG with fixed encoder settings, so equal images give equal bytes.
void save_png(const EarImage& image, const std::filesystem::path& path);

}  // namespace earbench
