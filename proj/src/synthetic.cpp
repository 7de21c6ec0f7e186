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

#include "earbench/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "earbench/common.hpp"

namespace earbench::synthetic {

EarImage subject_image(int subject, int sample, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "subject" + std::to_string(subject) + "/" + std::to_string(sample)));
  const int width = 64 + static_cast<int>(rng.below(33));
  const int height = 96 + static_cast<int>(rng.below(49));
  // Orientations 0, 45 and 90 degrees stay distinct under horizontal flips
  // and the +-20 degree rotations of the default grid; periods are a factor
  // ~1.6 apart. The grating lives in a nominal 96x128 frame so the texture
  // survives the non-uniform resize to the LBP working size.
  static constexpr double kPeriods[] = {4.0, 6.5, 10.5, 17.0};
  const double theta = std::numbers::pi * ((subject % 3) * 45.0) / 180.0;
  const double period = kPeriods[subject / 3 % 4];
  const double phase = 2.0 * std::numbers::pi * rng.uniform();
  const double offset = -10.0 + 20.0 * rng.uniform();
  EarImage img(width, height, 1);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double xn = x * 96.0 / width, yn = y * 128.0 / height;
      const double t = (xn * std::cos(theta) + yn * std::sin(theta)) / period;
      const double v = 128.0 + offset + 60.0 * std::sin(2.0 * std::numbers::pi * t + phase) +
                       (rng.uniform() - 0.5) * 16.0;
      img.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  return img;
}

EarImage noise_image(int width, int height, int lo, int hi, std::uint64_t seed) {
  Rng rng(seed);
  EarImage img(width, height, 1);
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(lo + static_cast<int>(rng.below(span)));
  return img;
}

void write_toy_dataset(const std::filesystem::path& root, const ToyOptions& options) {
  for (int s = 0; s < options.subjects; ++s) {
    char dir[32];
    std::snprintf(dir, sizeof dir, "subject_%02d", s);
    std::filesystem::create_directories(root / dir);
    for (int k = 0; k < options.images_per_subject; ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "img_%02d.png", k);
      save_png(subject_image(s, k, options.seed), root / dir / name);
    }
  }
}

}  // namespace earbench::synthetic
