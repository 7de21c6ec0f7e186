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

#include "earbench/image.hpp"
#include "earbench/manifest.hpp"

namespace earbench::synthetic {

/// Grayscale sinusoidal grating whose orientation and period identify the
/// subject (12 distinct textures, then they repeat); phase, brightness, size
/// and pixel noise vary per sample.
EarImage subject_image(int subject, int sample, std::uint64_t seed);

/// Uniform noise in [lo, hi].
EarImage noise_image(int width, int height, int lo, int hi, std::uint64_t seed);

struct ToyOptions {
  int subjects = 10;
  int images_per_subject = 10;
  std::uint64_t seed = 7;
};

/// Writes root/subject_XX/img_YY.png (subject-dirs layout).
void write_toy_dataset(const std::filesystem::path& root, const ToyOptions& options = {});

}  // namespace earbench::synthetic
