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
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace earbench {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or an invalid configuration supplied by the caller.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Input data that cannot be read or violates a format or invariant.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Seed used when neither --seed nor EARBENCH_SEED is given.
inline constexpr std::uint64_t kDefaultSeed = 20180101;

std::uint64_t splitmix64(std::uint64_t x);

/// Derives a child seed from a parent seed and a string tag (stage name,
/// image id, ...). Stable across platforms and runs.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

/// Small portable generator. Unlike std::mt19937 + std distributions, the
/// bounded draws here are specified exactly, so outputs are identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Uniform real in [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t state_;
};

/// Fisher-Yates shuffle driven by Rng.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

/// Shortest decimal text that round-trips to the same double.
std::string format_real(double value);

/// Scientific notation with 17 significant digits.
std::string format_precise(double value);

/// Fixed notation with the given number of decimals.
std::string format_fixed(double value, int decimals);

double parse_real(std::string_view text);
std::int64_t parse_int(std::string_view text);

/// Runs fn(0..n-1) on up to `jobs` threads. If any call throws, the
/// exception from the lowest index is rethrown after all workers finish.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

}  // namespace earbench
