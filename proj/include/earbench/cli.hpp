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
#include <string>
#include <vector>

namespace earbench::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kDataError = 2,
};

/// Subcommands accepted by run() and inside recipes.
const std::vector<std::string>& commands();

/// Entry point. `args` excludes the program name. Returns 0 on success, 1 on
/// usage errors (unknown command, bad flag) and 2 on data errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Splits one recipe line into arguments. Double quotes group words.
/// Throws UsageError on an unterminated quote.
std::vector<std::string> tokenize(const std::string& line);

/// Runs each non-comment line of the recipe as a subcommand, in order,
/// stopping at the first failure and returning its exit code. The whole
/// recipe is checked before anything runs; a malformed line gives exit 1
/// with its line number. Progress and wall-clock time per stage go to out.
int run_pipeline(const std::filesystem::path& recipe, std::ostream& out, std::ostream& err);

}  // namespace earbench::cli
