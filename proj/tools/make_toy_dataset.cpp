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

// Writes the synthetic toy dataset used by the end-to-end recipe.

#include <iostream>

#include <CLI11.hpp>

#include "earbench/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a synthetic subject-dirs toy dataset", "make_toy_dataset"};
  std::string root;
  earbench::synthetic::ToyOptions opt;
  app.add_option("--out", root, "Output directory")->required();
  app.add_option("--subjects", opt.subjects, "Number of subjects")->capture_default_str();
  app.add_option("--images", opt.images_per_subject, "Images per subject")->capture_default_str();
  app.add_option("--seed", opt.seed, "Generator seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  try {
    earbench::synthetic::write_toy_dataset(root, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::cout << "wrote " << opt.subjects * opt.images_per_subject << " images to " << root << '\n';
  return 0;
}
