// Copyright 2026 The OCF Lab Authors.
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

// Writes a MovieLens-100K-shaped synthetic rating log (user, item, rating,
// timestamp; tab separated) for desk-scale experiments.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ocf/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic rating log generator"};
  ocf::SyntheticSpec spec;
  std::string output;
  app.add_option("-o,--output", output, "Output path")->required();
  app.add_option("--users", spec.users);
  app.add_option("--items", spec.items);
  app.add_option("--min-ratings", spec.min_ratings);
  app.add_option("--mean-ratings", spec.mean_ratings);
  app.add_option("--seed", spec.seed);
  CLI11_PARSE(app, argc, argv);
  try {
    const auto records = ocf::generate_ratings(spec);
    std::ofstream out(output);
    if (!out) throw ocf::DataError("cannot write " + output);
    ocf::write_ratings(out, records);
    std::cout << records.size() << " ratings written to " << output << '\n';
  } catch (const ocf::UsageError& e) {
    std::cerr << e.what() << '\n';
    return ocf::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return ocf::kExitData;
  }
  return ocf::kExitOk;
}
