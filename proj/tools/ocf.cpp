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

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ocf/experiment.hpp"

namespace {

ocf::ExperimentConfig resolve(const std::string& config_path, const std::vector<std::string>& overrides) {
  ocf::Json j = config_path.empty() ? ocf::Json::object() : ocf::read_json_file(config_path);
  ocf::apply_overrides(j, overrides);
  return ocf::config_from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-class collaborative filtering lab: AutoRec, OHNS-, NS- and NCE-AutoRec"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON experiment configuration");
    sub->add_option("-s,--set", overrides, "Override a configuration key, e.g. train.lambda=1e-4")
        ->allow_extra_args(false);
  };

  auto* prepare = app.add_subcommand("prepare", "Binarize, split and snapshot a rating file");
  add_common(prepare);
  auto* train = app.add_subcommand("train", "Train one model on a prepared split");
  add_common(train);
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate model snapshots on the test split");
  add_common(evaluate);
  std::vector<std::string> model_paths;
  evaluate->add_option("-m,--model", model_paths, "Model snapshot (repeatable)")->required();
  auto* grid = app.add_subcommand("grid", "Grid search on validation NDCG");
  add_common(grid);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ocf::kExitOk : ocf::kExitUsage;
  }

  const int threads = ocf::thread_count_from_env();
  if (threads > 1) {
    std::cerr << "OCF_THREADS=" << threads << ": parallel execution, results may not be bit-reproducible\n";
  }
  try {
    const auto config = resolve(config_path, overrides);
    if (*prepare) {
      ocf::cmd_prepare(config, std::cout, threads);
    } else if (*train) {
      ocf::cmd_train(config, std::cout, threads);
    } else if (*evaluate) {
      std::vector<std::filesystem::path> paths(model_paths.begin(), model_paths.end());
      ocf::cmd_evaluate(config, paths, std::cout, threads);
    } else if (*grid) {
      const auto out = ocf::cmd_grid(config, std::cout, threads);
      std::cout << "best lattice point " << out.result.best_index << " -> " << out.best_config_path.string()
                << '\n';
    }
  } catch (const ocf::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return ocf::kExitUsage;
  } catch (const ocf::DivergenceError& e) {
    std::cerr << "numerical divergence: " << e.what() << '\n';
    return ocf::kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return ocf::kExitData;
  }
  return ocf::kExitOk;
}
