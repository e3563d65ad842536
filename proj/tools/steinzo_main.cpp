// Copyright 2026 The steinzo Authors.
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

// steinzo run --config <path> [--set k=v]... [--jobs N]
// steinzo compare --config-a <path> --config-b <path> [--set k=v]... [--jobs N]
//
// Exit codes: 0 ok, 1 config error, 2 runtime error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "steinzo/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

steinzo::ExperimentConfig load(const std::string& path, const std::vector<std::string>& overrides) {
  steinzo::ExperimentConfig config = steinzo::load_config_file(path);
  for (const auto& o : overrides) steinzo::apply_override(config, o);
  if (const char* seed = std::getenv("STEINZO_SEED"); seed != nullptr && *seed != '\0') {
    steinzo::apply_setting(config, "base_seed", seed);
  }
  steinzo::validate_experiment(config);
  return config;
}

void report(const steinzo::ExperimentResult& result) {
  const auto& c = result.config;
  std::cout << steinzo::solver_name(c.solver) << ": " << result.n_ok() << "/"
            << result.replicates.size() << " replicates finished";
  if (!result.normalized_curve.mean.empty()) {
    std::cout << ", mean final normalized loss "
              << steinzo::format_double(result.normalized_curve.mean.back());
  }
  std::cout << ", output in " << c.output_dir << "\n";
  for (const auto& r : result.replicates) {
    if (r.diverged) std::cout << "  replicate " << r.replicate << " diverged: " << r.message << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zeroth-order stochastic Newton experiments"};
  app.require_subcommand(1);

  std::string config_path, config_a, config_b;
  std::vector<std::string> overrides;
  unsigned jobs = 1;

  auto* run = app.add_subcommand("run", "Run a replicated experiment");
  run->add_option("--config", config_path, "key=value config file")->required();
  run->add_option("--set", overrides, "Override a config key (key=value)");
  run->add_option("--jobs", jobs, "Concurrent replicates")->check(CLI::PositiveNumber);

  auto* compare = app.add_subcommand("compare", "Paired comparison of two solver configs");
  compare->add_option("--config-a", config_a, "First config")->required();
  compare->add_option("--config-b", config_b, "Second config")->required();
  compare->add_option("--set", overrides, "Override a key in both configs (key=value)");
  compare->add_option("--jobs", jobs, "Concurrent replicates")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  steinzo::ExperimentConfig a, b;
  try {
    if (*run) {
      a = load(config_path, overrides);
    } else {
      a = load(config_a, overrides);
      b = load(config_b, overrides);
    }
  } catch (const steinzo::InvalidInput& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const steinzo::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (*run) {
      report(steinzo::run_experiment(a, jobs));
      return kOk;
    }
    if (a.output_dir == b.output_dir) {
      std::cerr << "config error: the two configs share output_dir '" << a.output_dir << "'\n";
      return kConfigError;
    }
    steinzo::ComparisonTable table;
    try {
      table = steinzo::compare_solvers(a, b, jobs);
    } catch (const steinzo::ConfigError&) {
      throw;
    } catch (const steinzo::InvalidInput& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kConfigError;
    }
    const auto out_path = std::filesystem::path(a.output_dir) / "comparison.csv";
    std::ofstream out(out_path);
    if (!out) throw steinzo::Error("cannot write '" + out_path.string() + "'");
    steinzo::write_comparison_csv(out, table);
    std::cout << table.solver_a << " vs " << table.solver_b << ": mean difference "
              << steinzo::format_double(table.mean_difference) << ", wins " << table.wins_a << "/"
              << table.wins_b << " (ties " << table.ties << "), win rate "
              << steinzo::format_double(table.win_rate_a) << "\n"
              << "table in " << out_path.string() << "\n";
    return kOk;
  } catch (const steinzo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}
