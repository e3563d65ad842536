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

// Seeded, replicated batch experiments: flat key=value configs in, CSV
// traces and summaries out.
//
// Output layout under output_dir:
//   trace_r{r}.csv   k,queries,loss,normalized_loss,lambda_min_hbar
//   summary.csv      aggregate curve over the replicates that finished
//   replicates.csv   per-replicate status (ok / diverged) and final values

#ifndef STEINZO_EXPERIMENT_HPP
#define STEINZO_EXPERIMENT_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "steinzo/analysis.hpp"
#include "steinzo/core.hpp"
#include "steinzo/solvers.hpp"

namespace steinzo {

class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

struct ExperimentConfig {
  // problem: skewed_quartic | quadratic | correntropy
  std::string problem = "skewed_quartic";
  std::size_t p = 20;
  double noise_sigma2 = 0.1;
  std::vector<double> quadratic_diag;  // defaults to 1..p

  // correntropy: dataset is "synthetic" or a LIBSVM file path
  std::string dataset = "synthetic";
  std::size_t dataset_dim = 0;  // 0: infer from the file
  std::size_t synthetic_d = 10;
  std::size_t synthetic_n = 1000;
  double separation = 5.0;
  std::uint64_t dataset_seed = 7;
  double kappa = 10.0;
  std::size_t batch_size = 10;

  // theta0: ones | zeros | uniform | comma list; empty picks the problem default
  std::string theta0;
  double theta0_low = -5.0;
  double theta0_high = 5.0;
  std::optional<double> f_opt;

  SolverKind solver = SolverKind::kStein2;
  double a = 1.0;
  double stability = 0.0;  // key "A"
  double alpha = 0.602;
  double c = 1.0;
  double gamma = 0.101;
  std::string w_mode = "harmonic";  // harmonic | polynomial
  double w0 = 1.0;
  double omega = 1.0;
  std::optional<double> ctilde;

  std::string pd_map = "eigen_clamp";  // eigen_clamp | damp_shift | sqrt
  double delta_floor = 1e-8;
  bool delta_relative = true;
  double sqrt_eps0 = 1.0;
  double sqrt_eps_decay = 1.0;

  std::uint64_t queries_per_iter = 12;
  std::uint64_t iterations = 1000;  // key "K"
  std::uint64_t n_replicates = 1;
  std::uint64_t base_seed = 1;
  std::uint64_t warm_start = 0;
  std::optional<double> blocking_tolerance;
  std::string output_dir = "steinzo_out";
};

/// Sets one key. Throws ConfigError for unknown keys or bad values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);
/// Parses "key=value" (used by --set).
void apply_override(ExperimentConfig& config, const std::string& assignment);
/// Reads key=value lines; '#' starts a comment.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config_file(const std::string& path);
/// Cross-field checks (schedule, pd map, divisibility). Throws ConfigError.
void validate_experiment(const ExperimentConfig& config);

GainSchedule make_schedule(const ExperimentConfig& config);
SolverConfig make_solver_config(const ExperimentConfig& config);

/// A named benchmark bound to its settings.
struct ProblemInstance {
  std::size_t dimension = 0;
  std::function<NoisyOracle(RandomStream)> make_oracle;
  LossFunction loss;
  double f_opt = 0.0;
  std::function<Vector(RandomStream&)> initial_point;
};
ProblemInstance build_problem(const ExperimentConfig& config);
/// Text identifying every problem-defining setting.
std::string problem_signature(const ExperimentConfig& config);

/// Streams of replicate r: (base_seed, 4r + purpose).
enum class StreamPurpose : std::uint64_t { kOracleNoise = 0, kPerturbation = 1, kInitialPoint = 2 };
RandomStream replicate_stream(std::uint64_t base_seed, std::uint64_t replicate, StreamPurpose purpose);

struct ReplicateResult {
  std::uint64_t replicate = 0;
  bool diverged = false;
  std::string message;
  RunTrace trace;
  double f_init = 0.0;
  std::vector<double> normalized;  // per record; NaN when f_init <= f_opt
  double final_loss() const;
  double final_normalized() const;
};

struct ExperimentResult {
  ExperimentConfig config;
  double f_opt = 0.0;
  std::vector<ReplicateResult> replicates;
  AggregateCurve loss_curve;        // over non-diverged replicates
  AggregateCurve normalized_curve;  // over non-diverged replicates
  std::vector<std::uint64_t> queries;  // query ledger along the curve
  std::size_t n_ok() const;
};

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned jobs = 1,
                                bool write_files = true);

struct ComparisonRow {
  std::uint64_t replicate = 0;
  double final_a = 0.0;  // final normalized distance, NaN if diverged
  double final_b = 0.0;
};

struct ComparisonTable {
  std::string solver_a;
  std::string solver_b;
  std::vector<ComparisonRow> rows;
  double mean_difference = 0.0;  // mean of (a - b) over rows where both finished
  std::size_t wins_a = 0;        // strictly lower final distance
  std::size_t wins_b = 0;
  std::size_t ties = 0;
  double win_rate_a = 0.0;
};

/// Runs both configs on identical problems, seeds and budgets and pairs the
/// replicates. Throws InvalidInput when the budgets or problems differ.
ComparisonTable compare_solvers(const ExperimentConfig& a, const ExperimentConfig& b,
                                unsigned jobs = 1, bool write_files = true);
ComparisonTable compare_results(const ExperimentResult& a, const ExperimentResult& b);
void write_comparison_csv(std::ostream& out, const ComparisonTable& table);

void write_trace_csv(std::ostream& out, const ReplicateResult& result);
void write_summary_csv(std::ostream& out, const ExperimentResult& result);
void write_replicates_csv(std::ostream& out, const ExperimentResult& result);

struct TraceCsvRow {
  std::uint64_t k = 0;
  std::uint64_t queries = 0;
  double loss = 0.0;
  double normalized_loss = 0.0;
  double lambda_min_hbar = 0.0;
};
std::vector<TraceCsvRow> read_trace_csv(std::istream& in);

/// %.17g, which round-trips every double.
std::string format_double(double v);

}  // namespace steinzo

#endif  // STEINZO_EXPERIMENT_HPP
