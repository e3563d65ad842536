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

#ifndef STEINZO_ANALYSIS_HPP
#define STEINZO_ANALYSIS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "steinzo/core.hpp"
#include "steinzo/pdmap.hpp"
#include "steinzo/problems.hpp"
#include "steinzo/solvers.hpp"

namespace steinzo {

/// (loss - f_opt) / (f_init - f_opt) per record.
std::vector<double> normalized_distance(const RunTrace& trace, double f_opt, double f_init);

struct AggregateCurve {
  std::vector<double> x;  // iteration index k
  std::vector<double> mean;
  std::vector<double> std_error;
  std::size_t n_replicates = 0;
};

using MetricSelector = std::function<double(const TraceRecord&)>;

/// Pointwise mean and standard error (n-1 denominator) across traces that
/// share an iteration grid.
AggregateCurve aggregate_replicates(std::span<const RunTrace> traces, const MetricSelector& metric);

/// RMS error sqrt(mean_r |theta_k^r - theta*|^2) per k. The standard error is
/// the delta-method error of the square root.
AggregateCurve rms_error_curve(std::span<const RunTrace> traces, const Vector& theta_star);

/// Least-squares slope of log(mean) on log(x) over k_min <= x <= k_max.
double fit_rate_exponent(const AggregateCurve& curve, double k_min, double k_max);

/// Least-squares slope of log(y) on log(x) for paired samples.
double log_log_slope(std::span<const double> x, std::span<const double> y);

// Limiting law of k^{tau/2} (theta_k - theta*) for the damped Stein Newton
// recursion with a_k = a/(k+1)^alpha, c_k = c/(k+1)^gamma:
//   tau   = alpha - 2 gamma,   tau_+ = tau if alpha == 1 else 0
//   mu    = a c^2 / (3 tau_+ - 6a) H^{-1} E[f'''(theta*)(u x u x u) u]
//   Lambda = a^2 Var[y(theta*)] / (2 c^2 (2a - tau_+)) H^{-2}
// Lambda assumes one central-difference gradient per iteration; averaging m
// bundles divides it by m.
double rate_tau(const GainSchedule& schedule);
double rate_tau_plus(const GainSchedule& schedule);

/// Throws InvalidInput naming the violated condition unless alpha <= 6 gamma
/// and a > tau_+ / (2 lambda_min(H)).
void check_normality_conditions(const GainSchedule& schedule, const Matrix& h);

Matrix predicted_limit_covariance(const GainSchedule& schedule, const Matrix& h,
                                  double noise_variance, std::uint64_t bundles_per_iter = 1);

/// E[f'''(u x u x u) u] for u ~ N(0, I) reduces by Isserlis' theorem to
/// 3 sum_i T(i, i, :). `third` holds slices T[i](j, k).
Vector gaussian_third_moment_contraction(const std::vector<Matrix>& third);

Vector predicted_limit_mean(const GainSchedule& schedule, const Matrix& h,
                            const std::vector<Matrix>& third_derivative);

struct NormalityDiagnostic {
  double tau = 0.0;
  double tau_plus = 0.0;
  Vector empirical_mean;
  Matrix empirical_cov;
  Vector predicted_mean;
  Matrix predicted_cov;
  std::size_t n_replicates = 0;
  std::size_t n_diverged = 0;
  bool degenerate_covariance = false;  // fewer than two usable replicates
  std::vector<Vector> scaled_errors;
};

struct NormalityOptions {
  std::uint64_t queries_per_iter = 3;
  PdMapKind pd_map = EigenClamp{0.1, false};
  std::optional<Vector> theta0;  // default theta* + 1
  unsigned jobs = 1;
};

/// Runs n_replicates of the Stein second-order method on a quadratic to
/// iteration K and compares the scaled final errors with the predicted
/// limit law. Replicate seeds are drawn from `stream`.
NormalityDiagnostic normality_check_quadratic(const QuadraticProblem& problem,
                                              const GainSchedule& schedule, std::uint64_t k_final,
                                              std::size_t n_replicates, RandomStream& stream,
                                              const NormalityOptions& options = {});

}  // namespace steinzo

#endif  // STEINZO_ANALYSIS_HPP
