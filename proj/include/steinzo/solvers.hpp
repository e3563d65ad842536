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

// Zeroth-order optimizers.
//
//   run_first_order         theta <- theta - a_k g_k, averaged central
//                           Gaussian-difference gradients (2 queries each).
//   run_stein_second_order  damped stochastic Newton:
//                             theta_{k+1} = theta_k - a_k Psi_k(Hbar_k)^{-1} g_k
//                             Hbar_{k+1}  = Hbar_k - w_k (Hbar_k - H_k)
//                           with (g_k, H_k) averaged from shared 3-query
//                           Stein bundles and Hbar_0 = I.
//   run_2spsa               the same recursion with Spall's two-perturbation
//                           Rademacher Hessian estimate (4 queries each).
//
// All three record one TraceRecord per iterate, k = 0..K.

#ifndef STEINZO_SOLVERS_HPP
#define STEINZO_SOLVERS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "steinzo/core.hpp"
#include "steinzo/pdmap.hpp"

namespace steinzo {

enum class SolverKind { kFirstOrder, kStein2, kTwoSpsa };

/// Queries consumed by one gradient/Hessian estimate of the given solver.
std::uint64_t bundle_cost(SolverKind kind);
const char* solver_name(SolverKind kind);

struct SolverConfig {
  GainSchedule schedule{1.0, 0.0, 0.602, 1.0, 0.101};
  PdMapKind pd_map = default_pd_map();
  std::uint64_t queries_per_iter = 12;
  std::uint64_t max_iterations = 1000;
  // Reject a step when a fresh observation at the candidate exceeds one at
  // the current iterate by more than this. Costs two extra queries.
  std::optional<double> blocking_tolerance;
  // First-order iterations run before the second-order phase.
  std::uint64_t warm_start_iters = 0;
  // 2SPSA second perturbation magnitude: ctilde_k = ctilde / (k+1)^gamma.
  std::optional<double> ctilde;

  // Evaluated outside the query ledger to fill TraceRecord::loss.
  LossFunction loss_metric;

  // Test hooks. Fixed w_k for every k, and a starting Hbar other than I.
  std::optional<double> hessian_weight_override;
  std::optional<Matrix> initial_hbar;
};

struct TraceRecord {
  std::uint64_t k = 0;
  std::uint64_t queries = 0;
  Vector theta;
  double loss = 0.0;             // NaN without a loss_metric
  double lambda_min_hbar = 0.0;  // NaN for first-order runs
  bool blocked = false;          // the step into this iterate was rejected
};

struct RunTrace {
  std::vector<TraceRecord> records;
  Matrix final_hbar;  // empty for first-order runs
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, RunTrace trace);
  const RunTrace& trace() const { return trace_; }

 private:
  RunTrace trace_;
};

/// Throws InvalidInput if the config does not suit `kind`.
void validate_config(SolverKind kind, const SolverConfig& config);

RunTrace run_first_order(NoisyOracle& oracle, const SolverConfig& config, const Vector& theta0,
                         RandomStream& stream);

RunTrace run_stein_second_order(NoisyOracle& oracle, const SolverConfig& config,
                                const Vector& theta0, RandomStream& stream);

RunTrace run_2spsa(NoisyOracle& oracle, const SolverConfig& config, const Vector& theta0,
                   RandomStream& stream);

RunTrace run_solver(SolverKind kind, NoisyOracle& oracle, const SolverConfig& config,
                    const Vector& theta0, RandomStream& stream);

/// One symmetrized 2SPSA Hessian estimate plus its SPSA gradient, from the
/// queries y(theta +- c delta) and y(theta +- c delta + ctilde delta_tilde).
struct SpsaEstimate {
  Vector gradient;
  Matrix hessian;
};
SpsaEstimate estimate_2spsa(NoisyOracle& oracle, const Vector& theta, double c, double ctilde,
                            const Vector& delta, const Vector& delta_tilde);

}  // namespace steinzo

#endif  // STEINZO_SOLVERS_HPP
