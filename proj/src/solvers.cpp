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

#include "steinzo/solvers.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "steinzo/estimators.hpp"

namespace steinzo {

namespace {

constexpr double kDivergenceNorm = 1e12;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct StepEstimate {
  Vector gradient;
  Matrix hessian;  // empty for first-order steps
};

using StepEstimator =
    std::function<StepEstimate(const Vector& theta, const Gains& gains, std::uint64_t k)>;

StepEstimate first_order_step(NoisyOracle& oracle, RandomStream& stream, std::uint64_t bundles,
                              const Vector& theta, double c) {
  const auto p = oracle.dimension();
  Vector sum = Vector::Zero(theta.size());
  for (std::uint64_t b = 0; b < bundles; ++b) {
    const Vector u = sample_standard_normal_vector(stream, p);
    sum += estimate_gradient(GradientEstimator::kTwoPointCentral, oracle, theta, c, u);
  }
  return {sum / static_cast<double>(bundles), Matrix()};
}

class Runner {
 public:
  Runner(NoisyOracle& oracle, const SolverConfig& config, bool second_order)
      : oracle_(oracle), config_(config), second_order_(second_order), start_(oracle.query_count()) {}

  RunTrace run(const Vector& theta0, std::uint64_t iterations, const StepEstimator& estimate) {
    check_parameter_vector(theta0);
    if (static_cast<std::size_t>(theta0.size()) != oracle_.dimension()) {
      throw InvalidInput("theta0 dimension does not match the oracle");
    }
    const auto p = theta0.size();
    Vector theta = theta0;
    if (second_order_) {
      trace_.final_hbar = config_.initial_hbar.value_or(Matrix::Identity(p, p));
      if (trace_.final_hbar.rows() != p || trace_.final_hbar.cols() != p) {
        throw InvalidInput("initial Hbar has the wrong shape");
      }
    }
    Matrix& hbar = trace_.final_hbar;
    record(0, theta, false);

    for (std::uint64_t k = 0; k < iterations; ++k) {
      const Gains gains = gain_at(config_.schedule, k);
      const StepEstimate est = estimate(theta, gains, k);

      Vector direction;
      if (second_order_) {
        direction = solve_preconditioned(apply_pd_map(config_.pd_map, hbar, k), est.gradient);
        const double w = config_.hessian_weight_override.value_or(gains.w);
        hbar = hbar - w * (hbar - est.hessian);
        if (!hbar.allFinite()) diverge("Hessian average became non-finite", k);
      } else {
        direction = est.gradient;
      }
      const Vector candidate = theta - gains.a * direction;
      if (!candidate.allFinite()) diverge("iterate became non-finite", k);

      bool blocked = false;
      if (config_.blocking_tolerance) {
        const double current = oracle_.query_aux(theta);
        const double proposed = oracle_.query_aux(candidate);
        blocked = proposed - current > *config_.blocking_tolerance;
      }
      if (!blocked) theta = candidate;
      if (theta.norm() > kDivergenceNorm) diverge("iterate norm exceeded 1e12", k);
      record(k + 1, theta, blocked);
    }
    return std::move(trace_);
  }

 private:
  void record(std::uint64_t k, const Vector& theta, bool blocked) {
    TraceRecord r;
    r.k = k;
    r.queries = oracle_.query_count() - start_;
    r.theta = theta;
    r.loss = config_.loss_metric ? config_.loss_metric(theta) : kNaN;
    r.lambda_min_hbar = second_order_ ? min_eigenvalue(trace_.final_hbar) : kNaN;
    r.blocked = blocked;
    trace_.records.push_back(std::move(r));
  }

  [[noreturn]] void diverge(const std::string& why, std::uint64_t k) {
    throw DivergenceError(why + " at iteration " + std::to_string(k), std::move(trace_));
  }

  NoisyOracle& oracle_;
  const SolverConfig& config_;
  bool second_order_;
  std::uint64_t start_;
  RunTrace trace_;
};

// Runs the first-order warm start and returns where it ended.
Vector warm_start(NoisyOracle& oracle, const SolverConfig& config, const Vector& theta0,
                  RandomStream& stream) {
  if (config.warm_start_iters == 0) return theta0;
  SolverConfig warm = config;
  warm.loss_metric = nullptr;
  warm.blocking_tolerance.reset();
  const std::uint64_t bundles = std::max<std::uint64_t>(1, config.queries_per_iter / 2);
  Runner runner(oracle, warm, false);
  RunTrace t = runner.run(theta0, config.warm_start_iters, [&](const Vector& theta, const Gains& g, std::uint64_t) {
    return first_order_step(oracle, stream, bundles, theta, g.c);
  });
  return t.records.back().theta;
}

}  // namespace

DivergenceError::DivergenceError(const std::string& what, RunTrace trace)
    : Error(what), trace_(std::move(trace)) {}

std::uint64_t bundle_cost(SolverKind kind) {
  switch (kind) {
    case SolverKind::kFirstOrder:
      return 2;
    case SolverKind::kStein2:
      return 3;
    case SolverKind::kTwoSpsa:
      return 4;
  }
  return 0;
}

const char* solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::kFirstOrder:
      return "first_order";
    case SolverKind::kStein2:
      return "stein2";
    case SolverKind::kTwoSpsa:
      return "2spsa";
  }
  return "?";
}

void validate_config(SolverKind kind, const SolverConfig& config) {
  const std::uint64_t cost = bundle_cost(kind);
  if (config.queries_per_iter == 0 || config.queries_per_iter % cost != 0) {
    throw InvalidInput(std::string(solver_name(kind)) + " needs queries_per_iter to be a positive multiple of " +
                       std::to_string(cost) + ", got " + std::to_string(config.queries_per_iter));
  }
  validate_pd_map(config.pd_map);
  if (config.blocking_tolerance && std::isnan(*config.blocking_tolerance)) {
    throw InvalidInput("blocking tolerance must not be NaN");
  }
  if (config.ctilde && !(*config.ctilde > 0.0)) throw InvalidInput("ctilde must be > 0");
  if (config.hessian_weight_override) {
    const double w = *config.hessian_weight_override;
    if (!(w >= 0.0 && w <= 1.0)) throw InvalidInput("Hessian weight override must lie in [0, 1]");
  }
  if (kind == SolverKind::kTwoSpsa && !config.schedule.harmonic() && !config.hessian_weight_override) {
    throw InvalidInput("2spsa averages Hessians with w_k = 1/(k+1); use harmonic weights");
  }
}

RunTrace run_first_order(NoisyOracle& oracle, const SolverConfig& config, const Vector& theta0,
                         RandomStream& stream) {
  validate_config(SolverKind::kFirstOrder, config);
  const std::uint64_t bundles = config.queries_per_iter / 2;
  Runner runner(oracle, config, false);
  return runner.run(theta0, config.max_iterations, [&](const Vector& theta, const Gains& g, std::uint64_t) {
    return first_order_step(oracle, stream, bundles, theta, g.c);
  });
}

RunTrace run_stein_second_order(NoisyOracle& oracle, const SolverConfig& config,
                                const Vector& theta0, RandomStream& stream) {
  validate_config(SolverKind::kStein2, config);
  Runner runner(oracle, config, true);
  const Vector start = warm_start(oracle, config, theta0, stream);
  const std::uint64_t bundles = config.queries_per_iter / 3;
  const auto p = oracle.dimension();
  std::vector<EstimateBundle> batch(bundles);
  return runner.run(start, config.max_iterations, [&](const Vector& theta, const Gains& g, std::uint64_t) {
    for (auto& b : batch) {
      const Vector u = sample_standard_normal_vector(stream, p);
      b = estimate_bundle_shared(oracle, theta, g.c, u);
    }
    EstimateBundle avg = average_bundles(batch);
    return StepEstimate{std::move(avg.gradient), std::move(avg.hessian)};
  });
}

SpsaEstimate estimate_2spsa(NoisyOracle& oracle, const Vector& theta, double c, double ctilde,
                            const Vector& delta, const Vector& delta_tilde) {
  const auto p = static_cast<Eigen::Index>(oracle.dimension());
  if (theta.size() != p || delta.size() != p || delta_tilde.size() != p) {
    throw InvalidInput("2spsa dimension mismatch");
  }
  if (!(c > 0.0) || !(ctilde > 0.0)) throw InvalidInput("2spsa magnitudes must be > 0");
  const double y_plus = oracle.query(theta + c * delta);
  const double y_minus = oracle.query(theta - c * delta);
  const double y_plus_plus = oracle.query(theta + c * delta + ctilde * delta_tilde);
  const double y_minus_plus = oracle.query(theta - c * delta + ctilde * delta_tilde);

  const Vector inv_delta = delta.cwiseInverse();
  const Vector inv_delta_tilde = delta_tilde.cwiseInverse();
  const double scale = (y_plus_plus - y_minus_plus + y_minus - y_plus) / (2.0 * c * ctilde);
  const Matrix raw = scale * (inv_delta_tilde * inv_delta.transpose());

  SpsaEstimate out;
  out.hessian = Matrix(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    out.hessian(j, j) = raw(j, j);
    for (Eigen::Index i = j + 1; i < p; ++i) {
      const double v = 0.5 * (raw(i, j) + raw(j, i));
      out.hessian(i, j) = v;
      out.hessian(j, i) = v;
    }
  }
  out.gradient = ((y_plus - y_minus) / (2.0 * c)) * inv_delta;
  return out;
}

RunTrace run_2spsa(NoisyOracle& oracle, const SolverConfig& config, const Vector& theta0,
                   RandomStream& stream) {
  validate_config(SolverKind::kTwoSpsa, config);
  Runner runner(oracle, config, true);
  const Vector start = warm_start(oracle, config, theta0, stream);
  const std::uint64_t bundles = config.queries_per_iter / 4;
  const auto p = oracle.dimension();
  const double ctilde0 = config.ctilde.value_or(config.schedule.c());
  const double gamma = config.schedule.gamma();
  return runner.run(start, config.max_iterations, [&](const Vector& theta, const Gains& g, std::uint64_t k) {
    const double ctilde = ctilde0 / std::pow(static_cast<double>(k) + 1.0, gamma);
    StepEstimate avg{Vector::Zero(theta.size()), Matrix::Zero(theta.size(), theta.size())};
    for (std::uint64_t b = 0; b < bundles; ++b) {
      const Vector delta = sample_rademacher_vector(stream, p);
      const Vector delta_tilde = sample_rademacher_vector(stream, p);
      const SpsaEstimate e = estimate_2spsa(oracle, theta, g.c, ctilde, delta, delta_tilde);
      avg.gradient += e.gradient;
      avg.hessian += e.hessian;
    }
    avg.gradient /= static_cast<double>(bundles);
    avg.hessian /= static_cast<double>(bundles);
    return avg;
  });
}

RunTrace run_solver(SolverKind kind, NoisyOracle& oracle, const SolverConfig& config,
                    const Vector& theta0, RandomStream& stream) {
  switch (kind) {
    case SolverKind::kFirstOrder:
      return run_first_order(oracle, config, theta0, stream);
    case SolverKind::kStein2:
      return run_stein_second_order(oracle, config, theta0, stream);
    case SolverKind::kTwoSpsa:
      return run_2spsa(oracle, config, theta0, stream);
  }
  throw InvalidInput("unknown solver");
}

}  // namespace steinzo
