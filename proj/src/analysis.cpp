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

#include "steinzo/analysis.hpp"

#include <cmath>
#include <string>

namespace steinzo {

std::vector<double> normalized_distance(const RunTrace& trace, double f_opt, double f_init) {
  if (!(f_init > f_opt)) throw InvalidInput("normalized distance needs f_init > f_opt");
  std::vector<double> out;
  out.reserve(trace.records.size());
  const double span = f_init - f_opt;
  for (const auto& r : trace.records) out.push_back((r.loss - f_opt) / span);
  return out;
}

AggregateCurve aggregate_replicates(std::span<const RunTrace> traces, const MetricSelector& metric) {
  if (traces.empty()) throw InvalidInput("no traces to aggregate");
  const std::size_t len = traces.front().records.size();
  for (const auto& t : traces) {
    if (t.records.size() != len) throw InvalidInput("traces have different lengths");
    for (std::size_t i = 0; i < len; ++i) {
      if (t.records[i].k != traces.front().records[i].k) {
        throw InvalidInput("traces do not share an iteration grid");
      }
    }
  }
  AggregateCurve curve;
  curve.n_replicates = traces.size();
  const double n = static_cast<double>(traces.size());
  for (std::size_t i = 0; i < len; ++i) {
    double sum = 0.0;
    for (const auto& t : traces) sum += metric(t.records[i]);
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& t : traces) {
      const double d = metric(t.records[i]) - mean;
      ss += d * d;
    }
    curve.x.push_back(static_cast<double>(traces.front().records[i].k));
    curve.mean.push_back(mean);
    curve.std_error.push_back(traces.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0);
  }
  return curve;
}

AggregateCurve rms_error_curve(std::span<const RunTrace> traces, const Vector& theta_star) {
  AggregateCurve sq = aggregate_replicates(
      traces, [&](const TraceRecord& r) { return (r.theta - theta_star).squaredNorm(); });
  for (std::size_t i = 0; i < sq.mean.size(); ++i) {
    const double rms = std::sqrt(sq.mean[i]);
    sq.std_error[i] = rms > 0.0 ? sq.std_error[i] / (2.0 * rms) : 0.0;
    sq.mean[i] = rms;
  }
  return sq;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidInput("need at least two paired points");
  double sx = 0.0, sy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidInput("log-log fit needs positive values");
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (sxx == 0.0) throw InvalidInput("log-log fit needs distinct x values");
  return sxy / sxx;
}

double fit_rate_exponent(const AggregateCurve& curve, double k_min, double k_max) {
  if (!(k_min < k_max)) throw InvalidInput("fit window needs k_min < k_max");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < curve.x.size(); ++i) {
    if (curve.x[i] < k_min || curve.x[i] > k_max) continue;
    if (!(curve.mean[i] > 0.0)) throw InvalidInput("rate fit needs positive values");
    xs.push_back(curve.x[i]);
    ys.push_back(curve.mean[i]);
  }
  if (xs.size() < 2) throw InvalidInput("fit window holds fewer than two grid points");
  return log_log_slope(xs, ys);
}

double rate_tau(const GainSchedule& s) { return s.alpha() - 2.0 * s.gamma(); }

double rate_tau_plus(const GainSchedule& s) { return s.alpha() == 1.0 ? rate_tau(s) : 0.0; }

void check_normality_conditions(const GainSchedule& s, const Matrix& h) {
  if (s.alpha() > 6.0 * s.gamma()) {
    throw InvalidInput("normality condition violated: alpha <= 6 gamma");
  }
  const double lmin = min_eigenvalue(h);
  if (!(lmin > 0.0)) throw InvalidInput("normality condition violated: H(theta*) must be PD");
  if (!(s.a() > rate_tau_plus(s) / (2.0 * lmin))) {
    throw InvalidInput("normality condition violated: a > tau_+ / (2 lambda_min(H))");
  }
}

Matrix predicted_limit_covariance(const GainSchedule& s, const Matrix& h, double noise_variance,
                                  std::uint64_t bundles_per_iter) {
  if (bundles_per_iter < 1) throw InvalidInput("bundles_per_iter must be >= 1");
  const double a = s.a(), c = s.c();
  const double denom = 2.0 * c * c * (2.0 * a - rate_tau_plus(s));
  if (!(denom > 0.0)) throw InvalidInput("limit covariance needs 2a > tau_+");
  const Matrix h_inv = h.inverse();
  const Matrix out = (a * a * noise_variance / denom / static_cast<double>(bundles_per_iter)) *
                     (h_inv * h_inv);
  return 0.5 * (out + out.transpose());
}

Vector gaussian_third_moment_contraction(const std::vector<Matrix>& third) {
  const auto p = static_cast<Eigen::Index>(third.size());
  Vector out = Vector::Zero(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const Matrix& slice = third[static_cast<std::size_t>(i)];
    if (slice.rows() != p || slice.cols() != p) throw InvalidInput("third derivative shape");
    out += 3.0 * slice.row(i).transpose();
  }
  return out;
}

Vector predicted_limit_mean(const GainSchedule& s, const Matrix& h,
                            const std::vector<Matrix>& third_derivative) {
  const double a = s.a(), c = s.c();
  const double denom = 3.0 * rate_tau_plus(s) - 6.0 * a;
  if (denom == 0.0) throw InvalidInput("limit mean undefined for 6a = 3 tau_+");
  const Vector m = gaussian_third_moment_contraction(third_derivative);
  return (a * c * c / denom) * h.llt().solve(m);
}

NormalityDiagnostic normality_check_quadratic(const QuadraticProblem& problem,
                                              const GainSchedule& schedule, std::uint64_t k_final,
                                              std::size_t n_replicates, RandomStream& stream,
                                              const NormalityOptions& options) {
  if (n_replicates < 1) throw InvalidInput("need at least one replicate");
  if (k_final < 1) throw InvalidInput("need K >= 1");
  const Matrix& h = problem.hessian();
  check_normality_conditions(schedule, h);
  if (options.queries_per_iter % 3 != 0 || options.queries_per_iter == 0) {
    throw InvalidInput("queries_per_iter must be a positive multiple of 3");
  }
  const auto p = static_cast<Eigen::Index>(problem.dimension());

  NormalityDiagnostic diag;
  diag.tau = rate_tau(schedule);
  diag.tau_plus = rate_tau_plus(schedule);
  diag.predicted_mean = Vector::Zero(p);  // f''' vanishes on a quadratic
  diag.predicted_cov = predicted_limit_covariance(schedule, h, problem.noise_sigma2(),
                                                  options.queries_per_iter / 3);

  SolverConfig config;
  config.schedule = schedule;
  config.pd_map = options.pd_map;
  config.queries_per_iter = options.queries_per_iter;
  config.max_iterations = k_final;
  const Vector theta0 = options.theta0.value_or(problem.theta_star() + Vector::Ones(p));

  std::vector<std::uint64_t> seeds(n_replicates);
  for (auto& s : seeds) s = stream.next_u64();
  std::vector<std::optional<Vector>> finals(n_replicates);
  parallel_for(n_replicates, options.jobs, [&](std::size_t r) {
    NoisyOracle oracle = make_oracle(problem, RandomStream(seeds[r], 0));
    RandomStream perturb(seeds[r], 1);
    try {
      RunTrace t = run_stein_second_order(oracle, config, theta0, perturb);
      finals[r] = t.records.back().theta;
    } catch (const DivergenceError&) {
      finals[r].reset();
    }
  });

  const double scale = std::pow(static_cast<double>(k_final), diag.tau / 2.0);
  for (const auto& f : finals) {
    if (!f) {
      ++diag.n_diverged;
      continue;
    }
    diag.scaled_errors.push_back(scale * (*f - problem.theta_star()));
  }
  diag.n_replicates = diag.scaled_errors.size();
  diag.empirical_mean = Vector::Zero(p);
  diag.empirical_cov = Matrix::Zero(p, p);
  if (diag.scaled_errors.empty()) {
    diag.degenerate_covariance = true;
    return diag;
  }
  for (const auto& e : diag.scaled_errors) diag.empirical_mean += e;
  diag.empirical_mean /= static_cast<double>(diag.n_replicates);
  if (diag.n_replicates < 2) {
    diag.degenerate_covariance = true;
    return diag;
  }
  for (const auto& e : diag.scaled_errors) {
    const Vector d = e - diag.empirical_mean;
    diag.empirical_cov += d * d.transpose();
  }
  diag.empirical_cov /= static_cast<double>(diag.n_replicates - 1);
  return diag;
}

}  // namespace steinzo
