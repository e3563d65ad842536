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

#include "steinzo/estimators.hpp"

#include <cmath>
#include <string>

namespace steinzo {

namespace {

void check_inputs(const NoisyOracle& oracle, const Vector& theta, double c, const Vector& u) {
  const auto p = static_cast<Eigen::Index>(oracle.dimension());
  if (theta.size() != p || u.size() != p) {
    throw InvalidInput("estimator dimension mismatch: oracle p=" + std::to_string(p) +
                       ", theta " + std::to_string(theta.size()) + ", u " +
                       std::to_string(u.size()));
  }
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidInput("differencing magnitude must be > 0");
}

}  // namespace

int query_cost(GradientEstimator kind) {
  return kind == GradientEstimator::kOnePoint ? 1 : 2;
}

int query_cost(HessianEstimator kind) {
  switch (kind) {
    case HessianEstimator::kOnePoint:
      return 1;
    case HessianEstimator::kTwoForward:
    case HessianEstimator::kTwoCentral:
      return 2;
    case HessianEstimator::kThreePoint:
      return 3;
  }
  return 0;
}

Matrix stein_hessian_direction(double s, const Vector& u) {
  const Eigen::Index p = u.size();
  Matrix h(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    h(j, j) = s * (u[j] * u[j] - 1.0);
    for (Eigen::Index i = j + 1; i < p; ++i) {
      const double v = s * (u[i] * u[j]);
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return h;
}

Vector estimate_gradient(GradientEstimator kind, NoisyOracle& oracle, const Vector& theta,
                         double c, const Vector& u) {
  check_inputs(oracle, theta, c, u);
  const double y_plus = oracle.query(theta + c * u);
  switch (kind) {
    case GradientEstimator::kOnePoint:
      return (y_plus / c) * u;
    case GradientEstimator::kTwoPointForward: {
      const double y = oracle.query(theta);
      return ((y_plus - y) / c) * u;
    }
    case GradientEstimator::kTwoPointCentral: {
      const double y_minus = oracle.query(theta - c * u);
      return ((y_plus - y_minus) / (2.0 * c)) * u;
    }
  }
  throw InvalidInput("unknown gradient estimator");
}

Matrix estimate_hessian(HessianEstimator kind, NoisyOracle& oracle, const Vector& theta, double c,
                        const Vector& u) {
  check_inputs(oracle, theta, c, u);
  const double c2 = c * c;
  const double y_plus = oracle.query(theta + c * u);
  double s = 0.0;
  switch (kind) {
    case HessianEstimator::kOnePoint:
      s = y_plus / c2;
      break;
    case HessianEstimator::kTwoForward: {
      const double y = oracle.query(theta);
      s = (y_plus - y) / c2;
      break;
    }
    case HessianEstimator::kTwoCentral: {
      const double y_minus = oracle.query(theta - c * u);
      s = (y_plus + y_minus) / (2.0 * c2);
      break;
    }
    case HessianEstimator::kThreePoint: {
      const double y_minus = oracle.query(theta - c * u);
      const double y = oracle.query(theta);
      s = (y_plus + y_minus - 2.0 * y) / (2.0 * c2);
      break;
    }
  }
  return stein_hessian_direction(s, u);
}

EstimateBundle estimate_bundle_shared(NoisyOracle& oracle, const Vector& theta, double c,
                                      const Vector& u) {
  check_inputs(oracle, theta, c, u);
  const double y_plus = oracle.query(theta + c * u);
  const double y_minus = oracle.query(theta - c * u);
  const double y = oracle.query(theta);
  EstimateBundle out;
  out.gradient = ((y_plus - y_minus) / (2.0 * c)) * u;
  out.hessian = stein_hessian_direction((y_plus + y_minus - 2.0 * y) / (2.0 * c * c), u);
  out.queries_used = 3;
  return out;
}

EstimateBundle average_bundles(std::span<const EstimateBundle> bundles) {
  if (bundles.empty()) throw InvalidInput("cannot average an empty list of estimates");
  if (bundles.size() == 1) return bundles.front();
  const Eigen::Index p = bundles.front().gradient.size();
  EstimateBundle out;
  out.gradient = Vector::Zero(p);
  out.hessian = Matrix::Zero(p, p);
  for (const auto& b : bundles) {
    if (b.gradient.size() != p || b.hessian.rows() != p || b.hessian.cols() != p) {
      throw InvalidInput("estimate bundles have inconsistent dimensions");
    }
    out.gradient += b.gradient;
    out.hessian += b.hessian;
    out.queries_used += b.queries_used;
  }
  const double m = static_cast<double>(bundles.size());
  out.gradient /= m;
  out.hessian /= m;
  return out;
}

double smoothed_loss_mc(const LossFunction& f, const Vector& theta, double c,
                        std::uint64_t n_samples, RandomStream& stream) {
  if (n_samples < 1) throw InvalidInput("n_samples must be >= 1");
  const auto p = static_cast<std::size_t>(theta.size());
  double sum = 0.0;
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    sum += f(theta + c * sample_standard_normal_vector(stream, p));
  }
  return sum / static_cast<double>(n_samples);
}

}  // namespace steinzo
