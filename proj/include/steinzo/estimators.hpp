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

// Gaussian-perturbation gradient and Hessian estimators built on Stein's
// identity. With u ~ N(0, I), y+ = y(theta + c u), y- = y(theta - c u) and
// y = y(theta):
//
//   gradient   one point       y+ u / c
//              forward         (y+ - y) u / c
//              central         (y+ - y-) u / (2c)
//   Hessian    one point       y+ (u u' - I) / c^2
//              forward         (y+ - y) (u u' - I) / c^2
//              two-sided       (y+ + y-) (u u' - I) / (2c^2)
//              three point     (y+ + y- - 2y) (u u' - I) / (2c^2)
//
// Each is unbiased for the corresponding derivative of the Gaussian-smoothed
// loss f_c(theta) = E f(theta + c u). Every query is a fresh oracle call.

#ifndef STEINZO_ESTIMATORS_HPP
#define STEINZO_ESTIMATORS_HPP

#include <cstdint>
#include <span>

#include "steinzo/core.hpp"

namespace steinzo {

enum class GradientEstimator { kOnePoint, kTwoPointForward, kTwoPointCentral };

enum class HessianEstimator { kOnePoint, kTwoForward, kTwoCentral, kThreePoint };

int query_cost(GradientEstimator kind);
int query_cost(HessianEstimator kind);

struct EstimateBundle {
  Vector gradient;
  Matrix hessian;
  std::uint64_t queries_used = 0;
};

/// s * (u u' - I), written so the result is symmetric bit for bit.
Matrix stein_hessian_direction(double s, const Vector& u);

Vector estimate_gradient(GradientEstimator kind, NoisyOracle& oracle, const Vector& theta,
                         double c, const Vector& u);

Matrix estimate_hessian(HessianEstimator kind, NoisyOracle& oracle, const Vector& theta, double c,
                        const Vector& u);

/// Central gradient and three-point Hessian from one query triple
/// (y+, y-, y), issued in that order.
EstimateBundle estimate_bundle_shared(NoisyOracle& oracle, const Vector& theta, double c,
                                      const Vector& u);

EstimateBundle average_bundles(std::span<const EstimateBundle> bundles);

/// Monte Carlo value of the smoothed loss E f(theta + c u). Test utility.
double smoothed_loss_mc(const LossFunction& f, const Vector& theta, double c,
                        std::uint64_t n_samples, RandomStream& stream);

}  // namespace steinzo

#endif  // STEINZO_ESTIMATORS_HPP
