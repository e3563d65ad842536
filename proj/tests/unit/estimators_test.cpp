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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "mc_stats.hpp"
#include "reference.hpp"
#include "steinzo/estimators.hpp"
#include "steinzo/problems.hpp"

namespace steinzo {
namespace {

using testing::max_standardized_gap;
using testing::MeanAccumulator;

NoisyOracle deterministic(std::size_t p, LossFunction f) {
  return NoisyOracle(p, [f](const Vector& t, RandomStream&) { return f(t); }, RandomStream(0, 0));
}

NoisyOracle quadratic_oracle(const Matrix& h) {
  return deterministic(h.rows(), [h](const Vector& t) { return 0.5 * t.dot(h * t); });
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TEST(GradientEstimatorTest, LinearCentralIsExact) {
  const Vector b = vec({1.0, 0.0});
  NoisyOracle o = deterministic(2, [b](const Vector& t) { return b.dot(t); });
  const Vector g = estimate_gradient(GradientEstimator::kTwoPointCentral, o, vec({0.3, -2.0}), 0.1,
                                     vec({1.0, 1.0}));
  EXPECT_NEAR(g[0], 1.0, 1e-12);
  EXPECT_NEAR(g[1], 1.0, 1e-12);
}

TEST(GradientEstimatorTest, ZeroLossOnePoint) {
  NoisyOracle o = deterministic(3, [](const Vector&) { return 0.0; });
  const Vector g = estimate_gradient(GradientEstimator::kOnePoint, o, Vector::Ones(3), 0.5,
                                     vec({0.2, -1.0, 3.0}));
  EXPECT_EQ(g, Vector::Zero(3));
}

TEST(GradientEstimatorTest, QueryCosts) {
  NoisyOracle o = deterministic(2, [](const Vector& t) { return t.squaredNorm(); });
  const Vector u = vec({0.5, 1.0});
  for (auto kind : {GradientEstimator::kOnePoint, GradientEstimator::kTwoPointForward,
                    GradientEstimator::kTwoPointCentral}) {
    const auto before = o.query_count();
    estimate_gradient(kind, o, Vector::Zero(2), 0.1, u);
    EXPECT_EQ(o.query_count() - before, static_cast<std::uint64_t>(query_cost(kind)));
  }
  for (auto kind : {HessianEstimator::kOnePoint, HessianEstimator::kTwoForward,
                    HessianEstimator::kTwoCentral, HessianEstimator::kThreePoint}) {
    const auto before = o.query_count();
    estimate_hessian(kind, o, Vector::Zero(2), 0.1, u);
    EXPECT_EQ(o.query_count() - before, static_cast<std::uint64_t>(query_cost(kind)));
  }
}

TEST(GradientEstimatorTest, RejectsBadInputs) {
  NoisyOracle o = deterministic(2, [](const Vector& t) { return t.sum(); });
  EXPECT_THROW(estimate_gradient(GradientEstimator::kOnePoint, o, Vector::Zero(3), 0.1, Vector::Ones(3)),
               InvalidInput);
  EXPECT_THROW(estimate_gradient(GradientEstimator::kOnePoint, o, Vector::Zero(2), 0.0, Vector::Ones(2)),
               InvalidInput);
  EXPECT_THROW(estimate_hessian(HessianEstimator::kThreePoint, o, Vector::Zero(2), -1.0, Vector::Ones(2)),
               InvalidInput);
}

// Analytic check uses a finite-difference gradient of an independent loop implementation.
TEST(GradientEstimatorTest, CentralMeanMatchesSkewedQuarticGradient) {
  const SkewedQuartic f(5, 0.0);
  NoisyOracle o = make_oracle(f, RandomStream(1, 0));
  const Vector theta = vec({0.4, -0.3, 0.2, 0.1, -0.5});
  const Vector truth = testing::fd_gradient(testing::ref_skewed_quartic, theta, 1e-5);
  RandomStream s(11, 0);
  MeanAccumulator acc;
  for (int i = 0; i < 1000000; ++i) {
    const Vector u = sample_standard_normal_vector(s, 5);
    acc.add(estimate_gradient(GradientEstimator::kTwoPointCentral, o, theta, 0.05, u));
  }
  EXPECT_LT(max_standardized_gap(acc, truth), 4.0);
}

// Smoothing check: every gradient variant is unbiased for the gradient of
// the smoothed loss f_c. The reference differentiates smoothed_loss_mc with
// common random numbers, batched to get an error bar.
TEST(GradientEstimatorTest, VariantsUnbiasedForSmoothedLoss) {
  const SkewedQuartic f(3, 0.0);
  const LossFunction loss = [&f](const Vector& t) { return f.value(t); };
  const Vector theta = vec({0.9, -0.6, 1.2});
  const double c = 0.5, h = 1e-4;

  MeanAccumulator fd;
  for (int batch = 0; batch < 20; ++batch) {
    Vector g(3);
    for (int i = 0; i < 3; ++i) {
      Vector tp = theta, tm = theta;
      tp[i] += h;
      tm[i] -= h;
      RandomStream sp(100 + batch, 0), sm(100 + batch, 0);
      g[i] = (smoothed_loss_mc(loss, tp, c, 20000, sp) - smoothed_loss_mc(loss, tm, c, 20000, sm)) / (2 * h);
    }
    fd.add(g);
  }

  for (auto kind : {GradientEstimator::kOnePoint, GradientEstimator::kTwoPointForward,
                    GradientEstimator::kTwoPointCentral}) {
    NoisyOracle o = make_oracle(f, RandomStream(2, 0));
    RandomStream s(7, static_cast<std::uint64_t>(kind));
    MeanAccumulator acc;
    for (int i = 0; i < 400000; ++i) {
      acc.add(estimate_gradient(kind, o, theta, c, sample_standard_normal_vector(s, 3)));
    }
    const Vector diff = acc.mean() - fd.mean();
    const Vector se = (acc.std_error().array().square() + fd.std_error().array().square()).sqrt();
    for (int i = 0; i < 3; ++i) {
      EXPECT_LT(std::abs(diff[i]), 4.0 * se[i]) << "variant " << static_cast<int>(kind) << " coord " << i;
    }
  }
}

TEST(HessianEstimatorTest, ThreePointQuadraticExample) {
  Matrix h = Vector(vec({1.0, 2.0})).asDiagonal();
  NoisyOracle o = quadratic_oracle(h);
  for (double c : {0.5, 0.1, 2.0}) {
    const Matrix got = estimate_hessian(HessianEstimator::kThreePoint, o, vec({0.7, -1.1}), c,
                                        vec({1.0, 1.0}));
    Matrix want(2, 2);
    want << 0.0, 1.5, 1.5, 0.0;
    EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-9) << "c=" << c;
  }
}

TEST(HessianEstimatorTest, ZeroLossThreePoint) {
  NoisyOracle o = deterministic(3, [](const Vector&) { return 0.0; });
  const Matrix got = estimate_hessian(HessianEstimator::kThreePoint, o, Vector::Ones(3), 0.3,
                                      vec({1.0, -2.0, 0.5}));
  EXPECT_EQ(got, Matrix::Zero(3, 3));
}

TEST(HessianEstimatorTest, SymmetricAndRankOneStructure) {
  const SkewedQuartic f(6, 0.1);
  NoisyOracle o = make_oracle(f, RandomStream(3, 0));
  RandomStream s(4, 0);
  for (auto kind : {HessianEstimator::kOnePoint, HessianEstimator::kTwoForward,
                    HessianEstimator::kTwoCentral, HessianEstimator::kThreePoint}) {
    for (int rep = 0; rep < 50; ++rep) {
      const Vector u = sample_standard_normal_vector(s, 6);
      const Matrix est = estimate_hessian(kind, o, Vector::Ones(6), 0.3, u);
      ASSERT_TRUE((est.array() == est.transpose().array()).all());
      // H + sI = s u u^T, with s read off any off-diagonal entry.
      const double sc = est(0, 1) / (u[0] * u[1]);
      const Matrix resid = est + sc * Matrix::Identity(6, 6) - sc * u * u.transpose();
      EXPECT_LT(resid.cwiseAbs().maxCoeff(), 1e-9 * (1.0 + std::abs(sc) * u.squaredNorm()));
    }
  }
}

TEST(HessianEstimatorTest, ThreePointUnbiasedOnQuadratic) {
  Matrix h = Vector(vec({1.0, 2.0})).asDiagonal();
  NoisyOracle o = quadratic_oracle(h);
  RandomStream s(21, 0);
  MeanAccumulator acc;
  const Vector theta = vec({0.5, -0.25});
  for (int i = 0; i < 1000000; ++i) {
    acc.add(estimate_hessian(HessianEstimator::kThreePoint, o, theta, 0.1,
                             sample_standard_normal_vector(s, 2)));
  }
  EXPECT_LT(max_standardized_gap(acc, h), 4.0);
}

TEST(HessianEstimatorTest, AllVariantsUnbiasedOnQuadratic) {
  Matrix h(3, 3);
  h << 2.0, 0.5, 0.0, 0.5, 1.0, -0.3, 0.0, -0.3, 1.5;
  NoisyOracle o = quadratic_oracle(h);
  const Vector theta = vec({0.2, -0.1, 0.3});
  for (auto kind : {HessianEstimator::kOnePoint, HessianEstimator::kTwoForward,
                    HessianEstimator::kTwoCentral, HessianEstimator::kThreePoint}) {
    RandomStream s(31, static_cast<std::uint64_t>(kind));
    MeanAccumulator acc;
    for (int i = 0; i < 400000; ++i) {
      acc.add(estimate_hessian(kind, o, theta, 0.7, sample_standard_normal_vector(s, 3)));
    }
    EXPECT_LT(max_standardized_gap(acc, h), 4.0) << "variant " << static_cast<int>(kind);
  }
}

TEST(BundleTest, IdentityQuadraticExample) {
  NoisyOracle o = quadratic_oracle(Matrix::Identity(2, 2));
  const EstimateBundle b = estimate_bundle_shared(o, Vector::Zero(2), 0.5, vec({1.0, 0.0}));
  EXPECT_EQ(b.gradient, Vector::Zero(2));
  Matrix want(2, 2);
  want << 0.0, 0.0, 0.0, -0.5;
  EXPECT_EQ(b.hessian, want);
  EXPECT_EQ(b.queries_used, 3u);
  EXPECT_EQ(o.query_count(), 3u);
}

TEST(BundleTest, MatchesSeparateEstimatorsOnDeterministicLoss) {
  const SkewedQuartic f(4, 0.0);
  NoisyOracle o = make_oracle(f, RandomStream(1, 0));
  const Vector theta = vec({1.0, -2.0, 0.5, 0.0});
  const Vector u = vec({0.3, 1.2, -0.7, 0.1});
  for (int i = 0; i < 10; ++i) {
    const auto before = o.query_count();
    const EstimateBundle b = estimate_bundle_shared(o, theta, 0.2, u);
    EXPECT_EQ(o.query_count() - before, 3u);
    EXPECT_EQ(b.gradient, estimate_gradient(GradientEstimator::kTwoPointCentral, o, theta, 0.2, u));
    EXPECT_EQ(b.hessian, estimate_hessian(HessianEstimator::kThreePoint, o, theta, 0.2, u));
  }
}

TEST(BundleTest, AverageExamples) {
  EstimateBundle a{vec({1.0, 0.0}), Matrix::Identity(2, 2), 3};
  EstimateBundle b{vec({0.0, 1.0}), Matrix::Zero(2, 2), 3};
  const std::vector<EstimateBundle> one{a};
  const EstimateBundle same = average_bundles(one);
  EXPECT_EQ(same.gradient, a.gradient);
  EXPECT_EQ(same.hessian, a.hessian);
  EXPECT_EQ(same.queries_used, 3u);
  const std::vector<EstimateBundle> two{a, b};
  const EstimateBundle avg = average_bundles(two);
  EXPECT_EQ(avg.gradient, vec({0.5, 0.5}));
  EXPECT_EQ(avg.hessian, 0.5 * Matrix::Identity(2, 2));
  EXPECT_EQ(avg.queries_used, 6u);
  EXPECT_THROW(average_bundles(std::vector<EstimateBundle>{}), InvalidInput);
}

TEST(BundleTest, AveragingFourReducesVarianceFourfold) {
  const QuadraticProblem q(Matrix(Vector(vec({1.0, 3.0})).asDiagonal()), 0.1);
  NoisyOracle o = make_oracle(q, RandomStream(5, 0));
  RandomStream s(6, 0);
  const Vector theta = vec({0.5, 0.5});
  MeanAccumulator single, averaged;
  for (int t = 0; t < 10000; ++t) {
    std::vector<EstimateBundle> batch;
    for (int m = 0; m < 4; ++m) {
      batch.push_back(estimate_bundle_shared(o, theta, 0.5, sample_standard_normal_vector(s, 2)));
    }
    single.add(batch.front().hessian);
    averaged.add(average_bundles(batch).hessian);
  }
  const Matrix ratio = single.variance().cwiseQuotient(averaged.variance());
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(ratio(i, j), 4.0, 0.8) << i << "," << j;
  }
}

TEST(SmoothedLossTest, LinearIsUnchanged) {
  const Vector b = vec({1.0, -2.0, 0.5});
  const LossFunction f = [b](const Vector& t) { return b.dot(t); };
  const Vector theta = vec({0.1, 0.2, 0.3});
  RandomStream s(1, 0);
  const int n = 100000;
  const double got = smoothed_loss_mc(f, theta, 0.5, n, s);
  const double se = 0.5 * b.norm() / std::sqrt(double(n));
  EXPECT_LT(std::abs(got - f(theta)), 4.0 * se);
}

TEST(SmoothedLossTest, SquaredNormGainsHalfCSquaredP) {
  const int p = 4;
  const LossFunction f = [](const Vector& t) { return 0.5 * t.squaredNorm(); };
  const Vector theta = Vector::LinSpaced(p, -1.0, 1.0);
  const double c = 0.7;
  const int n = 100000;
  // Var f(theta + c u) = c^2 |theta|^2 + c^4 p / 2.
  const double se = std::sqrt(c * c * theta.squaredNorm() + std::pow(c, 4) * p / 2.0) / std::sqrt(double(n));
  RandomStream s(2, 0);
  const double got = smoothed_loss_mc(f, theta, c, n, s);
  EXPECT_LT(std::abs(got - (f(theta) + 0.5 * c * c * p)), 4.0 * se);
}

TEST(SmoothedLossTest, SmallCRecoversLoss) {
  const SkewedQuartic q(3, 0.0);
  const LossFunction f = [&q](const Vector& t) { return q.value(t); };
  const Vector theta = vec({1.0, 2.0, -1.0});
  RandomStream s(3, 0);
  EXPECT_NEAR(smoothed_loss_mc(f, theta, 1e-9, 100, s), f(theta), 1e-9);
  EXPECT_THROW(smoothed_loss_mc(f, theta, 0.1, 0, s), InvalidInput);
}

// Bias shrinks as c^2. The control variates u u^T g and
// (1/2) u^T H u (u u^T - I) have means g and H, so the accumulated quantity
// still estimates E[estimate] - truth, with far less spread.
TEST(EstimatorOrderTest, BiasSlopeIsTwo) {
  const SkewedQuartic f(5, 0.0);
  NoisyOracle o = make_oracle(f, RandomStream(1, 0));
  const Vector theta = vec({0.5, -0.4, 0.3, 0.8, -0.2});
  const Vector g = f.gradient(theta);
  const Matrix h = f.hessian(theta);
  std::vector<double> cs{0.2, 0.1, 0.05, 0.025}, gb, hb;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    RandomStream s(40 + i, 0);
    MeanAccumulator ag, ah;
    for (int n = 0; n < 200000; ++n) {
      const Vector u = sample_standard_normal_vector(s, 5);
      const EstimateBundle b = estimate_bundle_shared(o, theta, cs[i], u);
      ag.add(b.gradient - u * u.dot(g));
      ah.add(b.hessian - stein_hessian_direction(0.5 * u.dot(h * u), u));
    }
    gb.push_back(ag.mean().norm());
    hb.push_back(ah.mean().norm());
  }
  auto slope = [&](const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      mx += std::log(cs[i]);
      my += std::log(y[i]);
    }
    mx /= y.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      sxy += (std::log(cs[i]) - mx) * (std::log(y[i]) - my);
      sxx += (std::log(cs[i]) - mx) * (std::log(cs[i]) - mx);
    }
    return sxy / sxx;
  };
  EXPECT_NEAR(slope(gb), 2.0, 0.3);
  EXPECT_NEAR(slope(hb), 2.0, 0.3);
}

}  // namespace
}  // namespace steinzo
