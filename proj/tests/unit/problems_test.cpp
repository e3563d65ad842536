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
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "mc_stats.hpp"
#include "reference.hpp"
#include "steinzo/pdmap.hpp"
#include "steinzo/problems.hpp"

namespace steinzo {
namespace {

Vector random_point(RandomStream& s, int p, double scale) {
  Vector v(p);
  for (int i = 0; i < p; ++i) v[i] = scale * (2.0 * s.uniform() - 1.0);
  return v;
}

TEST(SkewedQuarticTest, AMatrixShape) {
  const SkewedQuartic f(4);
  const Matrix pa = 4.0 * f.a_matrix();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) EXPECT_EQ(pa(i, j), j >= i ? 1.0 : 0.0);
  }
}

TEST(SkewedQuarticTest, ValueExamples) {
  EXPECT_EQ(SkewedQuartic(7).value(Vector::Zero(7)), 0.0);
  EXPECT_NEAR(SkewedQuartic(1).value(Vector::Ones(1)), 1.11, 1e-14);
  EXPECT_NEAR(SkewedQuartic(2).value(Vector::Constant(2, 2.0)), 6.07, 1e-13);
}

TEST(SkewedQuarticTest, MatchesLoopReference) {
  RandomStream s(1, 0);
  for (int p : {1, 3, 8, 20}) {
    const SkewedQuartic f(p);
    for (int t = 0; t < 10; ++t) {
      const Vector x = random_point(s, p, 3.0);
      EXPECT_NEAR(f.value(x), testing::ref_skewed_quartic(x), 1e-12 * (1.0 + std::abs(f.value(x))));
    }
  }
}

TEST(SkewedQuarticTest, DerivativesAtZero) {
  const SkewedQuartic f(5);
  EXPECT_EQ(f.gradient(Vector::Zero(5)), Vector::Zero(5));
  const Matrix& a = f.a_matrix();
  EXPECT_EQ(f.hessian(Vector::Zero(5)), Matrix(a.transpose() * Matrix(2.0 * Matrix::Identity(5, 5)) * a));
  EXPECT_LT((f.hessian(Vector::Zero(5)) - 2.0 * a.transpose() * a).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SkewedQuarticTest, DerivativesMatchFiniteDifferences) {
  RandomStream s(2, 0);
  const SkewedQuartic f(5);
  const auto value = [](const Vector& x) { return testing::ref_skewed_quartic(x); };
  const auto grad = [&f](const Vector& x) { return f.gradient(x); };
  const auto hess_col = [&f](const Vector& x) { return Vector(f.hessian(x).reshaped()); };
  for (int t = 0; t < 20; ++t) {
    const Vector x = random_point(s, 5, 2.0);
    EXPECT_LT(testing::max_relative_error(f.gradient(x), testing::fd_gradient(value, x, 1e-6)), 1e-5);
    EXPECT_LT(testing::max_relative_error(f.hessian(x), testing::fd_jacobian(grad, x, 1e-6)), 1e-5);
    // Third derivative slices: d/dx_i of the Hessian.
    const Matrix jac = testing::fd_jacobian(hess_col, x, 1e-5);
    const auto third = f.third_derivative(x);
    for (int i = 0; i < 5; ++i) {
      const Matrix fd_slice = jac.col(i).reshaped(5, 5);
      EXPECT_LT(testing::max_relative_error(third[static_cast<std::size_t>(i)], fd_slice), 1e-5);
    }
  }
}

TEST(SkewedQuarticTest, HessianDominatesFiveQuartersAtA) {
  RandomStream s(3, 0);
  const SkewedQuartic f(8);
  const Matrix ata = f.a_matrix().transpose() * f.a_matrix();
  const double bound = 1.25 * min_eigenvalue(ata);
  for (int t = 0; t < 20; ++t) {
    const Vector x = random_point(s, 8, 10.0);
    EXPECT_GT(min_eigenvalue(f.hessian(x)), bound);
  }
}

TEST(SkewedQuarticTest, ConditionNumberAtOnesIsAbout778) {
  const SkewedQuartic f(20);
  const Matrix h = f.hessian(Vector::Ones(20));
  const double cond = spectral_norm(h) / min_eigenvalue(h);
  EXPECT_NEAR(cond, 778.0, 0.05 * 778.0);
  // The spectral norm is about 1.07, far from 778.
  EXPECT_LT(spectral_norm(h), 2.0);
}

TEST(SkewedQuarticTest, NoisyObservations) {
  const Vector x = Vector::LinSpaced(5, -1.0, 1.0);
  const SkewedQuartic quiet(5, 0.0);
  RandomStream s0(1, 0);
  EXPECT_EQ(quiet.noisy(x, s0), quiet.value(x));

  const SkewedQuartic f(5, 0.1);
  RandomStream s(4, 0);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = f.noisy(x, s);
    sum += y;
    sq += y * y;
  }
  const double mean = sum / n;
  const double var = (sq - n * mean * mean) / (n - 1);
  EXPECT_LT(std::abs(mean - f.value(x)), 4.0 * std::sqrt(0.1 / n));
  EXPECT_NEAR(var, 0.1, 0.005);
}

TEST(SkewedQuarticTest, RejectsBadInput) {
  EXPECT_THROW(SkewedQuartic(0), InvalidInput);
  EXPECT_THROW(SkewedQuartic(3, -0.1), InvalidInput);
  EXPECT_THROW(SkewedQuartic(3).value(Vector::Zero(2)), InvalidInput);
}

TEST(QuadraticProblemTest, ValueGradientAndValidation) {
  Matrix h(2, 2);
  h << 2.0, 0.5, 0.5, 1.0;
  Vector star(2);
  star << 1.0, -1.0;
  const QuadraticProblem q(h, 0.0, star);
  EXPECT_EQ(q.value(star), 0.0);
  const Vector x = Vector::Zero(2);
  EXPECT_NEAR(q.value(x), 0.5 * star.dot(h * star), 1e-15);
  EXPECT_LT((q.gradient(x) - h * (x - star)).norm(), 1e-15);
  const auto value = [&q](const Vector& t) { return q.value(t); };
  EXPECT_LT(testing::max_relative_error(q.gradient(Vector::Ones(2)), testing::fd_gradient(value, Vector::Ones(2))), 1e-5);

  Matrix indefinite(2, 2);
  indefinite << 1.0, 0.0, 0.0, -1.0;
  EXPECT_THROW(QuadraticProblem(indefinite, 0.1), InvalidInput);
  Matrix asym(2, 2);
  asym << 1.0, 0.3, 0.0, 1.0;
  EXPECT_THROW(QuadraticProblem(asym, 0.1), InvalidInput);
  EXPECT_THROW(QuadraticProblem(Matrix::Identity(2, 2), -1.0), InvalidInput);
}

// Loop-based corr-entropy loss for independent checks.
double ref_correntropy(const Dataset& d, const Vector& theta, double kappa) {
  double sum = 0.0;
  for (const auto& s : d.samples) {
    double dot = 0.0;
    for (const auto& [i, v] : s.features) dot += v * theta[static_cast<Eigen::Index>(i)];
    const double r = s.label - dot;
    sum += 0.5 * kappa * kappa * (1.0 - std::exp(-r * r / (kappa * kappa)));
  }
  return sum / static_cast<double>(d.samples.size());
}

Dataset small_dataset() {
  Dataset d;
  d.dimension = 3;
  d.samples = {{1.0, {{0, 1.0}, {2, 0.5}}},
               {-1.0, {{1, 2.0}}},
               {1.0, {{0, -0.5}, {1, 0.5}, {2, 1.5}}},
               {-1.0, {{0, 1.0}, {1, 1.0}}}};
  return d;
}

TEST(CorrEntropyTest, ZeroWhenResidualsVanish) {
  Dataset d;
  d.dimension = 2;
  d.samples = {{1.0, {{0, 1.0}}}, {-1.0, {{1, 1.0}}}, {1.0, {{0, 2.0}, {1, 1.0}}}};
  const CorrEntropyProblem prob(d, 10.0, 1);
  Vector theta(2);
  theta << 1.0, -1.0;
  EXPECT_EQ(prob.full_loss(theta), 0.0);
}

TEST(CorrEntropyTest, SingleSampleResidualKappa) {
  Dataset d;
  d.dimension = 1;
  d.samples = {{1.0, {{0, 1.0}}}};
  const double kappa = 3.0;
  const CorrEntropyProblem prob(d, kappa, 1);
  Vector theta(1);
  theta << 1.0 - kappa;  // r = y - x theta = kappa
  EXPECT_NEAR(prob.full_loss(theta), 0.5 * kappa * kappa * (1.0 - std::exp(-1.0)), 1e-14);
}

TEST(CorrEntropyTest, BoundedAndMatchesReference) {
  const Dataset d = small_dataset();
  const CorrEntropyProblem prob(d, 2.0, 2);
  RandomStream s(5, 0);
  for (int t = 0; t < 50; ++t) {
    const Vector x = random_point(s, 3, 20.0);
    const double v = prob.full_loss(x);
    EXPECT_LE(v, 0.5 * 4.0);
    EXPECT_NEAR(v, ref_correntropy(d, x, 2.0), 1e-12);
  }
}

TEST(CorrEntropyTest, DerivativesMatchFiniteDifferences) {
  const Dataset d = small_dataset();
  const CorrEntropyProblem prob(d, 2.0, 2);
  const auto value = [&](const Vector& x) { return ref_correntropy(d, x, 2.0); };
  const auto grad = [&prob](const Vector& x) { return prob.gradient(x); };
  RandomStream s(6, 0);
  for (int t = 0; t < 20; ++t) {
    const Vector x = random_point(s, 3, 1.5);
    EXPECT_LT(testing::max_relative_error(prob.gradient(x), testing::fd_gradient(value, x)), 1e-5);
    EXPECT_LT(testing::max_relative_error(prob.hessian(x), testing::fd_jacobian(grad, x)), 1e-5);
  }
}

TEST(CorrEntropyTest, FullBatchOracleIsExact) {
  const Dataset d = small_dataset();
  const CorrEntropyProblem prob(d, 2.0, 4);
  RandomStream s(7, 0);
  const Vector x = Vector::Constant(3, 0.3);
  EXPECT_EQ(prob.minibatch_oracle(x, s), prob.full_loss(x));
}

TEST(CorrEntropyTest, BatchesAreDistinctAndUnbiased) {
  RandomStream gen(8, 0);
  const Dataset d = generate_synthetic_classification(4, 50, 1.0, gen);
  const CorrEntropyProblem prob(d, 1.0, 10);
  RandomStream s(9, 0);
  for (int t = 0; t < 200; ++t) {
    const auto batch = prob.draw_batch(s);
    ASSERT_EQ(batch.size(), 10u);
    EXPECT_EQ(std::set<std::size_t>(batch.begin(), batch.end()).size(), 10u);
    for (auto i : batch) EXPECT_LT(i, 50u);
  }
  const Vector x = Vector::Constant(4, 0.2);
  testing::MeanAccumulator acc;
  for (int t = 0; t < 10000; ++t) acc.add(Matrix::Constant(1, 1, prob.minibatch_oracle(x, s)));
  EXPECT_LT(std::abs(acc.mean()(0, 0) - prob.full_loss(x)), 4.0 * acc.std_error()(0, 0));
}

TEST(CorrEntropyTest, BatchInclusionIsUniform) {
  RandomStream gen(10, 0);
  const Dataset d = generate_synthetic_classification(2, 20, 1.0, gen);
  const CorrEntropyProblem prob(d, 1.0, 5);
  RandomStream s(11, 0);
  std::vector<int> hits(20, 0);
  const int trials = 40000;
  for (int t = 0; t < trials; ++t) {
    for (auto i : prob.draw_batch(s)) hits[i]++;
  }
  // Each index is included with probability J / I = 1/4.
  const double p = 0.25, se = std::sqrt(p * (1 - p) / trials);
  for (int h : hits) EXPECT_LT(std::abs(double(h) / trials - p), 4.5 * se);
}

TEST(CorrEntropyTest, RejectsBadConfiguration) {
  const Dataset d = small_dataset();
  EXPECT_THROW(CorrEntropyProblem(d, 0.0, 2), InvalidInput);
  EXPECT_THROW(CorrEntropyProblem(d, 1.0, 0), InvalidInput);
  EXPECT_THROW(CorrEntropyProblem(d, 1.0, 5), InvalidInput);
  Dataset bad = d;
  bad.samples[0].label = 0.5;
  EXPECT_THROW(CorrEntropyProblem(bad, 1.0, 2), InvalidInput);
}

TEST(LibsvmTest, ParsesExampleLine) {
  std::istringstream in("+1 3:0.5 7:1.0\n");
  const Dataset d = load_libsvm(in, 8);
  ASSERT_EQ(d.samples.size(), 1u);
  EXPECT_EQ(d.dimension, 8u);
  EXPECT_EQ(d.samples[0].label, 1.0);
  ASSERT_EQ(d.samples[0].features.size(), 2u);
  EXPECT_EQ(d.samples[0].features[0], (std::pair<std::size_t, double>{2, 0.5}));
  EXPECT_EQ(d.samples[0].features[1], (std::pair<std::size_t, double>{6, 1.0}));
  const CorrEntropyProblem prob(d, 10.0, 1);
  Vector dense(8);
  dense << 0, 0, 0.5, 0, 0, 0, 1.0, 0;
  EXPECT_EQ(Vector(prob.features().row(0).transpose()), dense);
}

TEST(LibsvmTest, EmptyInputAndComments) {
  std::istringstream empty("");
  EXPECT_EQ(load_libsvm(empty).samples.size(), 0u);
  std::istringstream commented("# header\n\n-1 1:2 # trailing\n0 2:1\n1\n");
  const Dataset d = load_libsvm(commented);
  ASSERT_EQ(d.samples.size(), 3u);
  EXPECT_EQ(d.samples[0].label, -1.0);
  EXPECT_EQ(d.samples[1].label, -1.0);  // 0 maps to -1
  EXPECT_EQ(d.samples[2].label, 1.0);
  EXPECT_TRUE(d.samples[2].features.empty());
  EXPECT_EQ(d.dimension, 2u);
}

void expect_parse_error(const std::string& text, std::size_t line, std::optional<std::size_t> dim = {}) {
  std::istringstream in(text);
  try {
    load_libsvm(in, dim);
    ADD_FAILURE() << "no error for: " << text;
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), line) << text;
  }
}

TEST(LibsvmTest, Rejections) {
  expect_parse_error("-1 2:1 2:1\n", 1);
  expect_parse_error("+1 1:1\n-1 3:1 2:1\n", 2);
  expect_parse_error("+1 1:1\n\n2 1:1\n", 3);       // bad label
  expect_parse_error("+1 0:1\n", 1);                // indices are 1-based
  expect_parse_error("+1 1:abc\n", 1);
  expect_parse_error("+1 1-2\n", 1);
  expect_parse_error("x 1:2\n", 1);
  expect_parse_error("+1 1:1 9:1\n", 1, 8);         // beyond declared dimension
  expect_parse_error("+1 -3:1\n", 1);
}

TEST(LibsvmTest, RoundTrip) {
  RandomStream s(12, 0);
  Dataset d;
  d.dimension = 6;
  for (int i = 0; i < 40; ++i) {
    LabeledSample sample;
    sample.label = (i % 3 == 0) ? 1.0 : -1.0;
    for (std::size_t j = 0; j < 6; ++j) {
      if (s.uniform() < 0.5) sample.features.emplace_back(j, s.normal() * 1e3 / 7.0);
    }
    d.samples.push_back(sample);
  }
  std::stringstream buf;
  write_libsvm(buf, d);
  const Dataset back = load_libsvm(buf, 6);
  ASSERT_EQ(back.samples.size(), d.samples.size());
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    EXPECT_EQ(back.samples[i].label, d.samples[i].label);
    EXPECT_EQ(back.samples[i].features, d.samples[i].features);
  }
}

TEST(SyntheticDataTest, BalancedAndSeparable) {
  RandomStream s(13, 0);
  const Dataset d = generate_synthetic_classification(10, 1000, 5.0, s);
  int pos = 0, neg = 0;
  for (const auto& x : d.samples) (x.label > 0 ? pos : neg)++;
  EXPECT_LE(std::abs(pos - neg), 1);
  RandomStream s_odd(14, 0);
  const Dataset odd = generate_synthetic_classification(3, 7, 5.0, s_odd);
  int p2 = 0;
  for (const auto& x : odd.samples) p2 += x.label > 0;
  EXPECT_LE(std::abs(p2 - (7 - p2)), 1);

  // theta = mu / separation maps class means onto the labels.
  const Vector theta = synthetic_class_direction(10) / 5.0;
  EXPECT_LT(ref_correntropy(d, theta, 10.0), 0.25 * 50.0);
  EXPECT_NEAR(synthetic_class_direction(10).norm(), 1.0, 1e-15);
}

TEST(SyntheticDataTest, ZeroSeparationGivesIdenticalClasses) {
  RandomStream s(15, 0);
  const Dataset d = generate_synthetic_classification(3, 20000, 0.0, s);
  testing::MeanAccumulator pos, neg;
  for (const auto& x : d.samples) {
    Vector v = Vector::Zero(3);
    for (const auto& [i, val] : x.features) v[static_cast<Eigen::Index>(i)] = val;
    (x.label > 0 ? pos : neg).add(v);
  }
  for (int j = 0; j < 3; ++j) {
    const double gap = pos.mean()(j, 0) - neg.mean()(j, 0);
    const double se = std::hypot(pos.std_error()(j, 0), neg.std_error()(j, 0));
    EXPECT_LT(std::abs(gap), 4.0 * se);
    EXPECT_NEAR(pos.variance()(j, 0), neg.variance()(j, 0), 0.1);
  }
}

}  // namespace
}  // namespace steinzo
