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

// Benchmark losses. Each problem exposes its exact loss and derivatives
// (ground truth for tests and trace metrics) plus a noisy observation that
// is the only thing solvers see, through make_oracle().

#ifndef STEINZO_PROBLEMS_HPP
#define STEINZO_PROBLEMS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "steinzo/core.hpp"

namespace steinzo {

/// f(theta) = |A theta|^2 + 0.1 sum (A theta)_i^3 + 0.01 sum (A theta)_i^4,
/// with p*A the upper-triangular all-ones matrix. Observations carry additive
/// N(0, noise_sigma2) noise. Minimum f = 0 at theta = 0.
class SkewedQuartic {
 public:
  explicit SkewedQuartic(std::size_t p, double noise_sigma2 = 0.1);

  std::size_t dimension() const { return p_; }
  double noise_sigma2() const { return noise_sigma2_; }
  const Matrix& a_matrix() const { return a_; }

  double value(const Vector& theta) const;
  Vector gradient(const Vector& theta) const;
  Matrix hessian(const Vector& theta) const;
  // Slices T[i](j, k) = d^3 f / d theta_i d theta_j d theta_k.
  std::vector<Matrix> third_derivative(const Vector& theta) const;
  double noisy(const Vector& theta, RandomStream& noise) const;

 private:
  void check(const Vector& theta) const;

  std::size_t p_;
  double noise_sigma2_;
  Matrix a_;
};

/// f(theta) = 1/2 (theta - theta*)' H (theta - theta*) plus N(0, sigma2) noise.
class QuadraticProblem {
 public:
  QuadraticProblem(Matrix h_true, double noise_sigma2, std::optional<Vector> theta_star = {});

  std::size_t dimension() const { return static_cast<std::size_t>(h_.rows()); }
  double noise_sigma2() const { return noise_sigma2_; }
  const Matrix& hessian() const { return h_; }
  const Vector& theta_star() const { return theta_star_; }

  double value(const Vector& theta) const;
  Vector gradient(const Vector& theta) const;
  double noisy(const Vector& theta, RandomStream& noise) const;

 private:
  Matrix h_;
  double noise_sigma2_;
  Vector theta_star_;
};

struct LabeledSample {
  double label = 1.0;
  // (zero-based feature index, value), strictly increasing in index.
  std::vector<std::pair<std::size_t, double>> features;
};

struct Dataset {
  std::size_t dimension = 0;
  std::vector<LabeledSample> samples;
};

/// Reads LIBSVM text ("label idx:val ..." with 1-based strictly increasing
/// indices). Labels must be +1/-1; 0 is accepted and mapped to -1. Blank
/// lines and '#' comments are skipped. Without a declared dimension the
/// largest index seen is used.
Dataset load_libsvm(std::istream& in, std::optional<std::size_t> dimension = {});
Dataset load_libsvm_file(const std::string& path, std::optional<std::size_t> dimension = {});
void write_libsvm(std::ostream& out, const Dataset& data);

/// Balanced two-class Gaussian data: x ~ N(label * separation * mu, I) with
/// mu = (1, ..., 1) / sqrt(d). Labels alternate +1, -1.
Dataset generate_synthetic_classification(std::size_t d, std::size_t n, double separation,
                                          RandomStream& stream);
Vector synthetic_class_direction(std::size_t d);

/// Corr-entropy induced classification loss
///   f(theta) = (1/I) sum kappa^2/2 (1 - exp(-(y_i - x_i' theta)^2 / kappa^2))
/// observed through mini-batches of J distinct samples.
class CorrEntropyProblem {
 public:
  CorrEntropyProblem(const Dataset& data, double kappa = 10.0, std::size_t batch_size = 10);

  std::size_t dimension() const { return static_cast<std::size_t>(features_.cols()); }
  std::size_t sample_count() const { return static_cast<std::size_t>(features_.rows()); }
  double kappa() const { return kappa_; }
  std::size_t batch_size() const { return batch_size_; }
  const Matrix& features() const { return features_; }
  const Vector& labels() const { return labels_; }

  double full_loss(const Vector& theta) const;
  Vector gradient(const Vector& theta) const;
  Matrix hessian(const Vector& theta) const;

  // J distinct indices, uniform over subsets.
  std::vector<std::size_t> draw_batch(RandomStream& stream) const;
  double batch_loss(const Vector& theta, const std::vector<std::size_t>& batch) const;
  double minibatch_oracle(const Vector& theta, RandomStream& stream) const;

 private:
  double sample_loss(const Vector& theta, std::size_t i) const;
  void check(const Vector& theta) const;

  Matrix features_;  // I x d, densified
  Vector labels_;
  double kappa_;
  std::size_t batch_size_;
};

NoisyOracle make_oracle(const SkewedQuartic& problem, RandomStream noise);
NoisyOracle make_oracle(const QuadraticProblem& problem, RandomStream noise);
NoisyOracle make_oracle(const CorrEntropyProblem& problem, RandomStream noise);

}  // namespace steinzo

#endif  // STEINZO_PROBLEMS_HPP
