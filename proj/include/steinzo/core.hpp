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

#ifndef STEINZO_CORE_HPP
#define STEINZO_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>

#include <Eigen/Dense>

namespace steinzo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Deterministic loss f(theta), used for metrics and test oracles only.
using LossFunction = std::function<double(const Vector&)>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Throws InvalidInput unless `theta` is nonempty with finite entries.
void check_parameter_vector(const Vector& theta);

/// Seeded random stream. Every variate is a pure function of
/// (seed, substream_id, draw index); different substreams are independent.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t substream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t substream_id() const { return substream_id_; }

  double normal();
  double uniform();  // [0, 1)
  double rademacher();
  std::uint64_t next_u64();
  // Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n);

  // A child stream independent of this one; does not advance this stream.
  RandomStream split(std::uint64_t child_id) const;

 private:
  std::uint64_t seed_;
  std::uint64_t substream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

Vector sample_standard_normal_vector(RandomStream& stream, std::size_t p);
Vector sample_rademacher_vector(RandomStream& stream, std::size_t p);

/// Noisy zeroth-order loss y(theta, omega). The noise generator is handed the
/// oracle's own stream, so identical seeds replay identical observations.
using NoisyLoss = std::function<double(const Vector&, RandomStream&)>;

/// The only view of a problem that solvers get. Two independent noise
/// channels: `query` feeds the estimators, `query_aux` feeds diagnostics such
/// as blocking so they never shift the main noise sequence. Both count
/// against the same ledger.
class NoisyOracle {
 public:
  NoisyOracle(std::size_t dimension, NoisyLoss loss, RandomStream noise);

  double query(const Vector& theta);
  double query_aux(const Vector& theta);

  std::size_t dimension() const { return dimension_; }
  std::uint64_t query_count() const { return query_count_; }

 private:
  double evaluate(const Vector& theta, RandomStream& noise);

  std::size_t dimension_;
  NoisyLoss loss_;
  RandomStream noise_;
  RandomStream aux_noise_;
  std::uint64_t query_count_ = 0;
};

struct HarmonicWeights {};

// w_k = w0 / (k+1)^omega
struct PolynomialWeights {
  double w0 = 1.0;
  double omega = 1.0;
};

using WeightMode = std::variant<HarmonicWeights, PolynomialWeights>;

struct Gains {
  double a;
  double c;
  double w;
};

/// a_k = a / (k+1+A)^alpha, c_k = c / (k+1)^gamma, and the Hessian
/// averaging weight w_k. Validated on construction.
class GainSchedule {
 public:
  GainSchedule(double a, double stability, double alpha, double c, double gamma,
               WeightMode weights = HarmonicWeights{});

  double a() const { return a_; }
  double stability() const { return stability_; }
  double alpha() const { return alpha_; }
  double c() const { return c_; }
  double gamma() const { return gamma_; }
  const WeightMode& weights() const { return weights_; }
  bool harmonic() const { return std::holds_alternative<HarmonicWeights>(weights_); }

 private:
  double a_;
  double stability_;
  double alpha_;
  double c_;
  double gamma_;
  WeightMode weights_;
};

Gains gain_at(const GainSchedule& schedule, std::uint64_t k);

/// Runs fn(0..n-1) on up to `jobs` threads. Exceptions from fn are rethrown
/// after all workers have joined (the first one wins).
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace steinzo

#endif  // STEINZO_CORE_HPP
