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

#include "steinzo/core.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace steinzo {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t substream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(substream),
                    static_cast<std::uint32_t>(substream >> 32),
                    0x5e1dU};
  return std::mt19937_64(seq);
}

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

void check_parameter_vector(const Vector& theta) {
  if (theta.size() < 1) throw InvalidInput("parameter vector must have dimension >= 1");
  if (!theta.allFinite()) throw InvalidInput("parameter vector has non-finite entries");
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t substream_id)
    : seed_(seed), substream_id_(substream_id), engine_(make_engine(seed, substream_id)) {}

double RandomStream::normal() { return normal_(engine_); }

double RandomStream::uniform() { return uniform_(engine_); }

double RandomStream::rademacher() { return (engine_() >> 63) ? 1.0 : -1.0; }

std::uint64_t RandomStream::next_u64() { return engine_(); }

std::size_t RandomStream::uniform_index(std::size_t n) {
  if (n == 0) throw InvalidInput("uniform_index over an empty range");
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

RandomStream RandomStream::split(std::uint64_t child_id) const {
  return RandomStream(mix(seed_ ^ mix(substream_id_)), mix(child_id + 0x2545f4914f6cdd1dULL));
}

Vector sample_standard_normal_vector(RandomStream& stream, std::size_t p) {
  if (p < 1) throw InvalidInput("dimension must be >= 1");
  Vector u(static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = stream.normal();
  return u;
}

Vector sample_rademacher_vector(RandomStream& stream, std::size_t p) {
  if (p < 1) throw InvalidInput("dimension must be >= 1");
  Vector d(static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = stream.rademacher();
  return d;
}

NoisyOracle::NoisyOracle(std::size_t dimension, NoisyLoss loss, RandomStream noise)
    : dimension_(dimension),
      loss_(std::move(loss)),
      noise_(noise),
      aux_noise_(noise.split(1)) {
  if (dimension_ < 1) throw InvalidInput("oracle dimension must be >= 1");
  if (!loss_) throw InvalidInput("oracle needs a loss callable");
}

double NoisyOracle::evaluate(const Vector& theta, RandomStream& noise) {
  if (static_cast<std::size_t>(theta.size()) != dimension_) {
    throw InvalidInput("oracle queried with dimension " + std::to_string(theta.size()) +
                       ", expected " + std::to_string(dimension_));
  }
  check_parameter_vector(theta);
  ++query_count_;
  return loss_(theta, noise);
}

double NoisyOracle::query(const Vector& theta) { return evaluate(theta, noise_); }

double NoisyOracle::query_aux(const Vector& theta) { return evaluate(theta, aux_noise_); }

GainSchedule::GainSchedule(double a, double stability, double alpha, double c, double gamma,
                           WeightMode weights)
    : a_(a), stability_(stability), alpha_(alpha), c_(c), gamma_(gamma), weights_(weights) {
  if (!(a > 0.0) || !std::isfinite(a)) throw InvalidInput("gain a must be positive");
  if (!(stability >= 0.0) || !std::isfinite(stability)) {
    throw InvalidInput("stability offset A must be nonnegative");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidInput("alpha must lie in (0, 1]");
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidInput("gain c must be positive");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidInput("gamma must be positive");
  if (const auto* poly = std::get_if<PolynomialWeights>(&weights_)) {
    if (!(poly->w0 > 0.0 && poly->w0 <= 1.0)) throw InvalidInput("w0 must lie in (0, 1]");
    // sum_k (w_k / c_k^2)^2 < inf
    if (!(2.0 * poly->omega - 4.0 * gamma > 1.0)) {
      throw InvalidInput("polynomial weights need 2*omega - 4*gamma > 1");
    }
  }
}

Gains gain_at(const GainSchedule& s, std::uint64_t k) {
  const double kp1 = static_cast<double>(k) + 1.0;
  Gains g{};
  g.a = s.a() / std::pow(kp1 + s.stability(), s.alpha());
  g.c = s.c() / std::pow(kp1, s.gamma());
  if (const auto* poly = std::get_if<PolynomialWeights>(&s.weights())) {
    g.w = poly->w0 / std::pow(kp1, poly->omega);
  } else {
    g.w = 1.0 / kp1;
  }
  return g;
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (jobs <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(jobs, n);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace steinzo
