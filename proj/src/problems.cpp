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

#include "steinzo/problems.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace steinzo {

// ---------------------------------------------------------------------------
// Skewed quartic

SkewedQuartic::SkewedQuartic(std::size_t p, double noise_sigma2)
    : p_(p), noise_sigma2_(noise_sigma2) {
  if (p < 1) throw InvalidInput("skewed quartic needs p >= 1");
  if (!(noise_sigma2 >= 0.0)) throw InvalidInput("noise variance must be >= 0");
  const auto n = static_cast<Eigen::Index>(p);
  a_ = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) a_(i, j) = 1.0 / static_cast<double>(p);
  }
}

void SkewedQuartic::check(const Vector& theta) const {
  if (static_cast<std::size_t>(theta.size()) != p_) {
    throw InvalidInput("skewed quartic expects dimension " + std::to_string(p_));
  }
}

double SkewedQuartic::value(const Vector& theta) const {
  check(theta);
  const Vector v = a_ * theta;
  const auto va = v.array();
  return v.squaredNorm() + 0.1 * va.cube().sum() + 0.01 * va.square().square().sum();
}

Vector SkewedQuartic::gradient(const Vector& theta) const {
  check(theta);
  const Vector v = a_ * theta;
  const Vector inner = (0.3 * v.array().square() + 0.04 * v.array().cube()).matrix();
  return 2.0 * a_.transpose() * v + a_.transpose() * inner;
}

Matrix SkewedQuartic::hessian(const Vector& theta) const {
  check(theta);
  const Vector v = a_ * theta;
  const Vector diag = (2.0 + 0.6 * v.array() + 0.12 * v.array().square()).matrix();
  return a_.transpose() * diag.asDiagonal() * a_;
}

std::vector<Matrix> SkewedQuartic::third_derivative(const Vector& theta) const {
  check(theta);
  const Vector v = a_ * theta;
  const auto n = static_cast<Eigen::Index>(p_);
  // sum_m (0.6 + 0.24 v_m) a_m (x) a_m (x) a_m with a_m the m-th row of A.
  std::vector<Matrix> slices(p_, Matrix::Zero(n, n));
  for (Eigen::Index m = 0; m < n; ++m) {
    const double w = 0.6 + 0.24 * v[m];
    const Vector row = a_.row(m).transpose();
    const Matrix outer = row * row.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (row[i] != 0.0) slices[static_cast<std::size_t>(i)] += (w * row[i]) * outer;
    }
  }
  return slices;
}

double SkewedQuartic::noisy(const Vector& theta, RandomStream& noise) const {
  const double f = value(theta);
  if (noise_sigma2_ == 0.0) return f;
  return f + std::sqrt(noise_sigma2_) * noise.normal();
}

// ---------------------------------------------------------------------------
// Quadratic

QuadraticProblem::QuadraticProblem(Matrix h_true, double noise_sigma2,
                                   std::optional<Vector> theta_star)
    : h_(std::move(h_true)), noise_sigma2_(noise_sigma2) {
  if (h_.rows() < 1 || h_.rows() != h_.cols()) throw InvalidInput("H must be square");
  if ((h_ - h_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + h_.cwiseAbs().maxCoeff())) {
    throw InvalidInput("H must be symmetric");
  }
  if (Eigen::LLT<Matrix>(h_).info() != Eigen::Success) {
    throw InvalidInput("H must be positive definite");
  }
  if (!(noise_sigma2 >= 0.0)) throw InvalidInput("noise variance must be >= 0");
  theta_star_ = theta_star.value_or(Vector::Zero(h_.rows()));
  if (theta_star_.size() != h_.rows()) throw InvalidInput("theta* dimension mismatch");
}

double QuadraticProblem::value(const Vector& theta) const {
  if (theta.size() != h_.rows()) throw InvalidInput("quadratic dimension mismatch");
  const Vector e = theta - theta_star_;
  return 0.5 * e.dot(h_ * e);
}

Vector QuadraticProblem::gradient(const Vector& theta) const {
  if (theta.size() != h_.rows()) throw InvalidInput("quadratic dimension mismatch");
  return h_ * (theta - theta_star_);
}

double QuadraticProblem::noisy(const Vector& theta, RandomStream& noise) const {
  const double f = value(theta);
  if (noise_sigma2_ == 0.0) return f;
  return f + std::sqrt(noise_sigma2_) * noise.normal();
}

// ---------------------------------------------------------------------------
// LIBSVM

namespace {

double parse_double(const std::string& token, std::size_t line, const char* what) {
  if (token.empty()) throw ParseError(line, std::string("empty ") + what);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ParseError(line, std::string("bad ") + what + " '" + token + "'");
  }
  return v;
}

std::size_t parse_index(const std::string& token, std::size_t line) {
  if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos) {
    throw ParseError(line, "bad feature index '" + token + "'");
  }
  errno = 0;
  const unsigned long long v = std::strtoull(token.c_str(), nullptr, 10);
  if (errno == ERANGE) throw ParseError(line, "feature index out of range");
  if (v == 0) throw ParseError(line, "feature indices are 1-based");
  return static_cast<std::size_t>(v);
}

}  // namespace

Dataset load_libsvm(std::istream& in, std::optional<std::size_t> dimension) {
  Dataset data;
  std::size_t max_index = 0;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream tokens(raw);
    std::string token;
    if (!(tokens >> token)) continue;

    LabeledSample sample;
    const double label = parse_double(token, line_no, "label");
    if (label == 1.0) {
      sample.label = 1.0;
    } else if (label == -1.0 || label == 0.0) {
      sample.label = -1.0;
    } else {
      throw ParseError(line_no, "label must be +1, -1 or 0, got '" + token + "'");
    }

    std::size_t previous = 0;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) throw ParseError(line_no, "expected idx:val, got '" + token + "'");
      const std::size_t index = parse_index(token.substr(0, colon), line_no);
      const double value = parse_double(token.substr(colon + 1), line_no, "feature value");
      if (index <= previous) throw ParseError(line_no, "feature indices must strictly increase");
      if (dimension && index > *dimension) {
        throw ParseError(line_no, "feature index " + std::to_string(index) +
                                      " exceeds dimension " + std::to_string(*dimension));
      }
      previous = index;
      max_index = std::max(max_index, index);
      sample.features.emplace_back(index - 1, value);
    }
    data.samples.push_back(std::move(sample));
  }
  data.dimension = dimension.value_or(max_index);
  return data;
}

Dataset load_libsvm_file(const std::string& path, std::optional<std::size_t> dimension) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open LIBSVM file '" + path + "'");
  return load_libsvm(in, dimension);
}

void write_libsvm(std::ostream& out, const Dataset& data) {
  char buf[64];
  for (const auto& s : data.samples) {
    out << (s.label > 0 ? "+1" : "-1");
    for (const auto& [index, value] : s.features) {
      std::snprintf(buf, sizeof buf, "%.17g", value);
      out << ' ' << (index + 1) << ':' << buf;
    }
    out << '\n';
  }
}

Vector synthetic_class_direction(std::size_t d) {
  return Vector::Constant(static_cast<Eigen::Index>(d), 1.0 / std::sqrt(static_cast<double>(d)));
}

Dataset generate_synthetic_classification(std::size_t d, std::size_t n, double separation,
                                          RandomStream& stream) {
  if (d < 1 || n < 1) throw InvalidInput("synthetic data needs d >= 1 and I >= 1");
  const Vector mu = synthetic_class_direction(d);
  Dataset data;
  data.dimension = d;
  data.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    LabeledSample s;
    s.label = (i % 2 == 0) ? 1.0 : -1.0;
    s.features.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
      s.features.emplace_back(j, s.label * separation * mu[static_cast<Eigen::Index>(j)] +
                                     stream.normal());
    }
    data.samples.push_back(std::move(s));
  }
  return data;
}

// ---------------------------------------------------------------------------
// Corr-entropy classification

CorrEntropyProblem::CorrEntropyProblem(const Dataset& data, double kappa, std::size_t batch_size)
    : kappa_(kappa), batch_size_(batch_size) {
  if (data.dimension < 1) throw InvalidInput("dataset has no features");
  if (data.samples.empty()) throw InvalidInput("dataset has no samples");
  if (!(kappa > 0.0)) throw InvalidInput("kappa must be > 0");
  if (batch_size < 1 || batch_size > data.samples.size()) {
    throw InvalidInput("batch size must satisfy 1 <= J <= I");
  }
  const auto rows = static_cast<Eigen::Index>(data.samples.size());
  const auto cols = static_cast<Eigen::Index>(data.dimension);
  features_ = Matrix::Zero(rows, cols);
  labels_ = Vector(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& s = data.samples[static_cast<std::size_t>(i)];
    if (s.label != 1.0 && s.label != -1.0) throw InvalidInput("labels must be +1 or -1");
    labels_[i] = s.label;
    for (const auto& [index, value] : s.features) {
      if (index >= data.dimension) throw InvalidInput("feature index exceeds dataset dimension");
      features_(i, static_cast<Eigen::Index>(index)) = value;
    }
  }
}

void CorrEntropyProblem::check(const Vector& theta) const {
  if (theta.size() != features_.cols()) throw InvalidInput("corr-entropy dimension mismatch");
}

double CorrEntropyProblem::sample_loss(const Vector& theta, std::size_t i) const {
  const auto row = static_cast<Eigen::Index>(i);
  const double r = labels_[row] - features_.row(row).dot(theta);
  const double k2 = kappa_ * kappa_;
  return 0.5 * k2 * (1.0 - std::exp(-r * r / k2));
}

double CorrEntropyProblem::full_loss(const Vector& theta) const {
  check(theta);
  const double k2 = kappa_ * kappa_;
  const Vector r = labels_ - features_ * theta;
  return 0.5 * k2 * (1.0 - (-r.array().square() / k2).exp()).mean();
}

Vector CorrEntropyProblem::gradient(const Vector& theta) const {
  check(theta);
  const double k2 = kappa_ * kappa_;
  const Vector r = labels_ - features_ * theta;
  const Vector weights = (-(r.array() * (-r.array().square() / k2).exp())).matrix();
  return features_.transpose() * weights / static_cast<double>(sample_count());
}

Matrix CorrEntropyProblem::hessian(const Vector& theta) const {
  check(theta);
  const double k2 = kappa_ * kappa_;
  const Vector r = labels_ - features_ * theta;
  const auto r2 = r.array().square();
  const Vector weights = ((-r2 / k2).exp() * (1.0 - 2.0 * r2 / k2)).matrix();
  return features_.transpose() * weights.asDiagonal() * features_ /
         static_cast<double>(sample_count());
}

std::vector<std::size_t> CorrEntropyProblem::draw_batch(RandomStream& stream) const {
  // Floyd's algorithm: uniform J-subset of {0, ..., I-1}.
  const std::size_t n = sample_count();
  std::vector<std::size_t> batch;
  batch.reserve(batch_size_);
  std::unordered_set<std::size_t> chosen;
  for (std::size_t j = n - batch_size_; j < n; ++j) {
    const std::size_t t = stream.uniform_index(j + 1);
    const std::size_t pick = chosen.count(t) ? j : t;
    chosen.insert(pick);
    batch.push_back(pick);
  }
  return batch;
}

double CorrEntropyProblem::batch_loss(const Vector& theta,
                                      const std::vector<std::size_t>& batch) const {
  check(theta);
  if (batch.empty()) throw InvalidInput("empty batch");
  double sum = 0.0;
  for (std::size_t i : batch) {
    if (i >= sample_count()) throw InvalidInput("batch index out of range");
    sum += sample_loss(theta, i);
  }
  return sum / static_cast<double>(batch.size());
}

double CorrEntropyProblem::minibatch_oracle(const Vector& theta, RandomStream& stream) const {
  if (batch_size_ == sample_count()) return full_loss(theta);
  return batch_loss(theta, draw_batch(stream));
}

// ---------------------------------------------------------------------------
// Oracles

NoisyOracle make_oracle(const SkewedQuartic& problem, RandomStream noise) {
  auto shared = std::make_shared<const SkewedQuartic>(problem);
  return NoisyOracle(problem.dimension(),
                     [shared](const Vector& theta, RandomStream& s) { return shared->noisy(theta, s); },
                     noise);
}

NoisyOracle make_oracle(const QuadraticProblem& problem, RandomStream noise) {
  auto shared = std::make_shared<const QuadraticProblem>(problem);
  return NoisyOracle(problem.dimension(),
                     [shared](const Vector& theta, RandomStream& s) { return shared->noisy(theta, s); },
                     noise);
}

NoisyOracle make_oracle(const CorrEntropyProblem& problem, RandomStream noise) {
  auto shared = std::make_shared<const CorrEntropyProblem>(problem);
  return NoisyOracle(
      problem.dimension(),
      [shared](const Vector& theta, RandomStream& s) { return shared->minibatch_oracle(theta, s); },
      noise);
}

}  // namespace steinzo
