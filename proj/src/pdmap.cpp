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

#include "steinzo/pdmap.hpp"

#include <algorithm>
#include <cmath>

namespace steinzo {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_symmetric(const Matrix& h) {
  if (h.rows() != h.cols() || h.rows() < 1) throw InvalidInput("matrix must be square");
  if (!h.allFinite()) throw NumericalError("matrix has non-finite entries");
  const double scale = 1.0 + h.cwiseAbs().maxCoeff();
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidInput("matrix is not symmetric");
  }
}

Eigen::SelfAdjointEigenSolver<Matrix> decompose(const Matrix& h, int options) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, options);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
  return es;
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double sqrt_epsilon(const SqrtMap& s, std::uint64_t k) {
  return s.epsilon0 / std::pow(static_cast<double>(k) + 1.0, s.decay);
}

double clamp_floor(const EigenClamp& c, const Matrix& h) {
  return c.relative ? c.delta_floor * (1.0 + spectral_norm(h)) : c.delta_floor;
}

}  // namespace

PdMapKind default_pd_map() { return EigenClamp{1e-8, true}; }

void validate_pd_map(const PdMapKind& kind) {
  std::visit(overloaded{
                 [](const DampShift& d) {
                   if (!(d.delta_floor > 0.0)) throw InvalidInput("delta_floor must be > 0");
                 },
                 [](const EigenClamp& c) {
                   if (!(c.delta_floor > 0.0)) throw InvalidInput("delta_floor must be > 0");
                 },
                 [](const SqrtMap& s) {
                   if (!(s.epsilon0 > 0.0)) throw InvalidInput("sqrt map epsilon0 must be > 0");
                   if (!(s.decay > 0.0)) throw InvalidInput("sqrt map epsilon must decay");
                 },
             },
             kind);
}

double min_eigenvalue(const Matrix& symmetric) {
  return decompose(symmetric, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

double spectral_norm(const Matrix& symmetric) {
  const Vector ev = decompose(symmetric, Eigen::EigenvaluesOnly).eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

double pd_floor(const PdMapKind& kind, const Matrix& h, std::uint64_t k) {
  return std::visit(overloaded{
                        [](const DampShift& d) { return d.delta_floor; },
                        [&](const EigenClamp& c) { return clamp_floor(c, h); },
                        [&](const SqrtMap& s) { return std::sqrt(sqrt_epsilon(s, k)); },
                    },
                    kind);
}

Matrix apply_pd_map(const PdMapKind& kind, const Matrix& h, std::uint64_t k) {
  validate_pd_map(kind);
  check_symmetric(h);
  return std::visit(
      overloaded{
          [&](const DampShift& d) -> Matrix {
            const double lmin = min_eigenvalue(h);
            if (lmin >= d.delta_floor) return h;
            Matrix out = h;
            out.diagonal().array() += d.delta_floor - lmin;
            return out;
          },
          [&](const EigenClamp& c) -> Matrix {
            const auto es = decompose(h, Eigen::ComputeEigenvectors);
            const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
            const double floor = c.relative ? c.delta_floor * (1.0 + norm) : c.delta_floor;
            if (es.eigenvalues()(0) >= floor) return h;
            const Vector clamped = es.eigenvalues().cwiseMax(floor);
            const Matrix& q = es.eigenvectors();
            return symmetrized(q * clamped.asDiagonal() * q.transpose());
          },
          [&](const SqrtMap& s) -> Matrix {
            Matrix gram = h.transpose() * h;
            gram.diagonal().array() += sqrt_epsilon(s, k);
            const auto es = decompose(symmetrized(gram), Eigen::ComputeEigenvectors);
            const Vector roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
            const Matrix& q = es.eigenvectors();
            return symmetrized(q * roots.asDiagonal() * q.transpose());
          },
      },
      kind);
}

Vector solve_preconditioned(const Matrix& hpd, const Vector& g) {
  if (hpd.rows() != hpd.cols() || hpd.rows() != g.size()) {
    throw InvalidInput("preconditioner and gradient dimensions differ");
  }
  Eigen::LLT<Matrix> llt(hpd);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("Cholesky factorization failed; delta_floor too small for conditioning");
  }
  Vector d = llt.solve(g);
  if (!d.allFinite()) throw NumericalError("preconditioned solve produced non-finite values");
  return d;
}

}  // namespace steinzo
