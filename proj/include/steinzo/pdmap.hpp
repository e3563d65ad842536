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

#ifndef STEINZO_PDMAP_HPP
#define STEINZO_PDMAP_HPP

#include <cstdint>
#include <variant>

#include "steinzo/core.hpp"

namespace steinzo {

// H + eps I with eps = max(0, floor - lambda_min(H)).
struct DampShift {
  double delta_floor = 1e-8;
};

// Q max(Lambda, floor) Q'. With `relative`, the floor is
// delta_floor * (1 + ||H||_2).
struct EigenClamp {
  double delta_floor = 1e-8;
  bool relative = false;
};

// (H'H + eps_k I)^{1/2}, eps_k = epsilon0 / (k+1)^decay.
struct SqrtMap {
  double epsilon0 = 1.0;
  double decay = 1.0;
};

using PdMapKind = std::variant<DampShift, EigenClamp, SqrtMap>;

/// Relative eigenvalue clamp at 1e-8 (1 + ||H||).
PdMapKind default_pd_map();

/// Throws InvalidInput on bad parameters.
void validate_pd_map(const PdMapKind& kind);

/// Smallest eigenvalue the mapped matrix is guaranteed to have.
double pd_floor(const PdMapKind& kind, const Matrix& h, std::uint64_t k);

/// Maps a symmetric matrix onto a symmetric positive-definite one.
/// Shift and clamp leave H untouched once lambda_min(H) >= floor.
Matrix apply_pd_map(const PdMapKind& kind, const Matrix& h, std::uint64_t k);

/// Solves hpd * d = g through a Cholesky factorization.
Vector solve_preconditioned(const Matrix& hpd, const Vector& g);

double min_eigenvalue(const Matrix& symmetric);
double spectral_norm(const Matrix& symmetric);

}  // namespace steinzo

#endif  // STEINZO_PDMAP_HPP
