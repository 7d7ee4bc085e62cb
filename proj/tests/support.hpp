// Copyright 2026 The Oscillab Authors
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

#pragma once

#include <random>

#include "oscillab/fockspace.hpp"

namespace oscillab::testing {

inline MatrixXc random_matrix(Eigen::Index rows, Eigen::Index cols,
                              std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  MatrixXc m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = {n(rng), n(rng)};
  }
  return m;
}

inline MatrixXc random_hermitian(Eigen::Index dim, std::mt19937_64& rng) {
  const MatrixXc m = random_matrix(dim, dim, rng);
  return 0.5 * (m + m.adjoint());
}

/// Random full-rank density matrix G G^dag / tr.
inline DensityMatrix random_density(const HilbertSpec& space,
                                    std::mt19937_64& rng) {
  const MatrixXc g = random_matrix(space.total(), space.total(), rng);
  MatrixXc rho = g * g.adjoint();
  rho /= rho.trace();
  return DensityMatrix(space, rho);
}

}  // namespace oscillab::testing
