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

// Dense operator algebra on truncated bosonic Fock spaces.
//
// A single mode is represented on the number states |0>..|dim-1>; a two-mode
// space is the Kronecker product of two such spaces with the first mode as
// the slow (outer) index. hbar = 1 throughout.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "oscillab/error.hpp"

namespace oscillab {

template <typename Scalar>
using ComplexMatrix =
    Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

using MatrixXc = ComplexMatrix<double>;
using VectorXc = ComplexVector<double>;

class HilbertSpec {
 public:
  static HilbertSpec single(int dim) {
    if (dim < 1) {
      throw InvalidDimension("Fock truncation must be >= 1, got " +
                             std::to_string(dim));
    }
    return HilbertSpec({dim, 1}, 1);
  }

  static HilbertSpec two_mode(int dim1, int dim2) {
    if (dim1 < 1 || dim2 < 1) {
      throw InvalidDimension("two-mode truncations must be >= 1, got " +
                             std::to_string(dim1) + "x" +
                             std::to_string(dim2));
    }
    return HilbertSpec({dim1, dim2}, 2);
  }

  int modes() const noexcept { return modes_; }
  int dim(int mode) const { return dims_.at(static_cast<std::size_t>(mode)); }
  Eigen::Index total() const noexcept {
    return static_cast<Eigen::Index>(dims_[0]) * dims_[1];
  }

  bool operator==(const HilbertSpec&) const = default;

  std::string describe() const {
    if (modes_ == 1) return "single-mode(" + std::to_string(dims_[0]) + ")";
    return "two-mode(" + std::to_string(dims_[0]) + "x" +
           std::to_string(dims_[1]) + ")";
  }

 private:
  HilbertSpec(std::array<int, 2> dims, int modes) : dims_(dims), modes_(modes) {}

  std::array<int, 2> dims_;
  int modes_;
};

inline void require_same_space(const HilbertSpec& a, const HilbertSpec& b,
                               const char* where) {
  if (!(a == b)) {
    throw DimensionMismatch(std::string(where) + ": " + a.describe() +
                            " vs " + b.describe());
  }
}

/// Operator on a declared Hilbert space. Immutable after construction.
template <typename Scalar>
class OperatorT {
 public:
  using Complex = std::complex<Scalar>;
  using Matrix = ComplexMatrix<Scalar>;

  OperatorT(HilbertSpec space, Matrix m)
      : space_(space), m_(std::move(m)) {
    if (m_.rows() != space_.total() || m_.cols() != space_.total()) {
      throw DimensionMismatch("operator matrix is " +
                              std::to_string(m_.rows()) + "x" +
                              std::to_string(m_.cols()) + " but space " +
                              space_.describe() + " has dimension " +
                              std::to_string(space_.total()));
    }
  }

  const HilbertSpec& space() const noexcept { return space_; }
  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index size() const noexcept { return m_.rows(); }

  OperatorT adjoint() const { return OperatorT(space_, m_.adjoint()); }

  friend OperatorT operator+(const OperatorT& a, const OperatorT& b) {
    require_same_space(a.space_, b.space_, "operator +");
    return OperatorT(a.space_, a.m_ + b.m_);
  }
  friend OperatorT operator-(const OperatorT& a, const OperatorT& b) {
    require_same_space(a.space_, b.space_, "operator -");
    return OperatorT(a.space_, a.m_ - b.m_);
  }
  friend OperatorT operator*(const OperatorT& a, const OperatorT& b) {
    require_same_space(a.space_, b.space_, "operator *");
    return OperatorT(a.space_, a.m_ * b.m_);
  }
  friend OperatorT operator*(Complex s, const OperatorT& a) {
    return OperatorT(a.space_, s * a.m_);
  }
  friend OperatorT operator*(const OperatorT& a, Complex s) { return s * a; }
  friend OperatorT operator-(const OperatorT& a) {
    return OperatorT(a.space_, -a.m_);
  }

 private:
  HilbertSpec space_;
  Matrix m_;
};

/// Density matrix. Not validated on construction; see validate_state().
template <typename Scalar>
class DensityMatrixT {
 public:
  using Matrix = ComplexMatrix<Scalar>;

  DensityMatrixT(HilbertSpec space, Matrix m)
      : space_(space), m_(std::move(m)) {
    if (m_.rows() != space_.total() || m_.cols() != space_.total()) {
      throw DimensionMismatch("density matrix shape does not match " +
                              space_.describe());
    }
  }

  const HilbertSpec& space() const noexcept { return space_; }
  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index size() const noexcept { return m_.rows(); }

 private:
  HilbertSpec space_;
  Matrix m_;
};

using Operator = OperatorT<double>;
using DensityMatrix = DensityMatrixT<double>;

template <typename Scalar = double>
OperatorT<Scalar> identity(const HilbertSpec& space) {
  return OperatorT<Scalar>(
      space, ComplexMatrix<Scalar>::Identity(space.total(), space.total()));
}

/// <n-1|a|n> = sqrt(n).
template <typename Scalar = double>
OperatorT<Scalar> annihilation(int dim) {
  const auto space = HilbertSpec::single(dim);
  ComplexMatrix<Scalar> m = ComplexMatrix<Scalar>::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) m(n - 1, n) = std::sqrt(Scalar(n));
  return OperatorT<Scalar>(space, std::move(m));
}

template <typename Scalar = double>
OperatorT<Scalar> creation(int dim) {
  return annihilation<Scalar>(dim).adjoint();
}

template <typename Scalar = double>
OperatorT<Scalar> number(int dim) {
  const auto space = HilbertSpec::single(dim);
  ComplexMatrix<Scalar> m = ComplexMatrix<Scalar>::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) m(n, n) = Scalar(n);
  return OperatorT<Scalar>(space, std::move(m));
}

/// Position and momentum, x = (a + a^dag)/sqrt2 and p = i(a^dag - a)/sqrt2.
template <typename Scalar = double>
std::pair<OperatorT<Scalar>, OperatorT<Scalar>> quadratures(int dim) {
  using C = std::complex<Scalar>;
  const auto a = annihilation<Scalar>(dim);
  const auto ad = a.adjoint();
  const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
  return {C(r) * (a + ad), C(0, r) * (ad - a)};
}

template <typename Scalar>
OperatorT<Scalar> commutator(const OperatorT<Scalar>& a,
                             const OperatorT<Scalar>& b) {
  return a * b - b * a;
}

template <typename Scalar>
OperatorT<Scalar> anticommutator(const OperatorT<Scalar>& a,
                                 const OperatorT<Scalar>& b) {
  return a * b + b * a;
}

/// A (x) B on the joint space, mode-1 factor first.
template <typename Scalar>
OperatorT<Scalar> embed_two_mode(const OperatorT<Scalar>& a,
                                 const OperatorT<Scalar>& b) {
  if (a.space().modes() != 1 || b.space().modes() != 1) {
    throw DimensionMismatch("embed_two_mode needs single-mode factors, got " +
                            a.space().describe() + " and " +
                            b.space().describe());
  }
  const auto space = HilbertSpec::two_mode(a.space().dim(0), b.space().dim(0));
  ComplexMatrix<Scalar> m = Eigen::kroneckerProduct(a.matrix(), b.matrix());
  return OperatorT<Scalar>(space, std::move(m));
}

/// tr(A rho).
template <typename Scalar>
std::complex<Scalar> expectation(const OperatorT<Scalar>& a,
                                 const DensityMatrixT<Scalar>& rho) {
  require_same_space(a.space(), rho.space(), "expectation");
  // tr(A rho) = sum_ij A_ij rho_ji
  return (a.matrix().transpose().cwiseProduct(rho.matrix())).sum();
}

template <typename Scalar = double>
ComplexVector<Scalar> fock_ket(int dim, int n) {
  HilbertSpec::single(dim);
  if (n < 0 || n >= dim) {
    throw InvalidDimension("number state |" + std::to_string(n) +
                           "> outside truncation " + std::to_string(dim));
  }
  ComplexVector<Scalar> v = ComplexVector<Scalar>::Zero(dim);
  v(n) = Scalar(1);
  return v;
}

/// Truncated coherent state, renormalized after truncation.
template <typename Scalar = double>
ComplexVector<Scalar> coherent_ket(int dim, std::complex<Scalar> alpha) {
  HilbertSpec::single(dim);
  ComplexVector<Scalar> v(dim);
  v(0) = Scalar(1);
  for (int n = 1; n < dim; ++n) v(n) = v(n - 1) * alpha / std::sqrt(Scalar(n));
  v /= v.norm();
  return v;
}

template <typename Scalar>
DensityMatrixT<Scalar> pure_state(const HilbertSpec& space,
                                  const ComplexVector<Scalar>& ket) {
  if (ket.size() != space.total()) {
    throw DimensionMismatch("ket length does not match " + space.describe());
  }
  return DensityMatrixT<Scalar>(space, ket * ket.adjoint());
}

template <typename Scalar = double>
DensityMatrixT<Scalar> fock_density(int dim, int n) {
  return pure_state(HilbertSpec::single(dim), fock_ket<Scalar>(dim, n));
}

template <typename Scalar = double>
DensityMatrixT<Scalar> coherent_density(int dim, std::complex<Scalar> alpha) {
  return pure_state(HilbertSpec::single(dim), coherent_ket<Scalar>(dim, alpha));
}

/// Basis indices whose per-mode occupation stays below dim - drop, i.e. the
/// subspace on which truncated ladder algebra is exact.
inline std::vector<Eigen::Index> interior_indices(const HilbertSpec& space,
                                                  int drop) {
  std::vector<Eigen::Index> idx;
  if (space.modes() == 1) {
    for (int n = 0; n < space.dim(0) - drop; ++n) idx.push_back(n);
    return idx;
  }
  const int d2 = space.dim(1);
  for (int i = 0; i < space.dim(0) - drop; ++i) {
    for (int j = 0; j < d2 - drop; ++j) {
      idx.push_back(static_cast<Eigen::Index>(i) * d2 + j);
    }
  }
  return idx;
}

/// Largest |m_ij| with both i and j in the interior subspace.
template <typename Derived>
typename Eigen::NumTraits<typename Derived::Scalar>::Real interior_max_abs(
    const Eigen::MatrixBase<Derived>& m, const HilbertSpec& space, int drop) {
  using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  const auto idx = interior_indices(space, drop);
  Real worst(0);
  for (auto i : idx) {
    for (auto j : idx) worst = std::max<Real>(worst, std::abs(m(i, j)));
  }
  return worst;
}

template <typename Derived>
typename Eigen::NumTraits<typename Derived::Scalar>::Real max_abs(
    const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0;
  return m.cwiseAbs().maxCoeff();
}

}  // namespace oscillab
