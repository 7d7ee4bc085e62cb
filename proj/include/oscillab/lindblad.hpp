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

// Lindblad master equations on truncated Fock spaces.
//
//   d rho/dt = -i[H, rho] + sum_k rate_k D[c_k] rho,
//   D[c] rho = c rho c^dag - (c^dag c rho + rho c^dag c)/2.
//
// Internally the generator is evaluated through the effective non-Hermitian
// Hamiltonian K = H - (i/2) sum_k rate_k c_k^dag c_k, which gives
//   L(rho) = -i(K rho - rho K^dag) + sum_k rate_k c_k rho c_k^dag.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "oscillab/error.hpp"
#include "oscillab/fockspace.hpp"

namespace oscillab {

template <typename Scalar>
struct DissipatorT {
  Scalar rate;
  OperatorT<Scalar> jump;
};

template <typename Scalar>
class LindbladModelT {
 public:
  using Complex = std::complex<Scalar>;
  using Matrix = ComplexMatrix<Scalar>;

  LindbladModelT(OperatorT<Scalar> hamiltonian,
                 std::vector<DissipatorT<Scalar>> dissipators,
                 Scalar hermiticity_tolerance = Scalar(1e-10))
      : h_(std::move(hamiltonian)), dissipators_(std::move(dissipators)) {
    if (max_abs(h_.matrix() - h_.matrix().adjoint()) > hermiticity_tolerance) {
      throw NonHermitian("Hamiltonian is not Hermitian within " +
                         std::to_string(hermiticity_tolerance));
    }
    const Complex i(0, 1);
    Matrix k = h_.matrix();
    for (const auto& d : dissipators_) {
      require_same_space(h_.space(), d.jump.space(), "LindbladModel");
      if (!(d.rate >= Scalar(0))) {
        throw Error("dissipator rate must be nonnegative, got " +
                    std::to_string(d.rate));
      }
      const Matrix& c = d.jump.matrix();
      k -= (i * Scalar(0.5) * d.rate) * (c.adjoint() * c);
      jumps_.push_back(c);
      weighted_adjoints_.push_back(d.rate * c.adjoint());
    }
    minus_i_k_ = -i * k;
    i_k_adjoint_ = i * k.adjoint();
  }

  const HilbertSpec& space() const noexcept { return h_.space(); }
  const OperatorT<Scalar>& hamiltonian() const noexcept { return h_; }
  const std::vector<DissipatorT<Scalar>>& dissipators() const noexcept {
    return dissipators_;
  }

  Scalar total_rate() const {
    Scalar s(0);
    for (const auto& d : dissipators_) s += d.rate;
    return s;
  }

  /// out = L(rho). `scratch` is reused between calls to avoid allocations.
  void apply_into(const Matrix& rho, Matrix& out, Matrix& scratch) const {
    out.noalias() = minus_i_k_ * rho;
    out.noalias() += rho * i_k_adjoint_;
    for (std::size_t j = 0; j < jumps_.size(); ++j) {
      scratch.noalias() = jumps_[j] * rho;
      out.noalias() += scratch * weighted_adjoints_[j];
    }
  }

  /// Adjoint (Heisenberg-picture) generator acting on an observable.
  Matrix apply_adjoint(const Matrix& a) const {
    // i(K^dag A - A K) + sum_k rate_k c_k^dag A c_k
    Matrix out = i_k_adjoint_ * a;
    out.noalias() += a * minus_i_k_;
    for (std::size_t j = 0; j < jumps_.size(); ++j) {
      out.noalias() += weighted_adjoints_[j] * a * jumps_[j];
    }
    return out;
  }

  /// Generator as a D^2 x D^2 matrix acting on column-stacked rho.
  Matrix superoperator() const {
    const Eigen::Index d = space().total();
    const Matrix id = Matrix::Identity(d, d);
    // vec(X rho Y) = (Y^T (x) X) vec(rho)
    Matrix sup = Eigen::kroneckerProduct(id, minus_i_k_).eval();
    sup += Eigen::kroneckerProduct(i_k_adjoint_.transpose(), id).eval();
    for (std::size_t j = 0; j < jumps_.size(); ++j) {
      sup += Eigen::kroneckerProduct(weighted_adjoints_[j].transpose(),
                                     jumps_[j])
                 .eval();
    }
    return sup;
  }

 private:
  OperatorT<Scalar> h_;
  std::vector<DissipatorT<Scalar>> dissipators_;
  std::vector<Matrix> jumps_;
  std::vector<Matrix> weighted_adjoints_;
  Matrix minus_i_k_;
  Matrix i_k_adjoint_;
};

using Dissipator = DissipatorT<double>;
using LindbladModel = LindbladModelT<double>;

template <typename Scalar>
ComplexMatrix<Scalar> liouvillian_apply(const LindbladModelT<Scalar>& model,
                                        const DensityMatrixT<Scalar>& rho) {
  require_same_space(model.space(), rho.space(), "liouvillian_apply");
  ComplexMatrix<Scalar> out(rho.size(), rho.size());
  ComplexMatrix<Scalar> scratch(rho.size(), rho.size());
  model.apply_into(rho.matrix(), out, scratch);
  return out;
}

template <typename Scalar>
OperatorT<Scalar> adjoint_apply(const LindbladModelT<Scalar>& model,
                                const OperatorT<Scalar>& a) {
  require_same_space(model.space(), a.space(), "adjoint_apply");
  return OperatorT<Scalar>(a.space(), model.apply_adjoint(a.matrix()));
}

template <typename Scalar>
ComplexMatrix<Scalar> liouvillian_matrix(const LindbladModelT<Scalar>& model) {
  return model.superoperator();
}

template <typename Scalar>
struct StateDiagnosticsT {
  Scalar trace_error = 0;
  Scalar hermiticity_residual = 0;
  Scalar min_eigenvalue = 0;
  /// Population of basis states with some mode at its top Fock level.
  Scalar tail_population = 0;

  bool passes(Scalar tol) const {
    return trace_error <= tol && hermiticity_residual <= tol &&
           min_eigenvalue >= -tol;
  }
};

using StateDiagnostics = StateDiagnosticsT<double>;

namespace detail {

template <typename Scalar>
Scalar tail_population(const HilbertSpec& space,
                       const ComplexMatrix<Scalar>& rho) {
  Scalar tail(0);
  if (space.modes() == 1) return std::real(rho(space.dim(0) - 1, space.dim(0) - 1));
  const int d1 = space.dim(0);
  const int d2 = space.dim(1);
  for (int i = 0; i < d1; ++i) {
    for (int j = 0; j < d2; ++j) {
      if (i == d1 - 1 || j == d2 - 1) {
        const Eigen::Index k = static_cast<Eigen::Index>(i) * d2 + j;
        tail += std::real(rho(k, k));
      }
    }
  }
  return tail;
}

template <typename Scalar>
Scalar min_hermitian_eigenvalue(const ComplexMatrix<Scalar>& rho) {
  const ComplexMatrix<Scalar> h = (rho + rho.adjoint()) * Scalar(0.5);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix<Scalar>> es(
      h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace detail

/// Pure report; never throws on an invalid state.
template <typename Scalar>
StateDiagnosticsT<Scalar> validate_state(const DensityMatrixT<Scalar>& rho) {
  const auto& m = rho.matrix();
  StateDiagnosticsT<Scalar> d;
  d.trace_error = std::abs(m.trace() - std::complex<Scalar>(1));
  d.hermiticity_residual = max_abs(m - m.adjoint());
  d.min_eigenvalue = detail::min_hermitian_eigenvalue<Scalar>(m);
  d.tail_population = detail::tail_population<Scalar>(rho.space(), m);
  return d;
}

/// Diagonal populations <n|rho|n> in basis order.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> photon_distribution(
    const DensityMatrixT<Scalar>& rho) {
  return rho.matrix().diagonal().real();
}

template <typename Scalar>
struct NamedOperatorT {
  std::string name;
  OperatorT<Scalar> op;
};

using NamedOperator = NamedOperatorT<double>;

template <typename Scalar>
struct EvolveOptionsT {
  int record_stride = 1;
  Scalar trace_tolerance = Scalar(1e-9);
  /// Largest admissible top-level population.
  Scalar tail_threshold = Scalar(1e-6);
  bool monitor_positivity = true;
  /// Throw TruncationWarningT at completion when the tail was exceeded.
  bool throw_on_truncation = true;
};

using EvolveOptions = EvolveOptionsT<double>;

template <typename Scalar>
struct METrajectoryT {
  std::vector<std::string> names;
  std::vector<Scalar> times;
  /// values[k][j] is <names[j]> at times[k].
  std::vector<std::vector<std::complex<Scalar>>> values;
  std::vector<StateDiagnosticsT<Scalar>> diagnostics;
  bool truncation_flagged = false;
  DensityMatrixT<Scalar> final_state;

  std::size_t index_of(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error("no observable named '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
  }

  std::vector<std::complex<Scalar>> series(const std::string& name) const {
    const auto j = index_of(name);
    std::vector<std::complex<Scalar>> out;
    out.reserve(values.size());
    for (const auto& row : values) out.push_back(row[j]);
    return out;
  }

  Scalar max_tail() const {
    Scalar m(0);
    for (const auto& d : diagnostics) m = std::max(m, d.tail_population);
    return m;
  }
};

using METrajectory = METrajectoryT<double>;

/// Carries the completed trajectory whose top Fock level exceeded the
/// configured threshold.
template <typename Scalar>
class TruncationWarningT : public TruncationInadequate {
 public:
  TruncationWarningT(const std::string& what, METrajectoryT<Scalar> traj)
      : TruncationInadequate(what), trajectory_(std::move(traj)) {}
  const METrajectoryT<Scalar>& trajectory() const noexcept {
    return trajectory_;
  }

 private:
  METrajectoryT<Scalar> trajectory_;
};

using TruncationWarning = TruncationWarningT<double>;

/// Fixed-step classical RK4 for d rho/dt = L(rho), re-Hermitizing after
/// every step. Observables and diagnostics are recorded at step 0 and every
/// `record_stride` steps thereafter (and always at the final step).
template <typename Scalar>
METrajectoryT<Scalar> evolve_rk4(
    const LindbladModelT<Scalar>& model, const DensityMatrixT<Scalar>& rho0,
    Scalar dt, long steps, const std::vector<NamedOperatorT<Scalar>>& observables,
    const EvolveOptionsT<Scalar>& options = {}) {
  using Matrix = ComplexMatrix<Scalar>;
  require_same_space(model.space(), rho0.space(), "evolve_rk4");
  if (!(dt > Scalar(0))) throw Error("evolve_rk4: dt must be positive");
  if (steps < 0) throw Error("evolve_rk4: negative step count");
  if (options.record_stride < 1) throw Error("evolve_rk4: record_stride < 1");
  for (const auto& o : observables) {
    require_same_space(model.space(), o.op.space(), "evolve_rk4 observable");
  }

  const HilbertSpec space = model.space();
  const Eigen::Index d = space.total();
  Matrix rho = rho0.matrix();
  Matrix k1(d, d), k2(d, d), k3(d, d), k4(d, d), tmp(d, d), scratch(d, d);

  METrajectoryT<Scalar> traj{{}, {}, {}, {}, false, rho0};
  for (const auto& o : observables) traj.names.push_back(o.name);

  auto record = [&](long step, Scalar herm_residual) {
    traj.times.push_back(Scalar(step) * dt);
    std::vector<std::complex<Scalar>> row;
    row.reserve(observables.size());
    for (const auto& o : observables) {
      row.push_back((o.op.matrix().transpose().cwiseProduct(rho)).sum());
    }
    traj.values.push_back(std::move(row));
    StateDiagnosticsT<Scalar> diag;
    diag.trace_error = std::abs(rho.trace() - std::complex<Scalar>(1));
    diag.hermiticity_residual = herm_residual;
    diag.min_eigenvalue = options.monitor_positivity
                              ? detail::min_hermitian_eigenvalue<Scalar>(rho)
                              : Scalar(0);
    diag.tail_population = detail::tail_population<Scalar>(space, rho);
    if (diag.tail_population > options.tail_threshold) {
      traj.truncation_flagged = true;
    }
    traj.diagnostics.push_back(diag);
  };

  record(0, max_abs(rho - rho.adjoint()));
  const Scalar half_dt = dt / Scalar(2);
  for (long n = 1; n <= steps; ++n) {
    model.apply_into(rho, k1, scratch);
    tmp = rho + half_dt * k1;
    model.apply_into(tmp, k2, scratch);
    tmp = rho + half_dt * k2;
    model.apply_into(tmp, k3, scratch);
    tmp = rho + dt * k3;
    model.apply_into(tmp, k4, scratch);
    rho += (dt / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);

    const Scalar herm_residual = max_abs(rho - rho.adjoint());
    tmp = (rho + rho.adjoint()) * Scalar(0.5);
    rho.swap(tmp);

    const Scalar trace_error = std::abs(rho.trace() - std::complex<Scalar>(1));
    if (!(trace_error <= options.trace_tolerance)) {
      throw TraceDrift("trace drifted by " + std::to_string(trace_error) +
                       " at t=" + std::to_string(Scalar(n) * dt));
    }
    if (n % options.record_stride == 0 || n == steps) record(n, herm_residual);
  }
  traj.final_state = DensityMatrixT<Scalar>(space, rho);

  if (traj.truncation_flagged && options.throw_on_truncation) {
    const Scalar tail = traj.max_tail();
    throw TruncationWarningT<Scalar>(
        "top Fock level population reached " + std::to_string(tail) +
            " (threshold " + std::to_string(options.tail_threshold) +
            "); increase the truncation",
        std::move(traj));
  }
  return traj;
}

/// Unique stationary state from the null space of the dense generator,
/// augmented with a trace-normalization row.
template <typename Scalar>
DensityMatrixT<Scalar> steady_state(const LindbladModelT<Scalar>& model,
                                    Scalar tail_threshold = Scalar(1e-6),
                                    Scalar residual_tolerance = Scalar(1e-10)) {
  using Matrix = ComplexMatrix<Scalar>;
  using Vector = ComplexVector<Scalar>;
  const Eigen::Index d = model.space().total();
  const Eigen::Index n = d * d;

  Matrix aug(n + 1, n);
  aug.topRows(n) = model.superoperator();
  aug.row(n).setZero();
  for (Eigen::Index k = 0; k < d; ++k) aug(n, k * (d + 1)) = Scalar(1);
  Vector rhs = Vector::Zero(n + 1);
  rhs(n) = Scalar(1);

  Eigen::ColPivHouseholderQR<Matrix> qr(aug.rows(), aug.cols());
  qr.setThreshold(Scalar(1e-10));
  qr.compute(aug);
  if (qr.rank() < n) {
    throw NoUniqueSteadyState("generator null space has dimension " +
                              std::to_string(n - qr.rank()) +
                              " beyond the trace constraint");
  }
  const Vector x = qr.solve(rhs);
  Matrix rho = Eigen::Map<const Matrix>(x.data(), d, d);
  rho = (rho + rho.adjoint()) * Scalar(0.5);
  rho /= rho.trace();

  DensityMatrixT<Scalar> out(model.space(), rho);
  const Scalar residual = max_abs(liouvillian_apply(model, out));
  if (!(residual <= residual_tolerance)) {
    throw NoUniqueSteadyState("no stationary state: residual " +
                              std::to_string(residual));
  }
  const Scalar tail = detail::tail_population<Scalar>(model.space(), rho);
  if (tail > tail_threshold) {
    throw TruncationInadequate("steady state has top-level population " +
                               std::to_string(tail));
  }
  return out;
}

}  // namespace oscillab
