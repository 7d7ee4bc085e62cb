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

// Strongly nonlinear van der Pol oscillator, both as the second-order ODE
//
//   x'' + mu (x^2 - 1) x' + omega0^2 x = 0
//
// and as the primary half of the two-oscillator Hamiltonian
//
//   H = px py + omega0^2 x y + (lambda/2)(x^2 - 1) y py.
//
// Hamilton's equations of H are
//
//   x'  =  dH/dpx = py
//   px' = -dH/dx  = -omega0^2 y - lambda x y py
//   y'  =  dH/dpy = px + (lambda/2)(x^2 - 1) y
//   py' = -dH/dy  = -omega0^2 x - (lambda/2)(x^2 - 1) py
//
// so (x, py) is closed and x'' = py' gives the ODE above with
// mu = lambda/2, not lambda. equivalence_check() uses that derived value.

#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace oscillab::vdp {

struct VdpParams {
  double omega0 = 1;
  /// Damping coefficient of the second-order ODE.
  double mu = 0;
  /// Coupling constant of the two-oscillator Hamiltonian.
  double lambda = 0;
};

struct HamState {
  double x = 0;
  double px = 0;
  double y = 0;
  double py = 0;

  Eigen::Vector4d vector() const { return {x, px, y, py}; }
  static HamState from(const Eigen::Vector4d& v) { return {v(0), v(1), v(2), v(3)}; }
};

/// Rows are samples. Columns are (x, v) for the ODE and (x, px, y, py) for
/// the Hamiltonian flow.
struct PhaseTrajectory {
  std::vector<double> times;
  Eigen::MatrixXd states;

  Eigen::Index size() const { return states.rows(); }
  auto x() const { return states.col(0); }
};

PhaseTrajectory integrate_vdp(const VdpParams& params, double x0, double v0,
                              double dt, double t_final, int record_stride = 1);

Eigen::Vector4d hamiltonian_rhs(const VdpParams& params,
                                const Eigen::Vector4d& state);
double hamiltonian_energy(const VdpParams& params, const HamState& state);

PhaseTrajectory hamiltonian_flow(const VdpParams& params, const HamState& init,
                                 double dt, double t_final,
                                 int record_stride = 1);

/// Damping coefficient of the ODE generated by the Hamiltonian: lambda/2.
double hamiltonian_damping_coefficient(const VdpParams& params);

/// sup_t |x_ham(t) - x_vdp(t)| with the Hamiltonian started at
/// (x0, px = 0, y = 0, py = v0). The ODE damping is the derived coefficient
/// unless `damping` overrides it.
double equivalence_check(const VdpParams& params, double x0, double v0,
                         double dt, double t_final,
                         std::optional<double> damping = std::nullopt);

struct LimitCycleMetrics {
  double amplitude = 0;
  double period = 0;
  int maxima = 0;
  int crossings = 0;
};

/// Mean post-transient |x| maximum and mean spacing of upward zero
/// crossings, both parabolically refined. Throws TooFewCycles.
LimitCycleMetrics limit_cycle_metrics(const PhaseTrajectory& traj,
                                      double transient_fraction = 0.5);

struct CommutatorResiduals {
  /// i[H, x] - py
  double r1_interior = 0;
  /// i[H, py] + omega0^2 x + (lambda/2)(x^2 - 1) py
  double r2_interior = 0;
  double r1_full = 0;
  double r2_full = 0;
};

/// Heisenberg equations of the quantized Hamiltonian on a dim x dim
/// two-mode truncation; interior excludes the top two levels of each mode.
CommutatorResiduals quantum_commutator_check(const VdpParams& params, int dim);

/// 1e-4, or 1e-5 for relaxation oscillations (mu >= 10).
double default_time_step(const VdpParams& params);

}  // namespace oscillab::vdp
