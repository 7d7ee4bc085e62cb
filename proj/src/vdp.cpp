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

#include "oscillab/vdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oscillab/error.hpp"
#include "oscillab/fockspace.hpp"

namespace oscillab::vdp {

namespace {

constexpr double kOverflowGuard = 1e100;

template <typename Vec, typename Rhs>
PhaseTrajectory integrate_rk4(Vec state, const Rhs& rhs, double dt,
                              double t_final, int record_stride,
                              const char* what) {
  if (!(dt > 0)) throw Error(std::string(what) + ": dt must be positive");
  if (record_stride < 1) throw Error(std::string(what) + ": record_stride < 1");
  const long steps = std::lround(t_final / dt);
  const long n_records = steps / record_stride + 1 + (steps % record_stride != 0);
  PhaseTrajectory traj;
  traj.times.reserve(static_cast<std::size_t>(n_records));
  traj.states.resize(n_records, state.size());
  Eigen::Index row = 0;
  traj.times.push_back(0.0);
  traj.states.row(row++) = state.transpose();
  for (long n = 1; n <= steps; ++n) {
    const Vec k1 = rhs(state);
    const Vec k2 = rhs(state + 0.5 * dt * k1);
    const Vec k3 = rhs(state + 0.5 * dt * k2);
    const Vec k4 = rhs(state + dt * k3);
    state += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!state.allFinite() || state.cwiseAbs().maxCoeff() > kOverflowGuard) {
      throw Divergence(std::string(what) + " diverged", n * dt);
    }
    if (n % record_stride == 0 || n == steps) {
      traj.times.push_back(n * dt);
      traj.states.row(row++) = state.transpose();
    }
  }
  traj.states.conservativeResize(row, Eigen::NoChange);
  return traj;
}

// Vertex of the parabola through three equally spaced samples, as an offset
// in units of the spacing from the middle sample, and its value.
std::pair<double, double> parabola_peak(double ym, double y0, double yp) {
  const double curvature = ym - 2.0 * y0 + yp;
  if (curvature == 0.0) return {0.0, y0};
  const double s = 0.5 * (ym - yp) / curvature;
  return {s, y0 - 0.25 * (ym - yp) * s};
}

}  // namespace

PhaseTrajectory integrate_vdp(const VdpParams& params, double x0, double v0,
                              double dt, double t_final, int record_stride) {
  const double w2 = params.omega0 * params.omega0;
  const double mu = params.mu;
  auto rhs = [&](const Eigen::Vector2d& s) -> Eigen::Vector2d {
    return {s(1), -mu * (s(0) * s(0) - 1.0) * s(1) - w2 * s(0)};
  };
  return integrate_rk4<Eigen::Vector2d>({x0, v0}, rhs, dt, t_final,
                                        record_stride, "integrate_vdp");
}

Eigen::Vector4d hamiltonian_rhs(const VdpParams& params,
                                const Eigen::Vector4d& s) {
  const double w2 = params.omega0 * params.omega0;
  const double lam = params.lambda;
  const double x = s(0), px = s(1), y = s(2), py = s(3);
  const double g = 0.5 * lam * (x * x - 1.0);
  return {py, -w2 * y - lam * x * y * py, px + g * y, -w2 * x - g * py};
}

double hamiltonian_energy(const VdpParams& params, const HamState& s) {
  const double w2 = params.omega0 * params.omega0;
  return s.px * s.py + w2 * s.x * s.y +
         0.5 * params.lambda * (s.x * s.x - 1.0) * s.y * s.py;
}

PhaseTrajectory hamiltonian_flow(const VdpParams& params, const HamState& init,
                                 double dt, double t_final, int record_stride) {
  auto rhs = [&](const Eigen::Vector4d& s) { return hamiltonian_rhs(params, s); };
  return integrate_rk4<Eigen::Vector4d>(init.vector(), rhs, dt, t_final,
                                        record_stride, "hamiltonian_flow");
}

double hamiltonian_damping_coefficient(const VdpParams& params) {
  return 0.5 * params.lambda;
}

double equivalence_check(const VdpParams& params, double x0, double v0,
                         double dt, double t_final,
                         std::optional<double> damping) {
  VdpParams ode = params;
  ode.mu = damping.value_or(hamiltonian_damping_coefficient(params));
  const auto direct = integrate_vdp(ode, x0, v0, dt, t_final);
  const auto flow = hamiltonian_flow(params, {x0, 0.0, 0.0, v0}, dt, t_final);
  return (direct.x() - flow.x()).cwiseAbs().maxCoeff();
}

LimitCycleMetrics limit_cycle_metrics(const PhaseTrajectory& traj,
                                      double transient_fraction) {
  const Eigen::Index n = traj.size();
  if (n < 3) throw TooFewCycles("trajectory has fewer than three samples");
  const double t0 = traj.times.front();
  const double t_cut = t0 + transient_fraction * (traj.times.back() - t0);
  Eigen::Index first = 0;
  while (first < n && traj.times[first] < t_cut) ++first;
  first = std::max<Eigen::Index>(first, 1);

  const auto x = traj.x();
  double amp_sum = 0;
  int maxima = 0;
  std::vector<double> crossings;
  for (Eigen::Index i = first; i + 1 < n; ++i) {
    const double ym = std::abs(x(i - 1)), y0 = std::abs(x(i)),
                 yp = std::abs(x(i + 1));
    if (y0 > ym && y0 >= yp) {
      amp_sum += parabola_peak(ym, y0, yp).second;
      ++maxima;
    }
    if (x(i) < 0.0 && x(i + 1) >= 0.0) {
      // root of the parabola through samples i-1, i, i+1, taken in [t_i, t_i+1]
      const double h = traj.times[i + 1] - traj.times[i];
      const double c = x(i);
      const double b = 0.5 * (x(i + 1) - x(i - 1));
      const double a = 0.5 * (x(i + 1) - 2.0 * x(i) + x(i - 1));
      double s = -c / (x(i + 1) - x(i));
      if (std::abs(a) > 1e-300) {
        const double disc = b * b - 4.0 * a * c;
        if (disc >= 0.0) {
          const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
          const double r1 = q / a;
          const double r2 = q != 0.0 ? c / q : r1;
          if (r1 >= 0.0 && r1 <= 1.0) {
            s = r1;
          } else if (r2 >= 0.0 && r2 <= 1.0) {
            s = r2;
          }
        }
      }
      crossings.push_back(traj.times[i] + s * h);
    }
  }
  if (maxima < 3 || crossings.size() < 2) {
    throw TooFewCycles("found " + std::to_string(maxima) + " maxima and " +
                       std::to_string(crossings.size()) +
                       " upward crossings after the transient");
  }
  LimitCycleMetrics m;
  m.amplitude = amp_sum / maxima;
  m.period = (crossings.back() - crossings.front()) /
             static_cast<double>(crossings.size() - 1);
  m.maxima = maxima;
  m.crossings = static_cast<int>(crossings.size());
  return m;
}

CommutatorResiduals quantum_commutator_check(const VdpParams& params, int dim) {
  if (dim < 4) throw InvalidDimension("commutator check needs dim >= 4 per mode");
  using C = std::complex<double>;
  const auto [q, p] = quadratures(dim);
  const auto one = identity(HilbertSpec::single(dim));
  const auto x = embed_two_mode(q, one);
  const auto px = embed_two_mode(p, one);
  const auto y = embed_two_mode(one, q);
  const auto py = embed_two_mode(one, p);
  const auto id = identity(x.space());
  const C w2(params.omega0 * params.omega0);
  const C half_lambda(0.5 * params.lambda);

  const auto damping = half_lambda * (x * x - id);
  const auto h = px * py + w2 * (x * y) + damping * (y * py);
  const C i(0.0, 1.0);
  const auto r1 = i * commutator(h, x) - py;
  const auto r2 = i * commutator(h, py) + w2 * x + damping * py;

  CommutatorResiduals out;
  out.r1_interior = interior_max_abs(r1.matrix(), r1.space(), 2);
  out.r2_interior = interior_max_abs(r2.matrix(), r2.space(), 2);
  out.r1_full = max_abs(r1.matrix());
  out.r2_full = max_abs(r2.matrix());
  return out;
}

double default_time_step(const VdpParams& params) {
  return params.mu >= 10.0 ? 1e-5 : 1e-4;
}

}  // namespace oscillab::vdp
