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

// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit status
// when any criterion fails. Tolerances are fixed here, not configurable.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oscillab/error.hpp"
#include "oscillab/lindblad.hpp"
#include "oscillab/runner.hpp"
#include "oscillab/sde.hpp"
#include "oscillab/slle.hpp"
#include "oscillab/vdp.hpp"

using namespace oscillab;
using Complex = std::complex<double>;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Master-equation runs shared by the amplification, Ehrenfest and validity
// criteria.

struct MeRun {
  std::string label;
  slle::SlleParams params;
  double dt;
  METrajectory traj;
  double seconds;
};

MeRun run_master_equation(std::string label, const slle::SlleParams& p, int dim,
                          double t_final) {
  const double dt = 1e-3;
  const auto a = annihilation(dim);
  const auto ad = a.adjoint();
  EvolveOptions opt;
  opt.throw_on_truncation = false;
  const auto t0 = std::chrono::steady_clock::now();
  auto traj = evolve_rk4(slle::build_model(p, dim), coherent_density(dim, Complex(0.2)),
                         dt, std::lround(t_final / dt),
                         {{"a", a}, {"adag_a2", ad * a * a}}, opt);
  return {std::move(label), p, dt, std::move(traj), seconds_since(t0)};
}

std::vector<MeRun>& me_runs() {
  static std::vector<MeRun> runs = [] {
    std::vector<MeRun> out;
    for (double g2 : {0.1, 0.2, 0.4}) {
      out.push_back(run_master_equation(
          fmt("preset-b g2=%.1f", g2),
          slle::preset(slle::RegimePreset::PureNoiseAmplification, 0.0, g2), 30,
          0.5 / g2));
    }
    out.push_back(run_master_equation(
        "preset-c k1=1 k2=0.1",
        slle::preset(slle::RegimePreset::PhenomenologicalVdp, 1.0, 0.1), 30, 5.0));
    return out;
  }();
  return runs;
}

Outcome noise_induced_amplification() {
  Outcome o{true, ""};
  for (int i = 0; i < 3; ++i) {
    const auto& run = me_runs()[static_cast<std::size_t>(i)];
    const double g2 = run.params.gamma2;
    const auto a = run.traj.series("a");
    double worst = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double expected = 0.2 * std::exp(g2 * run.traj.times[k]);
      worst = std::max(worst, std::abs(std::abs(a[k]) - expected) / expected);
    }
    const bool ok = worst < 1e-3 && run.seconds < 10.0;
    o.pass = o.pass && ok;
    o.detail += fmt("g2=%.1f rel.err %.2e in %.1fs; ", g2, worst, run.seconds);
  }
  o.detail += "tol 1e-3 over g2 t in [0, 0.5], dim 30";
  return o;
}

Outcome ehrenfest_consistency() {
  Outcome o{true, ""};
  for (const auto& run : me_runs()) {
    const auto a = run.traj.series("a");
    const auto nl = run.traj.series("adag_a2");
    const Complex lin = slle::linear_coefficient(run.params);
    const double nonlin = slle::nonlinear_coefficient(run.params);
    // Relative to the sup norm of the prediction: pointwise ratios are
    // meaningless where d<a>/dt crosses zero. The pointwise figure is printed.
    double err = 0, scale = 0, pointwise = 0;
    for (std::size_t k = 2; k + 2 < a.size(); ++k) {
      const Complex fd = (a[k - 2] - 8.0 * a[k - 1] + 8.0 * a[k + 1] - a[k + 2]) /
                         (12.0 * run.dt);
      const Complex predicted = lin * a[k] + nonlin * nl[k];
      err = std::max(err, std::abs(fd - predicted));
      scale = std::max(scale, std::abs(predicted));
      pointwise = std::max(pointwise, std::abs(fd - predicted) / std::abs(predicted));
    }
    const double rel = err / scale;
    o.pass = o.pass && rel < 1e-6;
    o.detail += fmt("%s %.2e (pointwise %.1e); ", run.label.c_str(), rel, pointwise);
  }
  o.detail += "tol 1e-6 relative to max |prediction|, dt 1e-3";
  return o;
}

Outcome state_validity() {
  Outcome o{true, ""};
  for (const auto& run : me_runs()) {
    double tr = 0, herm = 0, eig = 0;
    for (const auto& d : run.traj.diagnostics) {
      tr = std::max(tr, d.trace_error);
      herm = std::max(herm, d.hermiticity_residual);
      eig = std::min(eig, d.min_eigenvalue);
    }
    const double tail = run.traj.max_tail();
    const bool ok = tr < 1e-9 && herm < 1e-10 && eig > -1e-8 && tail < 1e-6;
    o.pass = o.pass && ok;
    o.detail += fmt("%s tr %.1e herm %.1e eig %.1e tail %.1e; ", run.label.c_str(),
                    tr, herm, eig, tail);
  }
  o.detail += "tol 1e-9 / 1e-10 / -1e-8 / 1e-6";
  return o;
}

// ---------------------------------------------------------------------------

Outcome generator_identity() {
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int dim = 16;
  const auto a = annihilation(dim);
  const auto ad = a.adjoint();
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    slle::SlleParams p;
    p.omega0 = 2.0 * u(rng);
    p.gamma1 = 2.0 * u(rng);
    p.gamma2 = u(rng);
    p.n_up = u(rng);
    p.n_dn = u(rng);
    p.n_upp = u(rng);
    p.n_ddn = u(rng);
    p.rotating_frame = false;
    const Complex lin(0.5 * p.gamma1 * (p.n_up - p.n_dn) + 2.0 * p.gamma2 * p.n_upp,
                      -p.omega0);
    const double nonlin = p.gamma2 * (p.n_upp - p.n_ddn);
    const auto expected = lin * a + Complex(nonlin) * (ad * a * a);
    const auto got = adjoint_apply(slle::build_model(p, dim), a);
    worst = std::max(worst, interior_max_abs(got.matrix() - expected.matrix(),
                                             a.space(), 2));
  }
  return {worst < 1e-10, fmt("20 random parameter sets, dim 16: max interior residual "
                             "%.2e (tol 1e-10)", worst)};
}

Outcome phenomenological_recovery() {
  const int dim = 16;
  const double k1 = 1.0, k2 = 0.1, w0 = 1.0;
  auto p = slle::preset(slle::RegimePreset::PhenomenologicalVdp, k1, k2);
  p.rotating_frame = false;
  const auto built = slle::build_model(p, dim);
  const auto direct = slle::phenomenological_vdp_model(w0, k1, k2, dim);
  const double gen = max_abs(liouvillian_matrix(built) - liouvillian_matrix(direct));
  const auto a = annihilation(dim);
  const auto expected = Complex(k1 / 2, -w0) * a - Complex(k2) * (a.adjoint() * a * a);
  const double adj = interior_max_abs(
      adjoint_apply(built, a).matrix() - expected.matrix(), a.space(), 2);
  return {gen < 1e-12 && adj < 1e-10,
          fmt("generator residual %.2e (tol 1e-12), interior adjoint residual %.2e "
              "(tol 1e-10)", gen, adj)};
}

// ---------------------------------------------------------------------------

sde::AmplifierSde pure_noise(double sigma_w2, sde::Interpretation interp) {
  sde::AmplifierSde s;
  s.sigma_w2 = sigma_w2;
  s.interpretation = interp;
  return s;
}

sde::EnsembleConfig ensemble(long n, double dt, double t_final, std::uint64_t seed) {
  sde::EnsembleConfig c;
  c.n_traj = n;
  c.dt = dt;
  c.t_final = t_final;
  c.seed = seed;
  c.record_stride = 100;
  return c;
}

Outcome ito_stratonovich_drift() {
  Outcome o{true, ""};
  for (double g2 : {0.1, 0.2}) {
    for (auto interp : {sde::Interpretation::Stratonovich, sde::Interpretation::Ito}) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto stats = sde::simulate_ensemble(pure_noise(g2 / 2, interp), 1.0,
                                                ensemble(100000, 1e-3, 1.0, 5));
      const double secs = seconds_since(t0);
      const auto g = sde::measured_growth_rate(stats, stats.times.size() - 1);
      const double expected = interp == sde::Interpretation::Stratonovich ? g2 : 0.0;
      const double z = std::abs(g.rate - expected) / g.stderr;
      o.pass = o.pass && z <= 3.0 && secs < 60.0;
      o.detail += fmt("%s g2=%.1f rate %.4f (expect %.1f, %.1f se, %.0fs); ",
                      std::string(sde::to_string(interp)).c_str(), g2, g.rate,
                      expected, z, secs);
    }
  }
  o.detail += "n_traj 1e5, tol 3 se";
  return o;
}

Outcome noise_decorrelation() {
  Outcome o{true, ""};
  const double w2 = 0.1;
  std::vector<sde::PooledEstimate> strat_pooled;
  for (double dt : {1e-3, 5e-4}) {
    const auto cfg = ensemble(20000, dt, 0.5, 17);
    const auto ito = sde::noise_correlation(pure_noise(w2, sde::Interpretation::Ito),
                                            1.0, cfg);
    const auto str = sde::noise_correlation(
        pure_noise(w2, sde::Interpretation::Stratonovich), 1.0, cfg);
    const double zi = std::max(std::abs(ito.pooled.mean.real()) / ito.pooled.stderr_re,
                               std::abs(ito.pooled.mean.imag()) / ito.pooled.stderr_im);
    const auto& r = str.pooled_residual;
    const double zs = std::max(std::abs(r.mean.real()) / r.stderr_re,
                               std::abs(r.mean.imag()) / r.stderr_im);
    strat_pooled.push_back(str.pooled);
    o.pass = o.pass && zi <= 3.0 && zs <= 3.0;
    o.detail += fmt("dt=%g ito |C|/se %.2f, strat C=%.4f%+.4fi resid/se %.2f; ", dt,
                    zi, str.pooled.mean.real(), str.pooled.mean.imag(), zs);
  }
  const auto& a = strat_pooled[0];
  const auto& b = strat_pooled[1];
  const double dz =
      std::max(std::abs(a.mean.real() - b.mean.real()) / std::hypot(a.stderr_re, b.stderr_re),
               std::abs(a.mean.imag() - b.mean.imag()) / std::hypot(a.stderr_im, b.stderr_im));
  o.pass = o.pass && dz <= 3.0;
  o.detail += fmt("dt-halving shift %.2f se; tol 3 se", dz);
  return o;
}

Outcome classical_sle() {
  struct Case {
    Complex l1, l2;
    double r_ss, omega;
  };
  const std::vector<Case> cases = {
      {1.0, 1.0, 1.0, 0.0},
      {Complex(1, 2), Complex(2, 0.5), std::sqrt(0.5), 1.75},
      {Complex(0.5, -1), Complex(0.25, 0.75), std::sqrt(2.0), -2.5},
  };
  Outcome o{true, ""};
  for (const auto& c : cases) {
    const double t_final = 60.0;
    const auto traj = sde::integrate_sle({c.l1, c.l2}, 0.1, 1e-3, t_final);
    const double r_model = sde::limit_cycle_amplitude({c.l1, c.l2});
    const double dr = std::abs(std::abs(traj.values.back()) - c.r_ss);
    const double dw = std::abs(sde::phase_velocity(traj, 0.75 * t_final) - c.omega);
    o.pass = o.pass && dr < 1e-6 && dw < 1e-4 && std::abs(r_model - c.r_ss) < 1e-12;
    o.detail += fmt("(%g%+gi, %g%+gi) |dr| %.1e |dw| %.1e; ", c.l1.real(), c.l1.imag(),
                    c.l2.real(), c.l2.imag(), dr, dw);
  }
  o.detail += "tol 1e-6 / 1e-4";
  return o;
}

Outcome vdp_equivalence() {
  const vdp::VdpParams p{1.0, 0.0, 0.2};
  const double dt = 1e-4, t_final = 60.0;
  const double dev = vdp::equivalence_check(p, 1.0, 0.0, dt, t_final);
  const double control = vdp::equivalence_check(
      p, 1.0, 0.0, dt, t_final, 2.0 * vdp::hamiltonian_damping_coefficient(p));

  const vdp::HamState init{1.0, 0.3, -0.2, 0.0};
  const auto flow = vdp::hamiltonian_flow(p, init, dt, t_final);
  double drift = 0;
  const Eigen::Index per_window = std::lround(10.0 / dt);
  for (Eigen::Index k = 0; k < flow.size(); ++k) {
    const Eigen::Index start = (k / per_window) * per_window;
    drift = std::max(
        drift, std::abs(vdp::hamiltonian_energy(p, vdp::HamState::from(flow.states.row(k))) -
                        vdp::hamiltonian_energy(p, vdp::HamState::from(flow.states.row(start)))));
  }
  const auto base = vdp::hamiltonian_flow(p, {1.0, 0.0, 0.0, 0.0}, dt, t_final);
  const double unidir = (flow.x() - base.x()).cwiseAbs().maxCoeff();

  const bool ok = dev < 1e-6 && control > 1e-2 && drift < 1e-8 && unidir < 1e-10;
  return {ok, fmt("lambda 0.2: deviation %.2e (tol 1e-6), factor-2 control %.2e "
                  "(> 1e-2), energy drift/10 %.2e (tol 1e-8), (y,px) sensitivity %.1e "
                  "(tol 1e-10)", dev, control, drift, unidir)};
}

Outcome quantum_commutators() {
  const auto r = vdp::quantum_commutator_check({1.0, 0.0, 0.3}, 12);
  return {r.r1_interior < 1e-10 && r.r2_interior < 1e-10,
          fmt("dim 12, lambda 0.3: interior %.2e / %.2e (tol 1e-10); boundary %.2e / "
              "%.2e", r.r1_interior, r.r2_interior, r.r1_full, r.r2_full)};
}

Outcome determinism() {
  cli::RunConfig c;
  c.scenario = "sde";
  c.values["interpretation"] = "stratonovich";
  c.values["gamma2"] = 0.2;
  c.values["n_traj"] = 100000;
  c.values["dt"] = 1e-3;
  c.values["t_final"] = 1.0;
  c.values["seed"] = 5;
  const auto first = cli::execute(c);
  const auto second = cli::execute(c);
  const bool same = first.csv == second.csv && !first.csv.empty();
  return {same, fmt("sde n_traj 1e5 seed 5 twice: CSV %zu bytes, %s", first.csv.size(),
                    same ? "identical" : "DIFFERENT")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"noise-induced amplification", noise_induced_amplification},
      {"generator identity", generator_identity},
      {"phenomenological model recovery", phenomenological_recovery},
      {"Ehrenfest consistency", ehrenfest_consistency},
      {"Ito correction / Wong-Zakai", ito_stratonovich_drift},
      {"noise decorrelation", noise_decorrelation},
      {"classical Stuart-Landau", classical_sle},
      {"van der Pol equivalence", vdp_equivalence},
      {"quantum commutator check", quantum_commutators},
      {"state validity", state_validity},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
