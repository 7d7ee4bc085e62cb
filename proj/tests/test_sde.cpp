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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "oscillab/error.hpp"
#include "oscillab/sde.hpp"

using namespace oscillab;
using namespace oscillab::sde;

namespace {

AmplifierSde noise_only(double sigma_w2, Interpretation interp) {
  AmplifierSde s;
  s.sigma_w2 = sigma_w2;
  s.interpretation = interp;
  return s;
}

EnsembleConfig ensemble(long n_traj, double dt, double t_final,
                        std::uint64_t seed = 42, int stride = 100) {
  EnsembleConfig c;
  c.n_traj = n_traj;
  c.dt = dt;
  c.t_final = t_final;
  c.seed = seed;
  c.record_stride = stride;
  return c;
}

bool within_sigma(double value, double expected, double stderr, double k = 3.0) {
  return std::abs(value - expected) <= k * stderr;
}

}  // namespace

TEST_CASE("interpretation parsing") {
  CHECK(parse_interpretation("Ito") == Interpretation::Ito);
  CHECK(parse_interpretation("STRATONOVICH") == Interpretation::Stratonovich);
  CHECK(to_string(Interpretation::Ito) == "ito");
  CHECK_THROWS_AS(parse_interpretation("milstein"), ConfigError);
}

TEST_CASE("ensemble configuration") {
  CHECK(ensemble(10, 1e-3, 1.0).steps() == 1000);
  CHECK_THROWS_AS(ensemble(10, 0.3, 1.0).steps(), Error);
  CHECK_THROWS_AS(ensemble(10, -1e-3, 1.0).steps(), Error);
  AmplifierSde bad;
  bad.sigma_w2 = -1;
  CHECK_THROWS_AS(simulate_ensemble(bad, 1.0, ensemble(10, 1e-2, 1.0)), Error);
}

TEST_CASE("deterministic Stuart-Landau integration") {
  const auto up = integrate_sle({1.0, 1.0}, 0.1, 1e-3, 20.0);
  CHECK(std::abs(std::abs(up.values.back()) - 1.0) < 1e-6);

  const auto down = integrate_sle({-1.0, 1.0}, 0.1, 1e-3, 20.0);
  CHECK(std::abs(down.values.back()) < 1e-8);

  const auto spin = integrate_sle({Complex(1, 2), 1.0}, 0.1, 1e-3, 30.0);
  CHECK(std::abs(phase_velocity(spin, 20.0) - 2.0) < 1e-4);

  CHECK_THROWS_AS(integrate_sle({1.0, -1.0}, 1.0, 1e-3, 5.0), Divergence);
}

TEST_CASE("limit cycle amplitude") {
  CHECK(limit_cycle_amplitude({1.0, 1.0}) == doctest::Approx(1.0));
  CHECK(limit_cycle_amplitude({Complex(1, 1), Complex(2, 0.5)}) ==
        doctest::Approx(std::sqrt(0.5)));
  CHECK(limit_cycle_amplitude({-0.3, 1.0}) == 0.0);
  CHECK_THROWS_AS(limit_cycle_amplitude({0.2, 0.0}), NoStableCycle);
}

TEST_CASE("drift correction") {
  CHECK(drift_correction(noise_only(0.1, Interpretation::Stratonovich)) ==
        doctest::Approx(0.2));
  CHECK(drift_correction(noise_only(0.0, Interpretation::Stratonovich)) == 0.0);
  for (double g2 : {0.1, 0.2, 0.4}) {
    const auto s = noise_only(g2 / 2, Interpretation::Stratonovich);
    CHECK(predicted_mean_growth_rate(s) == doctest::Approx(g2));
    CHECK(predicted_mean_growth_rate(noise_only(g2 / 2, Interpretation::Ito)) == 0.0);
  }
}

TEST_CASE("noise-free ensembles follow the discrete linear map") {
  AmplifierSde s;
  s.kappa_up = 1.0;
  const Complex a0(0.3, 0.4);
  const auto cfg = ensemble(8, 1e-3, 1.0);
  for (auto interp : {Interpretation::Ito, Interpretation::Stratonovich}) {
    s.interpretation = interp;
    const auto st = simulate_ensemble(s, a0, cfg);
    const double h = 0.5 * cfg.dt;
    const double factor = interp == Interpretation::Ito ? 1 + h : 1 + h + h * h / 2;
    CHECK(std::abs(st.mean_amplitude.back() - a0 * std::pow(factor, 1000)) < 1e-12);
    CHECK(std::abs(st.mean_amplitude.back() - a0 * std::exp(0.5)) /
              std::abs(a0 * std::exp(0.5)) <
          2e-4);
    // Identical samples; only round-off in the sum-of-squares variance.
    CHECK(st.stderr_re.back() < 1e-7);
    CHECK(std::abs(st.pooled_correlation.mean) == 0.0);
  }
}

TEST_CASE("Ito ensemble has no noise-induced drift") {
  const auto st = simulate_ensemble(noise_only(0.1, Interpretation::Ito), 1.0,
                                    ensemble(20000, 1e-3, 1.0, 7));
  for (std::size_t k = 0; k < st.times.size(); ++k) {
    CHECK(within_sigma(st.projected_mean[k], 1.0, st.projected_stderr[k]));
  }
}

TEST_CASE("Stratonovich mean growth and the Wong-Zakai gap") {
  for (double w2 : {0.05, 0.1, 0.2}) {
    const auto cfg = ensemble(20000, 1e-3, 1.0, 11);
    const auto strat = simulate_ensemble(
        noise_only(w2, Interpretation::Stratonovich), 1.0, cfg);
    const auto ito =
        simulate_ensemble(noise_only(w2, Interpretation::Ito), 1.0, cfg);
    const auto gs = measured_growth_rate(strat, strat.times.size() - 1);
    const auto gi = measured_growth_rate(ito, ito.times.size() - 1);
    CHECK(within_sigma(gs.rate, 2.0 * w2, gs.stderr));
    CHECK(within_sigma(gs.rate - gi.rate,
                       drift_correction(noise_only(w2, Interpretation::Stratonovich)),
                       std::hypot(gs.stderr, gi.stderr)));
  }
}

TEST_CASE("halving dt leaves the Stratonovich drift unchanged") {
  const auto s = noise_only(0.1, Interpretation::Stratonovich);
  const auto a = simulate_ensemble(s, 1.0, ensemble(10000, 2e-3, 1.0, 3));
  const auto b = simulate_ensemble(s, 1.0, ensemble(10000, 1e-3, 1.0, 4));
  const auto ga = measured_growth_rate(a, a.times.size() - 1);
  const auto gb = measured_growth_rate(b, b.times.size() - 1);
  CHECK(within_sigma(ga.rate, gb.rate, std::hypot(ga.stderr, gb.stderr)));
}

TEST_CASE("noise correlation") {
  const auto cfg = ensemble(4000, 1e-3, 0.5, 19);
  const auto ito = noise_correlation(noise_only(0.1, Interpretation::Ito), 1.0, cfg);
  CHECK(within_sigma(ito.pooled.mean.real(), 0.0, ito.pooled.stderr_re));
  CHECK(within_sigma(ito.pooled.mean.imag(), 0.0, ito.pooled.stderr_im));

  const auto strat =
      noise_correlation(noise_only(0.1, Interpretation::Stratonovich), 1.0, cfg);
  CHECK(within_sigma(strat.pooled_residual.mean.real(), 0.0,
                     strat.pooled_residual.stderr_re));
  CHECK(within_sigma(strat.pooled_residual.mean.imag(), 0.0,
                     strat.pooled_residual.stderr_im));
  // About -0.1 i conj(E[a]) with E[a] near 1: clearly nonzero.
  CHECK(strat.pooled.mean.imag() < -10 * strat.pooled.stderr_im);
  CHECK(strat.pooled.mean.imag() == doctest::Approx(-0.1 * 1.05).epsilon(0.1));

  const auto quiet =
      noise_correlation(noise_only(0.0, Interpretation::Stratonovich), 1.0, cfg);
  for (const auto& c : quiet.value) CHECK(std::abs(c) == 0.0);
  CHECK(std::abs(quiet.value.front()) == 0.0);
}

TEST_CASE("Wiener increment moments") {
  for (double sigma2 : {0.1, 1.0}) {
    const double dt = 1e-3;
    const auto m = sample_wiener_moments(sigma2, dt, 200000, 5);
    CHECK(within_sigma(m.mean.mean.real(), 0.0, m.mean.stderr_re, 5));
    CHECK(within_sigma(m.mean.mean.imag(), 0.0, m.mean.stderr_im, 5));
    CHECK(within_sigma(m.mean_square.mean.real(), 0.0, m.mean_square.stderr_re, 5));
    CHECK(within_sigma(m.mean_square.mean.imag(), 0.0, m.mean_square.stderr_im, 5));
    CHECK(within_sigma(m.mean_abs2, sigma2 * dt, m.mean_abs2_stderr, 5));
  }
}

TEST_CASE("standard errors scale as 1/sqrt(n)") {
  const auto s = noise_only(0.2, Interpretation::Ito);
  const auto small = simulate_ensemble(s, 1.0, ensemble(4000, 1e-2, 1.0, 1));
  const auto large = simulate_ensemble(s, 1.0, ensemble(16000, 1e-2, 1.0, 2));
  const double ratio = small.stderr_re.back() / large.stderr_re.back();
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("reproducible independently of the thread count") {
  AmplifierSde s = noise_only(0.1, Interpretation::Stratonovich);
  s.sigma_v2 = 0.05;
  s.kappa_up = 0.3;
  auto cfg = ensemble(3000, 1e-2, 1.0, 99, 10);
  cfg.threads = 1;
  const auto one = simulate_ensemble(s, Complex(0.5, 0.5), cfg);
  cfg.threads = 3;
  const auto three = simulate_ensemble(s, Complex(0.5, 0.5), cfg);
  CHECK(one.mean_amplitude == three.mean_amplitude);
  CHECK(one.stderr_re == three.stderr_re);
  CHECK(one.correlation == three.correlation);
  CHECK(one.pooled_correlation.mean == three.pooled_correlation.mean);

  cfg.seed = 100;
  const auto other = simulate_ensemble(s, Complex(0.5, 0.5), cfg);
  CHECK(other.mean_amplitude.back() != one.mean_amplitude.back());
}

TEST_CASE("substream seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t j = 0; j < 10000; ++j) seen.insert(substream_seed(1, j));
  CHECK(seen.size() == 10000);
  CHECK(substream_seed(1, 0) != substream_seed(2, 0));
}

TEST_CASE("runaway trajectories raise Divergence") {
  AmplifierSde s;
  s.kappa_up = 2000.0;
  CHECK_THROWS_AS(simulate_ensemble(s, 1.0, ensemble(4, 1e-3, 1.0)), Divergence);
}
