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

#include "oscillab/slle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oscillab::slle {

namespace {

void check_population(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(std::string("population ") + name + " must lie in [0, 1], got " +
                std::to_string(p));
  }
}

}  // namespace

void SlleParams::validate() const {
  if (!(omega0 >= 0.0)) throw Error("omega0 must be nonnegative");
  if (!(gamma1 >= 0.0) || !(gamma2 >= 0.0)) {
    throw Error("gamma1 and gamma2 must be nonnegative");
  }
  check_population(n_up, "n_up");
  check_population(n_dn, "n_dn");
  check_population(n_upp, "n_upp");
  check_population(n_ddn, "n_ddn");
}

Populations thermal_populations(const ThermalSpec& spec) {
  if (!(spec.transition_freq > 0.0)) {
    throw Error("transition frequency must be positive");
  }
  if (!(spec.temperature >= 0.0)) throw Error("temperature must be >= 0");
  if (spec.temperature == 0.0) return {0.0, 1.0};
  const double boltzmann = std::exp(-spec.transition_freq / spec.temperature);
  return {boltzmann / (1.0 + boltzmann), 1.0 / (1.0 + boltzmann)};
}

SlleParams preset(RegimePreset regime, double gamma1, double gamma2) {
  SlleParams p;
  p.omega0 = 1.0;
  p.gamma1 = gamma1;
  p.gamma2 = gamma2;
  p.rotating_frame = true;
  switch (regime) {
    case RegimePreset::QuasilinearAmplifier:
      p.n_up = 0.8;
      p.n_dn = 0.2;
      p.n_upp = 0.5;
      p.n_ddn = 0.5;
      break;
    case RegimePreset::PureNoiseAmplification:
      p.n_up = 0.0;
      p.n_dn = 0.0;
      p.n_upp = 0.5;
      p.n_ddn = 0.5;
      break;
    case RegimePreset::PhenomenologicalVdp:
      p.n_up = 1.0;
      p.n_dn = 0.0;
      p.n_upp = 0.0;
      p.n_ddn = 1.0;
      break;
  }
  p.validate();
  return p;
}

const std::vector<PresetInfo>& preset_table() {
  static const std::vector<PresetInfo> table = {
      {RegimePreset::QuasilinearAmplifier, "a", "quasilinear amplifier",
       "N_up > N_dn (default 0.8/0.2), N_upp = N_ddn = 1/2",
       "d<a>/dt = [(k_up - k_dn)/2 + gamma2] <a>; Ito vs Stratonovich amplifier"},
      {RegimePreset::PureNoiseAmplification, "b",
       "pure noise-induced amplification",
       "N_up = N_dn = 0, N_upp = N_ddn = 1/2",
       "<a(t)> = exp(gamma2 t) <a(0)> from two-photon noise alone"},
      {RegimePreset::PhenomenologicalVdp, "c", "phenomenological van der Pol",
       "N_up = N_ddn = 1, N_dn = N_upp = 0",
       "d rho/dt = -i w0 [a^dag a, rho] + k1 D[a^dag] rho + k2 D[a^2] rho"},
  };
  return table;
}

LindbladModel build_model(const SlleParams& params, int dim) {
  params.validate();
  const auto a = annihilation(dim);
  const auto ad = a.adjoint();
  const Operator h = params.rotating_frame
                         ? Operator(a.space(), MatrixXc::Zero(dim, dim))
                         : std::complex<double>(params.omega0) * (ad * a);
  std::vector<Dissipator> dissipators;
  auto add = [&](double rate, Operator jump) {
    if (rate > 0.0) dissipators.push_back({rate, std::move(jump)});
  };
  add(params.kappa_up(), ad);
  add(params.kappa_dn(), a);
  add(params.kappa_upp(), ad * ad);
  add(params.kappa_ddn(), a * a);
  return LindbladModel(h, std::move(dissipators));
}

LindbladModel phenomenological_vdp_model(double omega0, double kappa1,
                                         double kappa2, int dim) {
  const auto a = annihilation(dim);
  const auto ad = a.adjoint();
  return LindbladModel(std::complex<double>(omega0) * (ad * a),
                       {{kappa1, ad}, {kappa2, a * a}});
}

std::complex<double> linear_coefficient(const SlleParams& params) {
  return {linear_gain_rate(params),
          params.rotating_frame ? 0.0 : -params.omega0};
}

double nonlinear_coefficient(const SlleParams& params) {
  return params.gamma2 * (params.n_upp - params.n_ddn);
}

std::complex<double> amplitude_derivative_prediction(const SlleParams& params,
                                                     const DensityMatrix& rho) {
  if (rho.space().modes() != 1) {
    throw DimensionMismatch("amplitude prediction needs a single-mode state");
  }
  const int dim = rho.space().dim(0);
  const auto a = annihilation(dim);
  const auto ad = a.adjoint();
  const auto mean_a = expectation(a, rho);
  const auto mean_nl = expectation(ad * a * a, rho);
  return linear_coefficient(params) * mean_a +
         nonlinear_coefficient(params) * mean_nl;
}

double linear_gain_rate(const SlleParams& params) {
  return 0.5 * params.gamma1 * (params.n_up - params.n_dn) +
         2.0 * params.gamma2 * params.n_upp;
}

sde::SlCoefficients map_to_classical_sle(const SlleParams& params) {
  return {linear_coefficient(params),
          std::complex<double>(params.gamma2 * (params.n_ddn - params.n_upp))};
}

sde::AmplifierSde classical_amplifier(const SlleParams& params,
                                      sde::Interpretation interpretation) {
  params.validate();
  sde::AmplifierSde out;
  out.kappa_up = params.kappa_up();
  out.kappa_dn = params.kappa_dn();
  out.sigma_v2 = 0.5 * params.gamma1 * (params.n_up + params.n_dn);
  out.sigma_w2 = 0.5 * params.gamma2 * (params.n_upp + params.n_ddn);
  out.interpretation = interpretation;
  return out;
}

double noise_drift_mismatch(const SlleParams& params) {
  return 2.0 * params.kappa_upp() -
         2.0 * classical_amplifier(params, sde::Interpretation::Stratonovich)
                   .sigma_w2;
}

double default_time_step(const SlleParams& params) {
  const double total = params.kappa_up() + params.kappa_dn() +
                       params.kappa_upp() + params.kappa_ddn();
  const double scale =
      std::max(params.rotating_frame ? 0.0 : params.omega0, total);
  return scale > 0.0 ? 1e-3 / scale : 1e-3;
}

}  // namespace oscillab::slle
