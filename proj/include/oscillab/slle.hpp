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

// Stuart-Landau-Langevin oscillator: a bosonic mode coupled to a linear gain
// medium (populations n_up, n_dn, rate gamma1) and a two-photon absorber
// (populations n_upp, n_ddn, rate gamma2).
//
// In the state picture the mode obeys the four-dissipator master equation
//
//   d rho/dt = -i omega0 [a^dag a, rho]
//              + gamma1 n_up  D[a^dag]  rho + gamma1 n_dn  D[a]  rho
//              + gamma2 n_upp D[a^dag2] rho + gamma2 n_ddn D[a^2] rho,
//
// whose adjoint generator gives, exactly on the untruncated space,
//
//   d<a>/dt = [-i omega0 + gamma1 (n_up - n_dn)/2 + 2 gamma2 n_upp] <a>
//             + gamma2 (n_upp - n_ddn) <a^dag a^2>.
//
// The 2 gamma2 n_upp term is the noise-induced amplification: it is present
// even when the gain medium is removed and the absorber is unbiased.

#pragma once

#include <complex>
#include <string>
#include <vector>

#include "oscillab/fockspace.hpp"
#include "oscillab/lindblad.hpp"
#include "oscillab/sde.hpp"

namespace oscillab::slle {

struct SlleParams {
  double omega0 = 0;
  double gamma1 = 0;
  double gamma2 = 0;
  double n_up = 0;
  double n_dn = 0;
  double n_upp = 0;
  double n_ddn = 0;
  /// Drop the free rotation (H = 0).
  bool rotating_frame = true;

  double kappa_up() const { return gamma1 * n_up; }
  double kappa_dn() const { return gamma1 * n_dn; }
  double kappa_upp() const { return gamma2 * n_upp; }
  double kappa_ddn() const { return gamma2 * n_ddn; }

  /// Throws oscillab::Error on negative rates or populations outside [0, 1].
  void validate() const;
};

/// Two-level Boltzmann populations with k_B = 1.
struct ThermalSpec {
  double transition_freq = 1;
  double temperature = 0;
};

struct Populations {
  double excited = 0;
  double ground = 1;
};

Populations thermal_populations(const ThermalSpec& spec);

enum class RegimePreset {
  QuasilinearAmplifier,    // (a)
  PureNoiseAmplification,  // (b)
  PhenomenologicalVdp,     // (c)
};

SlleParams preset(RegimePreset regime, double gamma1, double gamma2);

struct PresetInfo {
  RegimePreset regime;
  std::string key;    // "a", "b", "c"
  std::string name;
  std::string populations;
  std::string exercises;
};

const std::vector<PresetInfo>& preset_table();

LindbladModel build_model(const SlleParams& params, int dim);

/// omega0 a^dag a Hamiltonian with kappa1 D[a^dag] + kappa2 D[a^2]; the
/// phenomenological van der Pol master equation built directly.
LindbladModel phenomenological_vdp_model(double omega0, double kappa1,
                                         double kappa2, int dim);

/// Coefficient of <a> in the averaged amplitude equation.
std::complex<double> linear_coefficient(const SlleParams& params);
/// Coefficient of <a^dag a^2> in the averaged amplitude equation.
double nonlinear_coefficient(const SlleParams& params);

std::complex<double> amplitude_derivative_prediction(const SlleParams& params,
                                                     const DensityMatrix& rho);

/// Small-amplitude growth rate of |<a>|: gamma1 (n_up - n_dn)/2 + 2 gamma2 n_upp.
double linear_gain_rate(const SlleParams& params);

/// Semiclassical closure <a^dag a^2> ~ |<a>|^2 <a>.
sde::SlCoefficients map_to_classical_sle(const SlleParams& params);

/// Classical amplifier with symmetrized intensities
/// sigma_v2 = gamma1 (n_up + n_dn)/2 and sigma_w2 = gamma2 (n_upp + n_ddn)/2.
sde::AmplifierSde classical_amplifier(const SlleParams& params,
                                      sde::Interpretation interpretation);

/// 2 gamma2 n_upp - 2 sigma_w2: how far the symmetrized classical noise
/// misses the quantum noise-induced gain (zero when n_upp == n_ddn).
double noise_drift_mismatch(const SlleParams& params);

/// 1e-3 / max(omega0, total dissipation rate), or 1e-3 when both vanish.
double default_time_step(const SlleParams& params);

}  // namespace oscillab::slle
