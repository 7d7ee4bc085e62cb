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

// Classical oscillator dynamics: the deterministic Stuart-Landau equation and
// a complex amplifier SDE with additive and multiplicative (conjugate) noise,
//
//   d a = (kappa_up - kappa_dn)/2 a dt - i dV - 2i conj(a) dW,
//
// integrated under either the Ito or the Stratonovich reading.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace oscillab::sde {

using Complex = std::complex<double>;

/// d alpha/dt = lambda1 alpha - lambda2 |alpha|^2 alpha.
struct SlCoefficients {
  Complex lambda1;
  Complex lambda2;
};

enum class Interpretation { Ito, Stratonovich };

std::string_view to_string(Interpretation interpretation);
/// Accepts "ito" or "stratonovich" (case-insensitive).
Interpretation parse_interpretation(std::string_view text);

struct AmplifierSde {
  double kappa_up = 0;
  double kappa_dn = 0;
  /// E|dV|^2 = sigma_v2 dt.
  double sigma_v2 = 0;
  /// E|dW|^2 = sigma_w2 dt.
  double sigma_w2 = 0;
  Interpretation interpretation = Interpretation::Stratonovich;

  double linear_rate() const { return 0.5 * (kappa_up - kappa_dn); }
  void validate() const;
};

struct EnsembleConfig {
  long n_traj = 1000;
  double dt = 1e-3;
  double t_final = 1.0;
  std::uint64_t seed = 1;
  int record_stride = 1;
  /// Worker threads; 0 picks the hardware concurrency. Results do not
  /// depend on this value.
  unsigned threads = 0;

  /// Number of steps; throws unless t_final/dt is an integer.
  long steps() const;
};

struct ComplexTrajectory {
  std::vector<double> times;
  std::vector<Complex> values;
};

/// Deterministic RK4 integration of the Stuart-Landau equation.
ComplexTrajectory integrate_sle(const SlCoefficients& coeffs, Complex alpha0,
                                double dt, double t_final,
                                int record_stride = 1);

/// sqrt(Re lambda1 / Re lambda2) on a stable cycle, 0 when the origin is
/// stable. Throws NoStableCycle when Re lambda1 > 0 and Re lambda2 <= 0.
double limit_cycle_amplitude(const SlCoefficients& coeffs);

/// Mean angular velocity of arg(alpha) over the records with time >= t_from.
double phase_velocity(const ComplexTrajectory& traj, double t_from);

/// Additional linear drift rate picked up by the mean when the Stratonovich
/// equation is rewritten in Ito form: 2 sigma_w2.
double drift_correction(const AmplifierSde& sde);

/// Growth rate of Re E[a]/a0 implied by the chosen interpretation.
double predicted_mean_growth_rate(const AmplifierSde& sde);

/// Ensemble mean of a per-trajectory quantity and its standard errors.
struct PooledEstimate {
  Complex mean;
  double stderr_re = 0;
  double stderr_im = 0;
};

struct EnsembleStats {
  long n_traj = 0;
  std::vector<double> times;
  std::vector<Complex> mean_amplitude;
  std::vector<double> mean_sq_amplitude;
  std::vector<double> stderr_re;
  std::vector<double> stderr_im;
  /// Re(a conj(a0))/|a0|, i.e. the amplitude projected on the initial phase.
  std::vector<double> projected_mean;
  std::vector<double> projected_stderr;
  /// C(t) = E[a_eval conj(dW)]/dt for the step ending at t (0 at t = 0).
  /// a_eval is where the scheme evaluates the multiplicative coefficient:
  /// the left point for Ito, the step midpoint for Stratonovich.
  std::vector<Complex> correlation;
  std::vector<double> correlation_stderr_re;
  std::vector<double> correlation_stderr_im;
  /// Per-trajectory time average of the correlation estimator over all steps.
  PooledEstimate pooled_correlation;
  /// Same average after subtracting the predicted correlation
  /// (-i sigma_w2 conj(a) for Stratonovich, 0 for Ito); zero-mean when the
  /// prediction holds.
  PooledEstimate pooled_correlation_residual;
};

EnsembleStats simulate_ensemble(const AmplifierSde& sde, Complex alpha0,
                                const EnsembleConfig& config);

struct CorrelationSeries {
  std::vector<double> times;
  std::vector<Complex> value;
  std::vector<double> stderr_re;
  std::vector<double> stderr_im;
  PooledEstimate pooled;
  PooledEstimate pooled_residual;
};

CorrelationSeries noise_correlation(const AmplifierSde& sde, Complex alpha0,
                                    const EnsembleConfig& config);

struct GrowthEstimate {
  double rate = 0;
  double stderr = 0;
};

/// log(projected mean)/t at record `index`, with a delta-method error.
GrowthEstimate measured_growth_rate(const EnsembleStats& stats,
                                    std::size_t index);

/// Seed of the independent substream used by trajectory `index`.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

/// Complex Wiener increments dW = (xi1 + i xi2) sqrt(sigma2 dt / 2).
class ComplexWienerSource {
 public:
  explicit ComplexWienerSource(std::uint64_t seed) : engine_(seed) {}

  Complex draw(double scale) {
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {scale * re, scale * im};
  }

  static double scale(double sigma2, double dt) {
    return std::sqrt(0.5 * sigma2 * dt);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

struct WienerMoments {
  long samples = 0;
  PooledEstimate mean;         // E[dW]
  PooledEstimate mean_square;  // E[dW^2]
  double mean_abs2 = 0;        // E|dW|^2
  double mean_abs2_stderr = 0;
};

/// Self-test of the increment generator.
WienerMoments sample_wiener_moments(double sigma2, double dt, long samples,
                                    std::uint64_t seed);

}  // namespace oscillab::sde
