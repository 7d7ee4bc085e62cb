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

#include "oscillab/sde.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <thread>

#include "oscillab/error.hpp"

namespace oscillab::sde {

namespace {

constexpr double kOverflowGuard = 1e100;
constexpr long kBlockSize = 1024;
const Complex kI(0.0, 1.0);

bool escaped(Complex z) {
  return !std::isfinite(z.real()) || !std::isfinite(z.imag()) ||
         std::abs(z) > kOverflowGuard;
}

double stderr_of(double sum, double sumsq, long n) {
  if (n < 2) return 0.0;
  const double mean = sum / n;
  const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1));
  return std::sqrt(var / n);
}

// Running sums of one real quantity.
struct Moments {
  double sum = 0;
  double sumsq = 0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
  }
  void merge(const Moments& o) {
    sum += o.sum;
    sumsq += o.sumsq;
  }
};

struct RecordSums {
  Moments re, im, proj, corr_re, corr_im;
  double abs2 = 0;
  void merge(const RecordSums& o) {
    re.merge(o.re);
    im.merge(o.im);
    proj.merge(o.proj);
    corr_re.merge(o.corr_re);
    corr_im.merge(o.corr_im);
    abs2 += o.abs2;
  }
};

struct BlockSums {
  std::vector<RecordSums> records;
  Moments pooled_re, pooled_im, resid_re, resid_im;
  void merge(const BlockSums& o) {
    for (std::size_t k = 0; k < records.size(); ++k) {
      records[k].merge(o.records[k]);
    }
    pooled_re.merge(o.pooled_re);
    pooled_im.merge(o.pooled_im);
    resid_re.merge(o.resid_re);
    resid_im.merge(o.resid_im);
  }
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string_view to_string(Interpretation interpretation) {
  return interpretation == Interpretation::Ito ? "ito" : "stratonovich";
}

Interpretation parse_interpretation(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "ito") return Interpretation::Ito;
  if (lower == "stratonovich") return Interpretation::Stratonovich;
  throw ConfigError("unknown interpretation '" + std::string(text) +
                    "' (expected ito or stratonovich)");
}

void AmplifierSde::validate() const {
  if (!(kappa_up >= 0 && kappa_dn >= 0)) {
    throw Error("amplifier rates must be nonnegative");
  }
  if (!(sigma_v2 >= 0 && sigma_w2 >= 0)) {
    throw Error("noise intensities must be nonnegative");
  }
}

long EnsembleConfig::steps() const {
  if (!(dt > 0) || !(t_final > 0)) {
    throw ConfigError("ensemble needs dt > 0 and t_final > 0");
  }
  if (n_traj < 1) throw ConfigError("ensemble needs n_traj >= 1");
  if (record_stride < 1) throw ConfigError("record_stride must be >= 1");
  const double ratio = t_final / dt;
  const long n = std::lround(ratio);
  if (n < 1 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("t_final/dt must be a positive integer, got " +
                      std::to_string(ratio));
  }
  return n;
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 is a bijection and the golden-ratio increment is odd, so
  // distinct indices give distinct substream seeds for a fixed seed.
  return splitmix64(seed + 0x9E3779B97F4A7C15ULL * index);
}

ComplexTrajectory integrate_sle(const SlCoefficients& coeffs, Complex alpha0,
                                double dt, double t_final, int record_stride) {
  if (!(dt > 0)) throw Error("integrate_sle: dt must be positive");
  if (record_stride < 1) throw Error("integrate_sle: record_stride < 1");
  const long steps = std::lround(t_final / dt);
  auto rhs = [&](Complex a) {
    return coeffs.lambda1 * a - coeffs.lambda2 * std::norm(a) * a;
  };
  ComplexTrajectory traj;
  traj.times.push_back(0.0);
  traj.values.push_back(alpha0);
  Complex a = alpha0;
  for (long n = 1; n <= steps; ++n) {
    const Complex k1 = rhs(a);
    const Complex k2 = rhs(a + 0.5 * dt * k1);
    const Complex k3 = rhs(a + 0.5 * dt * k2);
    const Complex k4 = rhs(a + dt * k3);
    a += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (escaped(a)) {
      throw Divergence("Stuart-Landau amplitude diverged", n * dt);
    }
    if (n % record_stride == 0 || n == steps) {
      traj.times.push_back(n * dt);
      traj.values.push_back(a);
    }
  }
  return traj;
}

double limit_cycle_amplitude(const SlCoefficients& coeffs) {
  const double g = coeffs.lambda1.real();
  const double s = coeffs.lambda2.real();
  if (g <= 0) return 0.0;
  if (s <= 0) {
    throw NoStableCycle(
        "Re lambda1 > 0 with Re lambda2 <= 0: amplitude grows without bound");
  }
  return std::sqrt(g / s);
}

double phase_velocity(const ComplexTrajectory& traj, double t_from) {
  std::size_t first = 0;
  while (first < traj.times.size() && traj.times[first] < t_from) ++first;
  if (first + 1 >= traj.times.size()) {
    throw Error("phase_velocity: fewer than two records after t_from");
  }
  double unwrapped = 0;
  for (std::size_t k = first + 1; k < traj.values.size(); ++k) {
    // arg of the ratio is the wrapped phase increment
    unwrapped += std::arg(traj.values[k] / traj.values[k - 1]);
  }
  return unwrapped / (traj.times.back() - traj.times[first]);
}

double drift_correction(const AmplifierSde& sde) {
  // Midpoint evaluation of g = -2i conj(a) contributes
  // (1/2) (-2i) conj(dg) dW with conj(dg) = 2i a conj(dW), i.e. 2 a |dW|^2.
  return 2.0 * sde.sigma_w2;
}

double predicted_mean_growth_rate(const AmplifierSde& sde) {
  const double base = sde.linear_rate();
  return sde.interpretation == Interpretation::Stratonovich
             ? base + drift_correction(sde)
             : base;
}

EnsembleStats simulate_ensemble(const AmplifierSde& sde, Complex alpha0,
                                const EnsembleConfig& config) {
  sde.validate();
  const long steps = config.steps();
  const int stride = config.record_stride;
  const double dt = config.dt;

  std::vector<long> record_steps;
  for (long n = 0; n <= steps; ++n) {
    if (n % stride == 0 || n == steps) record_steps.push_back(n);
  }
  const std::size_t n_records = record_steps.size();

  const double abs0 = std::abs(alpha0);
  const Complex phase0 = abs0 > 0 ? alpha0 / abs0 : Complex(1.0, 0.0);
  const double rate = sde.linear_rate();
  const double v_scale = ComplexWienerSource::scale(sde.sigma_v2, dt);
  const double w_scale = ComplexWienerSource::scale(sde.sigma_w2, dt);
  const bool strat = sde.interpretation == Interpretation::Stratonovich;

  const long n_blocks = (config.n_traj + kBlockSize - 1) / kBlockSize;
  std::vector<BlockSums> blocks(static_cast<std::size_t>(n_blocks));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(n_blocks));

  auto run_block = [&](long b) {
    BlockSums& acc = blocks[static_cast<std::size_t>(b)];
    acc.records.assign(n_records, RecordSums{});
    const long begin = b * kBlockSize;
    const long end = std::min(config.n_traj, begin + kBlockSize);
    for (long j = begin; j < end; ++j) {
      ComplexWienerSource noise(
          substream_seed(config.seed, static_cast<std::uint64_t>(j)));
      Complex a = alpha0;
      Complex corr_sum = 0.0;
      Complex resid_sum = 0.0;
      Complex last_corr = 0.0;
      std::size_t rec = 0;
      auto record = [&](Complex corr) {
        RecordSums& r = acc.records[rec++];
        r.re.add(a.real());
        r.im.add(a.imag());
        r.abs2 += std::norm(a);
        r.proj.add((a * std::conj(phase0)).real());
        r.corr_re.add(corr.real());
        r.corr_im.add(corr.imag());
      };
      record(0.0);
      for (long n = 1; n <= steps; ++n) {
        const Complex dv = noise.draw(v_scale);
        const Complex dw = noise.draw(w_scale);
        const Complex additive = -kI * dv;
        Complex next;
        Complex eval;
        if (strat) {
          const Complex pred =
              a + rate * a * dt + additive - 2.0 * kI * std::conj(a) * dw;
          next = a + 0.5 * rate * (a + pred) * dt + additive -
                 kI * (std::conj(a) + std::conj(pred)) * dw;
          eval = 0.5 * (a + next);
        } else {
          next = a + rate * a * dt + additive - 2.0 * kI * std::conj(a) * dw;
          eval = a;
        }
        const Complex corr = eval * std::conj(dw) / dt;
        const Complex predicted =
            strat ? -kI * sde.sigma_w2 * std::conj(a) : Complex(0.0);
        corr_sum += corr;
        resid_sum += corr - predicted;
        last_corr = corr;
        a = next;
        if (escaped(a)) {
          throw Divergence("amplifier trajectory " + std::to_string(j) +
                               " diverged",
                           n * dt);
        }
        if (rec < n_records && record_steps[rec] == n) record(last_corr);
      }
      const Complex pooled = corr_sum / static_cast<double>(steps);
      const Complex resid = resid_sum / static_cast<double>(steps);
      acc.pooled_re.add(pooled.real());
      acc.pooled_im.add(pooled.imag());
      acc.resid_re.add(resid.real());
      acc.resid_im.add(resid.imag());
    }
  };

  unsigned threads = config.threads != 0 ? config.threads
                                         : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, n_blocks));
  std::atomic<long> next_block{0};
  auto worker = [&] {
    for (long b = next_block++; b < n_blocks; b = next_block++) {
      try {
        run_block(b);
      } catch (...) {
        failures[static_cast<std::size_t>(b)] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  // Fixed block order keeps the reduction independent of scheduling.
  BlockSums total = blocks.front();
  for (std::size_t b = 1; b < blocks.size(); ++b) total.merge(blocks[b]);

  const long n = config.n_traj;
  EnsembleStats stats;
  stats.n_traj = n;
  for (std::size_t k = 0; k < n_records; ++k) {
    const RecordSums& r = total.records[k];
    stats.times.push_back(record_steps[k] * dt);
    stats.mean_amplitude.emplace_back(r.re.sum / n, r.im.sum / n);
    stats.mean_sq_amplitude.push_back(r.abs2 / n);
    stats.stderr_re.push_back(stderr_of(r.re.sum, r.re.sumsq, n));
    stats.stderr_im.push_back(stderr_of(r.im.sum, r.im.sumsq, n));
    stats.projected_mean.push_back(r.proj.sum / n);
    stats.projected_stderr.push_back(stderr_of(r.proj.sum, r.proj.sumsq, n));
    stats.correlation.emplace_back(r.corr_re.sum / n, r.corr_im.sum / n);
    stats.correlation_stderr_re.push_back(
        stderr_of(r.corr_re.sum, r.corr_re.sumsq, n));
    stats.correlation_stderr_im.push_back(
        stderr_of(r.corr_im.sum, r.corr_im.sumsq, n));
  }
  auto pooled = [n](const Moments& re, const Moments& im) {
    return PooledEstimate{Complex(re.sum / n, im.sum / n),
                          stderr_of(re.sum, re.sumsq, n),
                          stderr_of(im.sum, im.sumsq, n)};
  };
  stats.pooled_correlation = pooled(total.pooled_re, total.pooled_im);
  stats.pooled_correlation_residual = pooled(total.resid_re, total.resid_im);
  return stats;
}

CorrelationSeries noise_correlation(const AmplifierSde& sde, Complex alpha0,
                                    const EnsembleConfig& config) {
  EnsembleStats stats = simulate_ensemble(sde, alpha0, config);
  return CorrelationSeries{std::move(stats.times),
                           std::move(stats.correlation),
                           std::move(stats.correlation_stderr_re),
                           std::move(stats.correlation_stderr_im),
                           stats.pooled_correlation,
                           stats.pooled_correlation_residual};
}

GrowthEstimate measured_growth_rate(const EnsembleStats& stats,
                                    std::size_t index) {
  const double t = stats.times.at(index);
  const double m0 = stats.projected_mean.at(0);
  const double m = stats.projected_mean.at(index);
  if (!(t > 0) || !(m0 > 0) || !(m > 0)) {
    throw Error("growth rate needs t > 0 and a positive projected mean");
  }
  return {std::log(m / m0) / t, stats.projected_stderr[index] / (m * t)};
}

WienerMoments sample_wiener_moments(double sigma2, double dt, long samples,
                                    std::uint64_t seed) {
  ComplexWienerSource source(seed);
  const double scale = ComplexWienerSource::scale(sigma2, dt);
  Moments re, im, sq_re, sq_im, abs2;
  for (long k = 0; k < samples; ++k) {
    const Complex w = source.draw(scale);
    const Complex w2 = w * w;
    re.add(w.real());
    im.add(w.imag());
    sq_re.add(w2.real());
    sq_im.add(w2.imag());
    abs2.add(std::norm(w));
  }
  const long n = samples;
  WienerMoments out;
  out.samples = n;
  out.mean = {Complex(re.sum / n, im.sum / n), stderr_of(re.sum, re.sumsq, n),
              stderr_of(im.sum, im.sumsq, n)};
  out.mean_square = {Complex(sq_re.sum / n, sq_im.sum / n),
                     stderr_of(sq_re.sum, sq_re.sumsq, n),
                     stderr_of(sq_im.sum, sq_im.sumsq, n)};
  out.mean_abs2 = abs2.sum / n;
  out.mean_abs2_stderr = stderr_of(abs2.sum, abs2.sumsq, n);
  return out;
}

}  // namespace oscillab::sde
