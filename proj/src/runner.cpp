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

#include "oscillab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "oscillab/error.hpp"
#include "oscillab/fockspace.hpp"
#include "oscillab/lindblad.hpp"
#include "oscillab/sde.hpp"
#include "oscillab/slle.hpp"
#include "oscillab/svg.hpp"
#include "oscillab/vdp.hpp"

namespace oscillab::cli {

namespace {

using Complex = std::complex<double>;

// Records written to CSV are thinned to about this many rows by default.
constexpr long kTargetRows = 5000;

const std::vector<std::string> kCommonKeys = {"seed", "output_dir"};

const KeySpec* find_key(const std::string& name) {
  for (const auto& k : key_table()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

const ScenarioSpec& find_scenario(const std::string& name) {
  for (const auto& s : scenario_table()) {
    if (s.name == name) return s;
  }
  if (name.empty()) throw ConfigError("no scenario given");
  throw ConfigError("unknown scenario '" + name + "'");
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

bool integral(double v) { return std::isfinite(v) && v == std::floor(v); }

void check_type(const KeySpec& spec, const Json& value) {
  bool ok = false;
  const char* expected = "";
  switch (spec.type) {
    case KeyType::Number:
      ok = value.is_number();
      expected = "a number";
      break;
    case KeyType::Integer:
      ok = value.is_number_integer() ||
           (value.is_number_float() && integral(value.get<double>()));
      expected = "an integer";
      break;
    case KeyType::Boolean:
      ok = value.is_boolean();
      expected = "true or false";
      break;
    case KeyType::Text:
      ok = value.is_string();
      expected = "a string";
      break;
  }
  if (!ok) {
    throw ConfigError("key '" + spec.name + "' must be " + expected + ", got " +
                      value.dump());
  }
}

// Reads keys for one scenario, applies fallbacks and records every
// resolved value in call order.
class Resolver {
 public:
  Resolver(const RunConfig& config, const ScenarioSpec& spec)
      : config_(config), spec_(spec) {
    for (const auto& [key, value] : config.values.items()) {
      const KeySpec* ks = find_key(key);
      if (ks == nullptr) throw ConfigError("unknown key '" + key + "'");
      if (!contains(spec.required, key) && !contains(spec.optional, key) &&
          !contains(kCommonKeys, key)) {
        throw ConfigError("key '" + key + "' is not used by scenario '" +
                          spec.name + "'");
      }
      check_type(*ks, value);
    }
    for (const auto& key : spec.required) {
      if (!config.values.contains(key)) {
        throw ConfigError("scenario '" + spec.name + "' requires key '" + key +
                          "'");
      }
    }
    resolved_["scenario"] = spec.name;
  }

  double number(const std::string& key, std::optional<double> fallback = {}) {
    double v = 0;
    if (const Json* j = find(key)) {
      v = j->get<double>();
    } else if (fallback) {
      v = *fallback;
    } else {
      throw missing(key);
    }
    if (!std::isfinite(v)) throw ConfigError("key '" + key + "' is not finite");
    resolved_[key] = v;
    return v;
  }

  std::int64_t integer(const std::string& key,
                       std::optional<std::int64_t> fallback = {},
                       std::int64_t minimum = 0) {
    std::int64_t v = 0;
    if (const Json* j = find(key)) {
      v = j->is_number_float() ? static_cast<std::int64_t>(j->get<double>())
                               : j->get<std::int64_t>();
    } else if (fallback) {
      v = *fallback;
    } else {
      throw missing(key);
    }
    if (v < minimum) {
      throw ConfigError("key '" + key + "' must be >= " + std::to_string(minimum));
    }
    resolved_[key] = v;
    return v;
  }

  bool boolean(const std::string& key, std::optional<bool> fallback = {}) {
    bool v = false;
    if (const Json* j = find(key)) {
      v = j->get<bool>();
    } else if (fallback) {
      v = *fallback;
    } else {
      throw missing(key);
    }
    resolved_[key] = v;
    return v;
  }

  std::string text(const std::string& key,
                   std::optional<std::string> fallback = {}) {
    std::string v;
    if (const Json* j = find(key)) {
      v = j->get<std::string>();
    } else if (fallback) {
      v = *fallback;
    } else {
      throw missing(key);
    }
    resolved_[key] = v;
    return v;
  }

  std::uint64_t seed() {
    return static_cast<std::uint64_t>(integer("seed", 1));
  }

  const Json& resolved() const { return resolved_; }
  const ScenarioSpec& spec() const { return spec_; }

 private:
  const Json* find(const std::string& key) const {
    const auto it = config_.values.find(key);
    return it == config_.values.end() ? nullptr : &*it;
  }

  ConfigError missing(const std::string& key) const {
    return ConfigError("scenario '" + spec_.name + "' requires key '" + key + "'");
  }

  const RunConfig& config_;
  const ScenarioSpec& spec_;
  Json resolved_ = Json::object();
};

long step_count(double dt, double t_final) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(t_final > 0.0)) throw ConfigError("t_final must be positive");
  const double ratio = t_final / dt;
  const long steps = std::lround(ratio);
  if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio) {
    throw ConfigError("t_final must be an integer multiple of dt");
  }
  return steps;
}

int record_stride(Resolver& r, long steps) {
  const auto fallback = std::max<std::int64_t>(1, steps / kTargetRows);
  return static_cast<int>(r.integer("record_stride", fallback, 1));
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Csv {
 public:
  explicit Csv(std::initializer_list<std::string_view> columns) {
    bool first = true;
    for (auto c : columns) {
      if (!first) out_ << ',';
      out_ << c;
      first = false;
    }
    out_ << '\n';
  }

  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      if (!first) out_ << ',';
      out_ << format_number(v);
      first = false;
    }
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

Metric metric_abs(std::string name, double value, double expected,
                  double tolerance) {
  return {std::move(name), value, expected, tolerance, "abs",
          std::abs(value - expected) <= tolerance};
}

Metric metric_max(std::string name, double value, double tolerance) {
  return {std::move(name), value, std::nullopt, tolerance, "max",
          value <= tolerance};
}

Metric metric_min(std::string name, double value, double tolerance) {
  return {std::move(name), value, std::nullopt, tolerance, "min",
          value >= tolerance};
}

Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

// Least-squares slope of y against x.
double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

// ---------------------------------------------------------------------------
// master-equation scenarios

slle::SlleParams master_equation_params(Resolver& r, const std::string& name) {
  slle::SlleParams p;
  if (name == "me") {
    p.gamma1 = r.number("gamma1");
    p.gamma2 = r.number("gamma2");
    p.n_up = r.number("n_up");
    p.n_dn = r.number("n_dn");
    p.n_upp = r.number("n_upp");
    p.n_ddn = r.number("n_ddn");
    p.omega0 = 1.0;
  } else if (name == "preset-a") {
    const double g1 = r.number("gamma1");
    const double g2 = r.number("gamma2");
    p = slle::preset(slle::RegimePreset::QuasilinearAmplifier, g1, g2);
    p.n_up = r.number("n_up", p.n_up);
    p.n_dn = r.number("n_dn", p.n_dn);
  } else if (name == "preset-b") {
    p = slle::preset(slle::RegimePreset::PureNoiseAmplification, 0.0,
                     r.number("gamma2"));
  } else {
    const double g1 = r.number("gamma1");
    const double g2 = r.number("gamma2");
    p = slle::preset(slle::RegimePreset::PhenomenologicalVdp, g1, g2);
  }
  p.omega0 = r.number("omega0", p.omega0);
  p.rotating_frame = r.boolean("rotating_frame", p.rotating_frame);
  try {
    p.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return p;
}

RunResult run_master_equation(Resolver& r, const std::string& name) {
  const auto p = master_equation_params(r, name);
  const int dim = static_cast<int>(r.integer("dim", 30, 2));
  const double alpha_re = r.number("alpha_re", 0.2);
  const Complex alpha(alpha_re, r.number("alpha_im", 0.0));
  const double t_final = r.number("t_final", 1.0);
  // Largest step not above the module default that divides t_final.
  const double dt_max = slle::default_time_step(p);
  const double dt = r.number(
      "dt", t_final > 0.0 ? t_final / std::ceil(t_final / dt_max - 1e-9)
                          : dt_max);
  const long steps = step_count(dt, t_final);
  const int stride = record_stride(r, steps);
  r.seed();

  const auto model = slle::build_model(p, dim);
  const auto a = annihilation(dim);
  const auto ad = a.adjoint();
  const std::vector<NamedOperator> observables = {
      {"a", a}, {"n", ad * a}, {"adag_a2", ad * a * a}};
  EvolveOptions options;
  options.record_stride = stride;
  options.throw_on_truncation = false;
  const auto traj =
      evolve_rk4(model, coherent_density(dim, alpha), dt, steps, observables,
                 options);

  const auto mean_a = traj.series("a");
  const auto mean_n = traj.series("n");
  const auto mean_nl = traj.series("adag_a2");
  const std::size_t records = traj.times.size();

  RunResult out;
  RunSummary& s = out.summary;
  s.scenario = name;
  s.parameters = r.resolved();

  Csv csv({"t", "re_mean_a", "im_mean_a", "mean_n", "re_mean_adag_a2",
           "im_mean_adag_a2", "trace_err", "tail_pop"});
  for (std::size_t k = 0; k < records; ++k) {
    csv.row({traj.times[k], mean_a[k].real(), mean_a[k].imag(),
             mean_n[k].real(), mean_nl[k].real(), mean_nl[k].imag(),
             traj.diagnostics[k].trace_error,
             traj.diagnostics[k].tail_population});
  }
  out.csv = csv.str();

  // Ehrenfest check: five-point differences of <a> on equally spaced
  // records against the closed amplitude equation on the same states.
  const Complex lin = slle::linear_coefficient(p);
  const double nonlin = slle::nonlinear_coefficient(p);
  const double h = stride * dt;
  double ehrenfest = 0;
  for (std::size_t k = 2; k + 2 < records; ++k) {
    if (std::abs(traj.times[k + 2] - traj.times[k - 2] - 4.0 * h) > 1e-9 * h) {
      continue;
    }
    const Complex fd = (mean_a[k - 2] - 8.0 * mean_a[k - 1] +
                        8.0 * mean_a[k + 1] - mean_a[k + 2]) /
                       (12.0 * h);
    const Complex predicted = lin * mean_a[k] + nonlin * mean_nl[k];
    const double scale = std::max(std::abs(predicted), std::abs(fd));
    if (scale < 1e-300) continue;
    ehrenfest = std::max(ehrenfest, std::abs(fd - predicted) / scale);
  }
  // Reported, not asserted: near the truncation edge the finite space
  // departs from the closed equation before the tail threshold trips.
  s.info["ehrenfest_rel_deviation"] = ehrenfest;

  const double predicted_rate = slle::linear_gain_rate(p);
  if (nonlin == 0.0 && std::abs(alpha) > 0.0) {
    std::vector<double> logs;
    logs.reserve(records);
    for (const auto& z : mean_a) logs.push_back(std::log(std::abs(z)));
    s.metrics.push_back(metric_abs("growth_rate",
                                   fitted_slope(traj.times, logs),
                                   predicted_rate, 1e-3));
  }

  double trace_err = 0, herm = 0, min_eig = 0;
  for (const auto& d : traj.diagnostics) {
    trace_err = std::max(trace_err, d.trace_error);
    herm = std::max(herm, d.hermiticity_residual);
    min_eig = std::min(min_eig, d.min_eigenvalue);
  }
  s.metrics.push_back(metric_max("max_trace_error", trace_err, 1e-9));
  s.metrics.push_back(metric_max("max_hermiticity_residual", herm, 1e-10));
  s.metrics.push_back(metric_min("min_eigenvalue", min_eig, -1e-8));

  const double tail = traj.max_tail();
  s.info["max_tail_population"] = tail;
  s.info["predicted_growth_rate"] = predicted_rate;
  s.info["linear_coefficient"] = complex_json(lin);
  s.info["nonlinear_coefficient"] = nonlin;
  s.info["final_mean_a"] = complex_json(mean_a.back());
  s.info["final_mean_n"] = mean_n.back().real();
  s.info["steps"] = steps;
  if (traj.truncation_flagged) {
    s.warnings.push_back("top Fock level population reached " +
                         format_number(tail) +
                         " (threshold 1e-06); results may depend on dim");
  }

  std::vector<double> abs_a, n_real;
  for (std::size_t k = 0; k < records; ++k) {
    abs_a.push_back(std::abs(mean_a[k]));
    n_real.push_back(mean_n[k].real());
  }
  out.svg = svg::line_chart(name + ": mean amplitude and photon number", "t",
                            traj.times, {{"|<a>|", abs_a}, {"<n>", n_real}});
  return out;
}

// ---------------------------------------------------------------------------
// classical scenarios

RunResult run_sde(Resolver& r) {
  const auto interpretation = [&] {
    const auto text = r.text("interpretation");
    try {
      return sde::parse_interpretation(text);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }();
  slle::SlleParams p;
  p.gamma1 = r.number("gamma1", 0.0);
  p.gamma2 = r.number("gamma2");
  p.n_up = r.number("n_up", 0.0);
  p.n_dn = r.number("n_dn", 0.0);
  p.n_upp = r.number("n_upp", 0.5);
  p.n_ddn = r.number("n_ddn", 0.5);
  try {
    p.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  auto amp = slle::classical_amplifier(p, interpretation);
  amp.sigma_v2 = r.number("sigma_v2", amp.sigma_v2);
  amp.sigma_w2 = r.number("sigma_w2", amp.sigma_w2);
  if (amp.sigma_v2 < 0 || amp.sigma_w2 < 0) {
    throw ConfigError("noise intensities must be nonnegative");
  }

  sde::EnsembleConfig cfg;
  cfg.n_traj = r.integer("n_traj", 10000, 2);
  const double alpha_re = r.number("alpha_re", 1.0);
  const Complex alpha(alpha_re, r.number("alpha_im", 0.0));
  cfg.dt = r.number("dt", 1e-3);
  cfg.t_final = r.number("t_final", 1.0);
  const long steps = step_count(cfg.dt, cfg.t_final);
  cfg.record_stride = record_stride(r, steps);
  cfg.seed = r.seed();

  const auto stats = sde::simulate_ensemble(amp, alpha, cfg);

  RunResult out;
  RunSummary& s = out.summary;
  s.scenario = "sde";
  s.parameters = r.resolved();

  Csv csv({"t", "re_mean", "im_mean", "mean_abs2", "stderr_re", "stderr_im",
           "re_corr", "im_corr"});
  for (std::size_t k = 0; k < stats.times.size(); ++k) {
    csv.row({stats.times[k], stats.mean_amplitude[k].real(),
             stats.mean_amplitude[k].imag(), stats.mean_sq_amplitude[k],
             stats.stderr_re[k], stats.stderr_im[k],
             stats.correlation[k].real(), stats.correlation[k].imag()});
  }
  out.csv = csv.str();

  const double predicted = sde::predicted_mean_growth_rate(amp);
  if (std::abs(alpha) > 0.0) {
    const auto g = sde::measured_growth_rate(stats, stats.times.size() - 1);
    s.metrics.push_back(
        metric_abs("mean_growth_rate", g.rate, predicted, 3.0 * g.stderr));
    s.info["mean_growth_rate_stderr"] = g.stderr;
  } else {
    s.warnings.push_back("zero initial amplitude: growth rate not measured");
  }
  const auto& res = stats.pooled_correlation_residual;
  if (res.stderr_re > 0.0 && res.stderr_im > 0.0) {
    const double z = std::max(std::abs(res.mean.real()) / res.stderr_re,
                              std::abs(res.mean.imag()) / res.stderr_im);
    s.metrics.push_back(metric_max("correlation_residual_z", z, 3.0));
  }
  s.info["predicted_growth_rate"] = predicted;
  s.info["drift_correction"] = sde::drift_correction(amp);
  s.info["quantum_classical_gain_mismatch"] = slle::noise_drift_mismatch(p);
  s.info["pooled_correlation"] = complex_json(stats.pooled_correlation.mean);
  s.info["pooled_correlation_residual"] = complex_json(res.mean);
  s.info["final_mean"] = complex_json(stats.mean_amplitude.back());

  std::vector<double> re_mean, abs2;
  for (std::size_t k = 0; k < stats.times.size(); ++k) {
    re_mean.push_back(stats.mean_amplitude[k].real());
    abs2.push_back(stats.mean_sq_amplitude[k]);
  }
  out.svg = svg::line_chart(
      std::string("sde (") + std::string(sde::to_string(interpretation)) +
          "): ensemble mean",
      "t", stats.times, {{"Re E[a]", re_mean}, {"E|a|^2", abs2}});
  return out;
}

RunResult run_sle(Resolver& r) {
  slle::SlleParams p;
  p.gamma1 = r.number("gamma1");
  p.gamma2 = r.number("gamma2");
  p.n_up = r.number("n_up");
  p.n_dn = r.number("n_dn");
  p.n_upp = r.number("n_upp");
  p.n_ddn = r.number("n_ddn");
  p.omega0 = r.number("omega0", 1.0);
  p.rotating_frame = r.boolean("rotating_frame", true);
  try {
    p.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const double alpha_re = r.number("alpha_re", 0.1);
  const Complex alpha(alpha_re, r.number("alpha_im", 0.0));
  const double dt = r.number("dt", 1e-3);
  const double t_final = r.number("t_final", 50.0);
  const long steps = step_count(dt, t_final);
  const int stride = record_stride(r, steps);
  r.seed();

  const auto coeffs = slle::map_to_classical_sle(p);
  const double r_ss = sde::limit_cycle_amplitude(coeffs);
  const auto traj = sde::integrate_sle(coeffs, alpha, dt, t_final);

  RunResult out;
  RunSummary& s = out.summary;
  s.scenario = "sle";
  s.parameters = r.resolved();

  Csv csv({"t", "re_alpha", "im_alpha", "abs_alpha"});
  std::vector<double> t_rec, abs_rec;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    if (k % static_cast<std::size_t>(stride) != 0 && k + 1 != traj.times.size()) {
      continue;
    }
    const Complex z = traj.values[k];
    csv.row({traj.times[k], z.real(), z.imag(), std::abs(z)});
    t_rec.push_back(traj.times[k]);
    abs_rec.push_back(std::abs(z));
  }
  out.csv = csv.str();

  s.metrics.push_back(metric_abs("limit_cycle_amplitude",
                                 std::abs(traj.values.back()), r_ss, 1e-6));
  if (r_ss > 0.0) {
    const double expected =
        coeffs.lambda1.imag() - coeffs.lambda2.imag() * r_ss * r_ss;
    s.metrics.push_back(metric_abs("phase_velocity",
                                   sde::phase_velocity(traj, 0.75 * t_final),
                                   expected, 1e-4));
  }
  s.info["lambda1"] = complex_json(coeffs.lambda1);
  s.info["lambda2"] = complex_json(coeffs.lambda2);

  out.svg = svg::line_chart("sle: |alpha|", "t", t_rec, {{"|alpha|", abs_rec}});
  return out;
}

RunResult run_vdp(Resolver& r) {
  vdp::VdpParams params;
  params.mu = r.number("mu");
  params.omega0 = r.number("omega0", 1.0);
  if (!(params.omega0 > 0)) throw ConfigError("omega0 must be positive");
  const double x0 = r.number("x0", 1.0);
  const double v0 = r.number("v0", 0.0);
  const double dt = r.number("dt", vdp::default_time_step(params));
  const double t_final = r.number("t_final", params.mu >= 10.0 ? 200.0 : 100.0);
  const long steps = step_count(dt, t_final);
  const int stride = record_stride(r, steps);
  r.seed();

  // Metrics use samples about 1e-4 apart regardless of the step size.
  const int fine = std::max(1, static_cast<int>(std::lround(1e-4 / dt)));
  const auto traj = vdp::integrate_vdp(params, x0, v0, dt, t_final, fine);
  const auto m = vdp::limit_cycle_metrics(traj);

  RunResult out;
  RunSummary& s = out.summary;
  s.scenario = "vdp";
  s.parameters = r.resolved();

  Csv csv({"t", "x", "v"});
  const auto coarse = vdp::integrate_vdp(params, x0, v0, dt, t_final, stride);
  std::vector<double> xs, vs;
  for (Eigen::Index k = 0; k < coarse.size(); ++k) {
    csv.row({coarse.times[k], coarse.states(k, 0), coarse.states(k, 1)});
    xs.push_back(coarse.states(k, 0));
    vs.push_back(coarse.states(k, 1));
  }
  out.csv = csv.str();

  if (params.mu == 0.0) {
    const double amplitude = std::hypot(x0, v0 / params.omega0);
    s.metrics.push_back(metric_abs("amplitude", m.amplitude, amplitude, 1e-6));
    s.metrics.push_back(metric_abs(
        "period", m.period, 2.0 * std::numbers::pi / params.omega0, 1e-6));
  } else {
    s.metrics.push_back(metric_abs("amplitude", m.amplitude, 2.0, 0.05));
    s.info["period"] = m.period;
  }
  s.info["maxima_used"] = m.maxima;
  s.info["crossings_used"] = m.crossings;

  out.svg = svg::line_chart("vdp: x and dx/dt", "t", coarse.times,
                            {{"x", xs}, {"v", vs}});
  return out;
}

RunResult run_vdp_hamiltonian(Resolver& r) {
  vdp::VdpParams params;
  params.lambda = r.number("lambda");
  params.omega0 = r.number("omega0", 1.0);
  vdp::HamState init;
  init.x = r.number("x0", 1.0);
  init.py = r.number("v0", 0.0);
  init.y = r.number("y0", 0.0);
  init.px = r.number("px0", 0.0);
  const double dt = r.number("dt", 1e-4);
  const double t_final = r.number("t_final", 60.0);
  const long steps = step_count(dt, t_final);
  const int stride = record_stride(r, steps);
  r.seed();

  const auto flow = vdp::hamiltonian_flow(params, init, dt, t_final);
  const Eigen::Index n = flow.size();

  RunResult out;
  RunSummary& s = out.summary;
  s.scenario = "vdp-ham";
  s.parameters = r.resolved();

  Csv csv({"t", "x", "v", "y", "px", "py"});
  std::vector<double> t_rec, xs, ys;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k % stride != 0 && k + 1 != n) continue;
    const auto row = flow.states.row(k);
    csv.row({flow.times[k], row(0), row(3), row(2), row(1), row(3)});
    t_rec.push_back(flow.times[k]);
    xs.push_back(row(0));
    ys.push_back(row(2));
  }
  out.csv = csv.str();

  // Largest energy change inside any window of 10 time units.
  double drift = 0;
  double window_start_energy = 0;
  long window = -1;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double e = vdp::hamiltonian_energy(
        params, vdp::HamState::from(flow.states.row(k).transpose()));
    const long w = static_cast<long>(std::floor(flow.times[k] / 10.0));
    if (w != window) {
      window = w;
      window_start_energy = e;
    }
    drift = std::max(drift, std::abs(e - window_start_energy));
  }
  // Residual of the van der Pol equation with the derived damping, using
  // second differences of x and x' = py.
  const double mu = vdp::hamiltonian_damping_coefficient(params);
  const double w2 = params.omega0 * params.omega0;
  double ode_residual = 0;
  for (Eigen::Index k = 1; k + 1 < n; ++k) {
    const double x = flow.states(k, 0), v = flow.states(k, 3);
    const double acc =
        (flow.states(k + 1, 0) - 2.0 * x + flow.states(k - 1, 0)) / (dt * dt);
    ode_residual =
        std::max(ode_residual, std::abs(acc + mu * (x * x - 1.0) * v + w2 * x));
  }
  s.metrics.push_back(metric_max("energy_drift_per_10", drift, 1e-8));
  s.metrics.push_back(metric_max("vdp_ode_residual", ode_residual, 1e-6));
  s.info["derived_damping"] = mu;
  s.info["energy"] = vdp::hamiltonian_energy(params, init);

  out.svg = svg::line_chart("vdp-ham: primary and auxiliary coordinates", "t",
                            t_rec, {{"x", xs}, {"y", ys}});
  return out;
}

RunResult run_equivalence(Resolver& r) {
  vdp::VdpParams params;
  params.lambda = r.number("lambda");
  params.omega0 = r.number("omega0", 1.0);
  const double x0 = r.number("x0", 1.0);
  const double v0 = r.number("v0", 0.0);
  const double dt = r.number("dt", 1e-4);
  const double t_final = r.number("t_final", 60.0);
  const long steps = step_count(dt, t_final);
  const int stride = record_stride(r, steps);
  r.seed();

  const double derived = vdp::hamiltonian_damping_coefficient(params);
  const double deviation = vdp::equivalence_check(params, x0, v0, dt, t_final);
  const double control =
      vdp::equivalence_check(params, x0, v0, dt, t_final, 2.0 * derived);

  RunResult out;
  RunSummary& s = out.summary;
  s.scenario = "equivalence";
  s.parameters = r.resolved();

  vdp::VdpParams ode = params, mismatched = params;
  ode.mu = derived;
  mismatched.mu = 2.0 * derived;
  const auto flow = vdp::hamiltonian_flow(params, {x0, 0.0, 0.0, v0}, dt,
                                          t_final, stride);
  const auto direct = vdp::integrate_vdp(ode, x0, v0, dt, t_final, stride);
  const auto wrong = vdp::integrate_vdp(mismatched, x0, v0, dt, t_final, stride);
  Csv csv({"t", "x_ham", "x_vdp", "x_vdp_mismatched"});
  std::vector<double> a, b, c;
  for (Eigen::Index k = 0; k < flow.size(); ++k) {
    csv.row({flow.times[k], flow.states(k, 0), direct.states(k, 0),
             wrong.states(k, 0)});
    a.push_back(flow.states(k, 0));
    b.push_back(direct.states(k, 0));
    c.push_back(wrong.states(k, 0));
  }
  out.csv = csv.str();

  s.metrics.push_back(metric_max("max_deviation", deviation, 1e-6));
  s.metrics.push_back(metric_min("mismatched_control_deviation", control, 1e-2));
  s.info["derived_damping"] = derived;

  out.svg = svg::line_chart(
      "equivalence: Hamiltonian flow vs van der Pol", "t", flow.times,
      {{"x (Hamiltonian)", a}, {"x (vdp)", b}, {"x (vdp, 2x damping)", c}});
  return out;
}

RunResult run_commutator_check(Resolver& r) {
  vdp::VdpParams params;
  params.lambda = r.number("lambda");
  const int dim = static_cast<int>(r.integer("dim", std::nullopt, 4));
  params.omega0 = r.number("omega0", 1.0);
  r.seed();

  const auto res = vdp::quantum_commutator_check(params, dim);

  RunResult out;
  RunSummary& s = out.summary;
  s.scenario = "commutator-check";
  s.parameters = r.resolved();
  std::ostringstream rows;
  rows << "quantity,value\n"
       << "r1_interior," << format_number(res.r1_interior) << '\n'
       << "r2_interior," << format_number(res.r2_interior) << '\n'
       << "r1_full," << format_number(res.r1_full) << '\n'
       << "r2_full," << format_number(res.r2_full) << '\n';
  out.csv = rows.str();
  s.metrics.push_back(metric_max("r1_interior", res.r1_interior, 1e-10));
  s.metrics.push_back(metric_max("r2_interior", res.r2_interior, 1e-10));
  s.info["r1_full"] = res.r1_full;
  s.info["r2_full"] = res.r2_full;
  return out;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + "  " : s + std::string(width - s.size(), ' ');
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"scenario", KeyType::Text, "(required)", "scenario to run"},
      {"dim", KeyType::Integer, "30", "Fock levels per mode"},
      {"dt", KeyType::Number, "auto", "time step (see scenarios)"},
      {"t_final", KeyType::Number, "auto", "final time, a multiple of dt"},
      {"gamma1", KeyType::Number, "", "linear gain-medium coupling rate"},
      {"gamma2", KeyType::Number, "", "two-photon absorber coupling rate"},
      {"n_up", KeyType::Number, "", "upper-level population of the gain medium"},
      {"n_dn", KeyType::Number, "", "lower-level population of the gain medium"},
      {"n_upp", KeyType::Number, "", "upper-level population of the absorber"},
      {"n_ddn", KeyType::Number, "", "lower-level population of the absorber"},
      {"omega0", KeyType::Number, "1", "oscillator frequency"},
      {"rotating_frame", KeyType::Boolean, "true", "drop the free rotation"},
      {"sigma_v2", KeyType::Number, "gamma1 (n_up + n_dn)/2",
       "additive noise intensity"},
      {"sigma_w2", KeyType::Number, "gamma2 (n_upp + n_ddn)/2",
       "multiplicative noise intensity"},
      {"interpretation", KeyType::Text, "", "ito or stratonovich"},
      {"n_traj", KeyType::Integer, "10000", "ensemble size"},
      {"seed", KeyType::Integer, "1", "root seed; also names the output files"},
      {"mu", KeyType::Number, "", "van der Pol damping coefficient"},
      {"lambda", KeyType::Number, "", "two-oscillator Hamiltonian coupling"},
      {"x0", KeyType::Number, "1", "initial coordinate"},
      {"v0", KeyType::Number, "0", "initial velocity (py for Hamiltonian runs)"},
      {"y0", KeyType::Number, "0", "initial auxiliary coordinate"},
      {"px0", KeyType::Number, "0", "initial auxiliary momentum"},
      {"alpha_re", KeyType::Number, "auto", "initial amplitude, real part"},
      {"alpha_im", KeyType::Number, "0", "initial amplitude, imaginary part"},
      {"record_stride", KeyType::Integer, "max(1, steps/5000)",
       "steps between CSV rows"},
      {"output_dir", KeyType::Text, "$OSCILLAB_OUTPUT_DIR or .",
       "directory for output files"},
  };
  return table;
}

const std::vector<ScenarioSpec>& scenario_table() {
  static const std::vector<ScenarioSpec> table = {
      {"me",
       "four-dissipator master equation; dt = largest divisor of t_final not above "
       "1e-3/(total rate), t_final = 1, alpha_re = 0.2",
       {"gamma1", "gamma2", "n_up", "n_dn", "n_upp", "n_ddn"},
       {"dim", "dt", "t_final", "omega0", "rotating_frame", "alpha_re",
        "alpha_im", "record_stride"}},
      {"preset-a", "quasilinear amplifier preset; defaults as for me",
       {"gamma1", "gamma2"},
       {"n_up", "n_dn", "dim", "dt", "t_final", "omega0", "rotating_frame",
        "alpha_re", "alpha_im", "record_stride"}},
      {"preset-b", "pure noise-induced amplification preset",
       {"gamma2"},
       {"dim", "dt", "t_final", "omega0", "rotating_frame", "alpha_re",
        "alpha_im", "record_stride"}},
      {"preset-c", "phenomenological van der Pol preset",
       {"gamma1", "gamma2"},
       {"dim", "dt", "t_final", "omega0", "rotating_frame", "alpha_re",
        "alpha_im", "record_stride"}},
      {"sde",
       "classical amplifier ensemble; dt = 1e-3, t_final = 1, alpha_re = 1, "
       "gamma1 = 0, n_upp = n_ddn = 0.5",
       {"interpretation", "gamma2"},
       {"gamma1", "n_up", "n_dn", "n_upp", "n_ddn", "sigma_v2", "sigma_w2",
        "n_traj", "dt", "t_final", "alpha_re", "alpha_im", "record_stride"}},
      {"sle",
       "semiclassical Stuart-Landau equation; dt = 1e-3, t_final = 50, "
       "alpha_re = 0.1",
       {"gamma1", "gamma2", "n_up", "n_dn", "n_upp", "n_ddn"},
       {"omega0", "rotating_frame", "dt", "t_final", "alpha_re", "alpha_im",
        "record_stride"}},
      {"vdp",
       "van der Pol ODE; dt = 1e-4 (1e-5 for mu >= 10), t_final = 100 (200 "
       "for mu >= 10)",
       {"mu"},
       {"omega0", "x0", "v0", "dt", "t_final", "record_stride"}},
      {"vdp-ham", "two-oscillator Hamiltonian flow; dt = 1e-4, t_final = 60",
       {"lambda"},
       {"omega0", "x0", "v0", "y0", "px0", "dt", "t_final", "record_stride"}},
      {"equivalence",
       "Hamiltonian flow against the van der Pol ODE; dt = 1e-4, t_final = 60",
       {"lambda"},
       {"omega0", "x0", "v0", "dt", "t_final", "record_stride"}},
      {"commutator-check", "Heisenberg equations of the quantized Hamiltonian",
       {"lambda", "dim"},
       {"omega0"}},
  };
  return table;
}

RunConfig parse_config(std::string_view json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig config;
  for (const auto& [key, value] : doc.items()) {
    if (value.is_structured() || value.is_null()) {
      throw ConfigError("config value for '" + key + "' must be a scalar");
    }
    if (key == "scenario") {
      if (!value.is_string()) throw ConfigError("scenario must be a string");
      config.scenario = value.get<std::string>();
    } else {
      config.values[key] = value;
    }
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void set_value(RunConfig& config, const std::string& key,
               const std::string& text) {
  const KeySpec* spec = find_key(key);
  if (spec == nullptr) throw ConfigError("unknown key '" + key + "'");
  if (key == "scenario") {
    config.scenario = text;
    return;
  }
  if (spec->type == KeyType::Text) {
    config.values[key] = text;
    return;
  }
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded() || value.is_structured() || value.is_null()) {
    value = text;
  }
  check_type(*spec, value);
  config.values[key] = value;
}

bool RunSummary::passed() const {
  return std::all_of(metrics.begin(), metrics.end(),
                     [](const Metric& m) { return m.pass; });
}

const Metric& RunSummary::metric(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return m;
  }
  throw Error("no metric named '" + name + "'");
}

Json RunSummary::to_json() const {
  Json doc = Json::object();
  doc["scenario"] = scenario;
  doc["parameters"] = parameters;
  Json ms = Json::object();
  for (const auto& m : metrics) {
    Json entry = Json::object();
    entry["value"] = m.value;
    entry["expected"] = m.expected ? Json(*m.expected) : Json(nullptr);
    entry["tolerance"] = m.tolerance;
    entry["rule"] = m.rule;
    entry["pass"] = m.pass;
    ms[m.name] = std::move(entry);
  }
  doc["metrics"] = std::move(ms);
  doc["info"] = info;
  doc["warnings"] = warnings;
  doc["status"] = passed() ? "pass" : "fail";
  return doc;
}

RunResult execute(const RunConfig& config) {
  const ScenarioSpec& spec = find_scenario(config.scenario);
  Resolver r(config, spec);
  RunResult out;
  const std::string& name = spec.name;
  if (name == "me" || name == "preset-a" || name == "preset-b" ||
      name == "preset-c") {
    out = run_master_equation(r, name);
  } else if (name == "sde") {
    out = run_sde(r);
  } else if (name == "sle") {
    out = run_sle(r);
  } else if (name == "vdp") {
    out = run_vdp(r);
  } else if (name == "vdp-ham") {
    out = run_vdp_hamiltonian(r);
  } else if (name == "equivalence") {
    out = run_equivalence(r);
  } else {
    out = run_commutator_check(r);
  }
  out.json = out.summary.to_json().dump(2) + "\n";
  return out;
}

std::filesystem::path output_directory(const RunConfig& config) {
  const auto it = config.values.find("output_dir");
  if (it != config.values.end()) return it->get<std::string>();
  if (const char* env = std::getenv("OSCILLAB_OUTPUT_DIR"); env && *env) {
    return env;
  }
  return ".";
}

std::vector<std::filesystem::path> write_outputs(const RunConfig& config,
                                                 const RunResult& result) {
  const auto dir = output_directory(config);
  std::filesystem::create_directories(dir);
  const auto& params = result.summary.parameters;
  const std::string seed =
      params.contains("seed") ? params["seed"].dump() : std::string("1");
  const std::string stem = result.summary.scenario + "-" + seed;

  std::vector<std::filesystem::path> written;
  auto write = [&](const std::string& ext, const std::string& body) {
    const auto path = dir / (stem + ext);
    std::ofstream out(path, std::ios::binary);
    out << body;
    if (!out) {
      throw std::filesystem::filesystem_error(
          "cannot write output", path,
          std::make_error_code(std::errc::io_error));
    }
    written.push_back(path);
  };
  write(".csv", result.csv);
  write(".json", result.json);
  if (!result.svg.empty()) {
    try {
      write(".svg", result.svg);
    } catch (const std::exception& e) {
      std::cerr << "warning: plot not written: " << e.what() << '\n';
    }
  }
  return written;
}

std::string list_presets() {
  std::ostringstream out;
  out << pad("key", 5) << pad("regime", 34) << pad("populations", 52)
      << "exercises\n";
  for (const auto& p : slle::preset_table()) {
    out << pad(p.key, 5) << pad(p.name, 34) << pad(p.populations, 52)
        << p.exercises << '\n';
  }
  return out.str();
}

std::string help_text() {
  std::ostringstream out;
  out << "Scenarios (required keys; optional keys):\n";
  for (const auto& s : scenario_table()) {
    out << "  " << s.name << ": " << s.description << "\n    required:";
    for (const auto& k : s.required) out << ' ' << k;
    out << "\n    optional:";
    for (const auto& k : s.optional) out << ' ' << k;
    out << " seed output_dir\n";
  }
  out << "\nKeys (default):\n";
  for (const auto& k : key_table()) {
    out << "  " << pad(k.name, 16)
        << pad(k.default_text.empty() ? "-" : k.default_text, 28) << k.help
        << '\n';
  }
  out << "\nExit codes: 0 success, 1 failed tolerance with --assert, 2 "
         "configuration error, 3 physics error, 4 output error.\n";
  return out.str();
}

int main(int argc, char** argv) {
  CLI::App app{"Quantum and classical self-oscillator experiments", "oscillab"};
  app.require_subcommand(1);
  app.footer(help_text());

  std::string config_path;
  bool assert_mode = false;
  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("--config", config_path, "Flat JSON configuration file");
  run->add_flag("--assert", assert_mode,
                "Exit with status 1 when a headline tolerance fails");
  run->allow_extras();
  run->footer("Any key may be given as --key value and overrides the file.");
  app.add_subcommand("presets", "List the regime presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kConfigError;
  }

  if (app.got_subcommand("presets")) {
    std::cout << list_presets();
    return kSuccess;
  }

  RunResult result;
  RunConfig config;
  try {
    if (!config_path.empty()) config = load_config(config_path);
    const auto extras = run->remaining();
    for (std::size_t i = 0; i < extras.size(); ++i) {
      std::string token = extras[i];
      if (token.rfind("--", 0) != 0) {
        throw ConfigError("unexpected argument '" + token + "'");
      }
      token = token.substr(2);
      std::string value;
      if (const auto eq = token.find('='); eq != std::string::npos) {
        value = token.substr(eq + 1);
        token = token.substr(0, eq);
      } else if (i + 1 < extras.size()) {
        value = extras[++i];
      } else {
        throw ConfigError("missing value for --" + token);
      }
      set_value(config, token, value);
    }
    result = execute(config);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kPhysicsError;
  }

  try {
    for (const auto& path : write_outputs(config, result)) {
      std::cout << "wrote " << path.string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return kIoError;
  }

  const auto& s = result.summary;
  for (const auto& m : s.metrics) {
    std::cout << (m.pass ? "PASS " : "FAIL ") << m.name << " = "
              << format_number(m.value);
    if (m.rule == "abs") {
      std::cout << " (expected " << format_number(*m.expected) << " +/- "
                << format_number(m.tolerance) << ")";
    } else {
      std::cout << (m.rule == "max" ? " (<= " : " (>= ")
                << format_number(m.tolerance) << ")";
    }
    std::cout << '\n';
  }
  for (const auto& w : s.warnings) std::cout << "warning: " << w << '\n';
  std::cout << "status: " << (s.passed() ? "pass" : "fail") << '\n';
  return assert_mode && !s.passed() ? kAssertFailed : kSuccess;
}

}  // namespace oscillab::cli
