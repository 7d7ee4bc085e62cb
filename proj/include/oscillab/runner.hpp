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

// Configuration-driven experiment runner behind the `oscillab` executable.
//
// A run is described by a flat key/value map (JSON object on disk, `--key
// value` on the command line). Each scenario accepts a fixed set of keys,
// some of them required; everything else is rejected. Defaults that depend
// on the scenario are resolved before the run and echoed in the summary.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace oscillab::cli {

using Json = nlohmann::ordered_json;

enum class KeyType { Number, Integer, Boolean, Text };

struct KeySpec {
  std::string name;
  KeyType type;
  std::string default_text;
  std::string help;
};

struct ScenarioSpec {
  std::string name;
  std::string description;
  std::vector<std::string> required;
  std::vector<std::string> optional;
};

const std::vector<KeySpec>& key_table();
const std::vector<ScenarioSpec>& scenario_table();

struct RunConfig {
  std::string scenario;
  /// Flat object of key -> scalar value, in insertion order.
  Json values = Json::object();
};

/// Parses a flat JSON object. A "scenario" entry fills RunConfig::scenario.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Applies a command-line override. `text` is read as JSON when it parses
/// as a scalar (number, true, false) and as a string otherwise.
void set_value(RunConfig& config, const std::string& key,
               const std::string& text);

struct Metric {
  std::string name;
  double value = 0;
  std::optional<double> expected;
  double tolerance = 0;
  /// "abs": |value - expected| <= tolerance; "max": value <= tolerance;
  /// "min": value >= tolerance.
  std::string rule;
  bool pass = false;
};

struct RunSummary {
  std::string scenario;
  /// Fully resolved parameters, enough to repeat the run.
  Json parameters = Json::object();
  std::vector<Metric> metrics;
  Json info = Json::object();
  std::vector<std::string> warnings;

  bool passed() const;
  const Metric& metric(const std::string& name) const;
  Json to_json() const;
};

struct RunResult {
  RunSummary summary;
  std::string csv;
  /// Empty for scenarios without a time series.
  std::string svg;
  std::string json;
};

/// Validates and resolves `config`, then runs the scenario. No files are
/// written. Throws ConfigError for configuration problems and other
/// oscillab::Error subclasses for physics failures.
RunResult execute(const RunConfig& config);

/// Output directory: the `output_dir` key, else $OSCILLAB_OUTPUT_DIR, else ".".
std::filesystem::path output_directory(const RunConfig& config);

/// Writes <scenario>-<seed>.{csv,json,svg}; returns the paths written.
std::vector<std::filesystem::path> write_outputs(const RunConfig& config,
                                                 const RunResult& result);

/// Three-row table of the regime presets.
std::string list_presets();

/// Key and scenario reference appended to `--help`.
std::string help_text();

enum ExitCode : int {
  kSuccess = 0,
  kAssertFailed = 1,
  kConfigError = 2,
  kPhysicsError = 3,
  kIoError = 4,
};

/// Entry point of the command-line tool.
int main(int argc, char** argv);

}  // namespace oscillab::cli
