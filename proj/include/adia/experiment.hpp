// Copyright 2026 The Adia Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Config-driven experiment runners behind the `adia` command-line tool.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adia/measurement.hpp"
#include "adia/open_system.hpp"
#include "adia/propagation.hpp"
#include "adia/pulse_control.hpp"

namespace adia {

struct DevicePreset {
  std::string name;
  std::array<double, 2> t1_us{};
  std::array<double, 2> t2_us{};
  double tau_cnot_ns = 0.0;
  double tau_u_ns = 0.0;
  ReadoutModel readout;
};

/// Calibration data of the four reference devices; the readout flip
/// probabilities are representative values, not device calibrations.
const std::vector<DevicePreset>& builtin_presets();

struct ExperimentConfig {
  // Spin problem.
  double total_time = 20.0;
  int steps = 20;
  NodeRule rule = NodeRule::Midpoint;
  std::vector<double> sweep_total_times{20.0};
  std::vector<int> sweep_steps{20};
  double dt_fine = 0.0;  // 0 selects T / 2000

  // Device model.
  DeviceParams device;
  std::vector<DevicePreset> presets = builtin_presets();
  std::vector<std::string> run_presets{"belem", "casablanca", "lima", "manila"};
  bool noise = true;

  // Pulse synthesis.
  GrapeConfig grape;
  std::vector<double> synth_taus{120.0};
  /// "120", "400" (any number of ns), "tau_u" or "merged".
  std::vector<std::string> device_modes{"120", "400", "tau_u", "merged"};
  std::string pulse_cache;  // empty: <out>/pulse_cache
  int substeps = 4;

  // Sampling.
  std::uint64_t shots = 2500;
  int seeds = 20;
  std::uint64_t seed = 1;
  bool mitigation = true;
  std::string readout = "belem";  // preset name or "ideal"
  std::string tomography_source = "ideal";  // or "device:<preset>:<mode>"
  std::vector<std::uint64_t> shot_grid{1, 10, 100, 1000, 10000, 100000, 1000000};
  std::vector<std::string> study_models{"ideal", "belem", "casablanca", "lima", "manila"};

  std::string output_dir = "adia_out";
  int threads = 0;  // 0: hardware concurrency

  const DevicePreset& preset(const std::string& name) const;
  ReadoutModel readout_model(const std::string& name) const;
  Schedule schedule() const { return Schedule(total_time); }
  TrotterPlan plan() const { return {steps, total_time, rule}; }
  void validate() const;
};

/// Parses TOML; unknown keys and malformed values raise ConfigError.
ExperimentConfig parse_config(std::string_view toml_text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);

/// Pulse store keyed by everything that determines an optimization result.
class PulseCache {
 public:
  explicit PulseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  static std::string key(const Mat4& target, double tau, const DeviceParams& p, const GrapeConfig& cfg);
  std::optional<OptimizationResult> load(const std::string& key) const;
  void store(const std::string& key, const OptimizationResult& r) const;

 private:
  std::filesystem::path dir_;
};

/// Optimizes every distinct (target, tau) once, in parallel over at most
/// `threads` workers, reusing cached results; returns results in input order.
std::vector<OptimizationResult> synthesize_pulses(const std::vector<Mat4>& targets, const std::vector<double>& taus,
                                                  const DeviceParams& p, const GrapeConfig& cfg,
                                                  const PulseCache* cache, int threads);

/// One short-time propagator as four merged single-qubit layers and three CNOTs.
Circuit merged_propagator_circuit(const Schedule& sched, const TrotterPlan& plan, int k);

/// Per-gate pulse lengths whose sum per propagator approximates tau_U, rounded
/// to 5 ns so the anharmonic drift phases close.
GateDurations merged_gate_durations(const DevicePreset& preset);

/// Device-space model with the preset's T1/T2 (or noiseless).
DeviceParams device_for(const ExperimentConfig& cfg, const DevicePreset& preset, bool noisy);

struct CommandResult {
  std::vector<std::string> files;  // relative to the output directory
  bool numerical_failure = false;
  std::string message;
};

CommandResult cmd_exact_evolve(const ExperimentConfig& cfg, const std::filesystem::path& out);
CommandResult cmd_grape_synth(const ExperimentConfig& cfg, const std::filesystem::path& out);
CommandResult cmd_device_sim(const ExperimentConfig& cfg, const std::filesystem::path& out);
CommandResult cmd_tomography(const ExperimentConfig& cfg, const std::filesystem::path& out);
CommandResult cmd_error_study(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// manifest.json listing every emitted file; no timestamps.
void write_manifest(const std::filesystem::path& out, const std::string& command, std::uint64_t config_hash,
                    std::uint64_t seed, std::vector<std::string> files);

/// Worker count from an explicit request, then ADIA_THREADS, then the hardware.
int resolve_threads(int requested);

}  // namespace adia
