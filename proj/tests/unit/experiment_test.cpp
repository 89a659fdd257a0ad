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


#include "adia/experiment.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace adia {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("adia_experiment_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string first_line(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

std::size_t line_count(const fs::path& path) {
  const std::string text = slurp(path);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

TEST(Config, DefaultsFromEmptyText) {
  const ExperimentConfig cfg = parse_config("");
  EXPECT_EQ(cfg.total_time, 20.0);
  EXPECT_EQ(cfg.steps, 20);
  EXPECT_EQ(cfg.rule, NodeRule::Midpoint);
  EXPECT_EQ(cfg.presets.size(), 4u);
  EXPECT_EQ(cfg.shots, 2500u);
}

TEST(Config, ReadsSectionsAndOverrides) {
  const ExperimentConfig cfg = parse_config(R"(
[problem]
total_time = 16.0
steps = 10
node_rule = "right"
sweep_steps = []

[device]
levels = 4
dephasing = "pure"

[grape]
max_iterations = 50
synth_taus = [60.0]
device_modes = ["merged", "250"]

[sampling]
shots = 1000
readout = "ideal"
tomography_source = "device:lima:merged"

[output]
dir = "elsewhere"

[run]
threads = 3
)");
  EXPECT_EQ(cfg.total_time, 16.0);
  EXPECT_EQ(cfg.steps, 10);
  EXPECT_EQ(cfg.rule, NodeRule::Right);
  EXPECT_FALSE(cfg.sweep_steps.empty());  // empty list selects the defaults
  EXPECT_EQ(cfg.device.levels, 4);
  EXPECT_EQ(cfg.device.noise.dephasing, NoiseParams::Dephasing::PureDephasing);
  EXPECT_EQ(cfg.grape.max_iterations, 50);
  EXPECT_EQ(cfg.synth_taus, std::vector<double>{60.0});
  EXPECT_EQ(cfg.device_modes.size(), 2u);
  EXPECT_EQ(cfg.shots, 1000u);
  EXPECT_EQ(cfg.tomography_source, "device:lima:merged");
  EXPECT_EQ(cfg.output_dir, "elsewhere");
  EXPECT_EQ(cfg.threads, 3);
}

TEST(Config, RejectsInvalidInput) {
  const char* bad[] = {
      "[problem]\nstepz = 3\n",
      "[problme]\nsteps = 3\n",
      "[problem]\nsteps = 0\n",
      "[problem]\ntotal_time = -1.0\n",
      "[problem]\nsteps = \"ten\"\n",
      "[problem]\nnode_rule = \"center\"\n",
      "[sampling]\nshots = 0\n",
      "[sampling]\nseeds = 0\n",
      "[sampling]\nreadout = \"nowhere\"\n",
      "[sampling]\ntomography_source = \"device:belem\"\n",
      "[grape]\ndevice_modes = [\"fast\"]\n",
      "[grape]\neps_cut = 0.0\n",
      "[device]\nlevels = 1\n",
      "[device.presets.extra]\nt1_us = [100.0, 100.0]\n",
      "this is not toml",
  };
  for (const char* text : bad) EXPECT_THROW(parse_config(text), ConfigError) << text;
}

TEST(Config, PresetsCarryCalibrationTable) {
  const ExperimentConfig cfg = parse_config("");
  const DevicePreset& belem = cfg.preset("belem");
  EXPECT_EQ(belem.t1_us[0], 102.6);
  EXPECT_EQ(belem.t2_us[1], 104.5);
  EXPECT_EQ(belem.tau_cnot_ns, 810.7);
  EXPECT_EQ(belem.tau_u_ns, 2500.0);
  EXPECT_EQ(cfg.preset("casablanca").t2_us[0], 40.7);
  EXPECT_EQ(cfg.preset("lima").tau_u_ns, 1000.0);
  EXPECT_EQ(cfg.preset("manila").t1_us[1], 244.2);
  EXPECT_THROW(cfg.preset("tokyo"), ConfigError);
  EXPECT_EQ(cfg.readout_model("ideal").confusion().matrix, Eigen::Matrix4d::Identity());
}

TEST(Config, PresetOverrideKeepsOtherFields) {
  const ExperimentConfig cfg = parse_config("[device.presets.lima]\ntau_u_ns = 1200.0\n");
  EXPECT_EQ(cfg.preset("lima").tau_u_ns, 1200.0);
  EXPECT_EQ(cfg.preset("lima").tau_cnot_ns, 305.8);
}

TEST(Config, ReferenceFileParses) {
  const ExperimentConfig cfg = load_config(fs::path(ADIA_SOURCE_DIR) / "configs/reference.toml");
  EXPECT_EQ(cfg.sweep_total_times, (std::vector<double>{4.0, 8.0, 16.0, 20.0}));
  EXPECT_EQ(cfg.run_presets.size(), 4u);
}

TEST(MergedDurations, RoundedToFiveNanoseconds) {
  const ExperimentConfig cfg = parse_config("");
  const GateDurations belem = merged_gate_durations(cfg.preset("belem"));
  EXPECT_EQ(belem.at("CNOT"), 810.0);
  EXPECT_EQ(belem.at("U3"), 20.0);  // (2500 - 3 * 810) / 4 = 17.5
  EXPECT_EQ(belem.at("UNITARY"), 20.0);
  const GateDurations casablanca = merged_gate_durations(cfg.preset("casablanca"));
  EXPECT_EQ(casablanca.at("CNOT"), 760.0);
  EXPECT_EQ(casablanca.at("U3"), 30.0);
  EXPECT_EQ(merged_gate_durations(cfg.preset("manila")).at("CNOT"), 275.0);
}

TEST(MergedCircuit, ReproducesThePropagator) {
  const Schedule sched(20.0);
  const TrotterPlan plan{20, 20.0, NodeRule::Midpoint};
  for (int k : {1, 10, 20}) {
    const Circuit c = merged_propagator_circuit(sched, plan, k);
    EXPECT_EQ(c.size(), 7u);
    const Mat4 u = circuit_unitary(c);
    const Mat4 target = short_time_propagator(sched, plan, k);
    EXPECT_NEAR(std::abs((target.adjoint() * u).trace()), 4.0, 1e-9);
  }
}

TEST(Hashing, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Threads, Resolution) {
  EXPECT_EQ(resolve_threads(3), 3);
  setenv("ADIA_THREADS", "5", 1);
  EXPECT_EQ(resolve_threads(0), 5);
  unsetenv("ADIA_THREADS");
  EXPECT_GE(resolve_threads(0), 1);
}

TEST(PulseCacheTest, KeyAndRoundTrip) {
  const fs::path dir = scratch("cache");
  const DeviceParams p;
  GrapeConfig cfg;
  const Mat4 u = gate_matrix(CnotGate{0, 1});
  const std::string key = PulseCache::key(u, 40.0, p, cfg);
  EXPECT_EQ(key, PulseCache::key(u, 40.0, p, cfg));
  EXPECT_NE(key, PulseCache::key(u, 45.0, p, cfg));
  GrapeConfig other = cfg;
  other.chi = 2e-3;
  EXPECT_NE(key, PulseCache::key(u, 40.0, p, other));

  PulseCache cache(dir);
  EXPECT_FALSE(cache.load(key).has_value());
  OptimizationResult r;
  r.pulse = PulseSequence::zeros(40.0);
  r.pulse.channels[2][7] = 1.25;
  r.report.final_gate_infidelity = 3e-5;
  r.report.iterations = 17;
  r.report.converged = true;
  cache.store(key, r);
  const auto back = cache.load(key);
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(back->pulse.channels, r.pulse.channels);
  EXPECT_EQ(back->report.iterations, 17);
  EXPECT_EQ(back->report.final_gate_infidelity, 3e-5);
  EXPECT_TRUE(back->report.converged);
  fs::remove_all(dir);
}

ExperimentConfig small_config() {
  ExperimentConfig cfg = parse_config(R"(
[problem]
total_time = 8.0
steps = 5
sweep_total_times = [4.0, 8.0]
sweep_steps = [2, 5]
dt_fine = 0.01

[sampling]
shots = 400
seeds = 3
shot_grid = [1, 100, 10000]
study_models = ["ideal", "lima"]
)");
  cfg.threads = 1;
  return cfg;
}

TEST(Commands, ExactEvolveIsDeterministic) {
  const ExperimentConfig cfg = small_config();
  const fs::path a = scratch("exact_a"), b = scratch("exact_b");
  const CommandResult ra = cmd_exact_evolve(cfg, a);
  const CommandResult rb = cmd_exact_evolve(cfg, b);
  EXPECT_FALSE(ra.numerical_failure);
  ASSERT_EQ(ra.files, rb.files);
  for (const auto& f : ra.files) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  EXPECT_EQ(first_line(a / "exact_T8.csv"), "t_ns,fidelity,energy");
  EXPECT_EQ(line_count(a / "trotter_n5.csv"), 7u);
  EXPECT_TRUE(fs::exists(a / "exact_T4.csv"));
  EXPECT_TRUE(fs::exists(a / "trotter_n2.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Commands, TomographyTracksExactValues) {
  ExperimentConfig cfg = small_config();
  cfg.shots = 200000;
  const fs::path out = scratch("tomo");
  const CommandResult r = cmd_tomography(cfg, out);
  ASSERT_EQ(r.files, std::vector<std::string>{"tomography.csv"});
  std::ifstream in(out / "tomography.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t_ns,fidelity_exact,fidelity_raw,fidelity_mitigated,energy_exact,energy_raw,energy_mitigated,clipped");
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
    ASSERT_EQ(v.size(), 8u);
    EXPECT_NEAR(v[3], v[1], 0.01) << line;  // mitigated fidelity
    EXPECT_NEAR(v[6], v[4], 0.05) << line;  // mitigated energy
    ++rows;
  }
  EXPECT_EQ(rows, 6);
  const std::string first = slurp(out / "tomography.csv");
  cmd_tomography(cfg, out);
  EXPECT_EQ(slurp(out / "tomography.csv"), first);
  fs::remove_all(out);
}

TEST(Commands, ErrorStudyTable) {
  const ExperimentConfig cfg = small_config();
  const fs::path out = scratch("study");
  cmd_error_study(cfg, out);
  EXPECT_EQ(first_line(out / "error_study.csv"), "model,shots,mean_deviation,standard_error");
  EXPECT_EQ(line_count(out / "error_study.csv"), 7u);
  fs::remove_all(out);
}

TEST(Commands, GrapeSynthFlagsUnconvergedPulses) {
  ExperimentConfig cfg = small_config();
  cfg.grape.max_iterations = 2;
  cfg.synth_taus = {10.0};
  const fs::path out = scratch("grape");
  const CommandResult r = cmd_grape_synth(cfg, out);
  EXPECT_TRUE(r.numerical_failure);
  EXPECT_TRUE(fs::exists(out / "pulses/tau10/k05.csv"));
  const auto report = nlohmann::json::parse(slurp(out / "grape_report.json"));
  EXPECT_EQ(report.at("10").size(), 5u);
  EXPECT_EQ(line_count(out / "grape_summary.csv"), 6u);
  EXPECT_FALSE(fs::is_empty(out / "pulse_cache"));
  fs::remove_all(out);
}

TEST(Manifest, ListsSortedUniqueFiles) {
  const fs::path out = scratch("manifest");
  fs::create_directories(out);
  write_manifest(out, "exact-evolve", 0x1234abcdULL, 7, {"b.csv", "a.csv", "b.csv"});
  const auto j = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(j.at("command"), "exact-evolve");
  EXPECT_EQ(j.at("seed"), 7);
  EXPECT_EQ(j.at("files"), (std::vector<std::string>{"a.csv", "b.csv"}));
  EXPECT_TRUE(j.at("config_hash").is_string());
  EXPECT_TRUE(j.at("versions").contains("eigen"));
  fs::remove_all(out);
}

}  // namespace
}  // namespace adia
