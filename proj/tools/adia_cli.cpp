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

// adia <command> --config path [--seed u64] [--out dir] [--threads k]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <cli11/CLI11.hpp>

#include "adia/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

using Command = std::function<adia::CommandResult(const adia::ExperimentConfig&, const std::filesystem::path&)>;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adiabatic state preparation: exact, Trotterized, pulse-level and sampled experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> threads;

  const std::map<std::string, std::pair<std::string, Command>> commands{
      {"exact-evolve", {"Continuous and Trotterized evolution sweeps", adia::cmd_exact_evolve}},
      {"grape-synth", {"Optimal-control pulses for every short-time propagator", adia::cmd_grape_synth}},
      {"device-sim", {"Open-system device runs for each preset and pulse mode", adia::cmd_device_sim}},
      {"tomography", {"Sampled fidelity and energy estimates with readout mitigation", adia::cmd_tomography}},
      {"error-study", {"Occupation-probability error versus number of shots", adia::cmd_error_study}},
  };
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", config_path, "TOML configuration file")->required();
    sub->add_option("--seed", seed, "Sampling seed (overrides the config)");
    sub->add_option("--out", out_dir, "Output directory (overrides the config)");
    sub->add_option("--threads", threads, "Worker count (overrides the config and ADIA_THREADS)")
        ->check(CLI::NonNegativeNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw adia::ConfigError("cannot read config file " + config_path);
    std::ostringstream text;
    text << in.rdbuf();
    adia::ExperimentConfig cfg = adia::parse_config(text.str());
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.output_dir = *out_dir;
    if (threads) cfg.threads = *threads;

    const std::filesystem::path out(cfg.output_dir);
    const adia::CommandResult result = commands.at(name).second(cfg, out);
    adia::write_manifest(out, name, adia::fnv1a64(text.str()), cfg.seed, result.files);
    if (result.numerical_failure) {
      std::cerr << "adia " << name << ": " << result.message << '\n';
      return kExitNumerical;
    }
    std::cout << "adia " << name << ": wrote " << result.files.size() + 1 << " files to " << out.string() << '\n';
    return 0;
  } catch (const adia::ConfigError& e) {
    std::cerr << "adia " << name << ": configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const adia::Error& e) {
    std::cerr << "adia " << name << ": " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "adia " << name << ": " << e.what() << '\n';
    return kExitNumerical;
  }
}
