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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>
#include <tomlplusplus/toml.hpp>

namespace adia {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- helpers

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t base, std::uint64_t stream) { return splitmix64(base ^ splitmix64(stream)); }

std::string fmt_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::string two_digits(int k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", k);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  ensure_dir(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception
// is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------- config

class Section {
 public:
  Section(const toml::table* t, std::string name, std::set<std::string> allowed)
      : table_(t), name_(std::move(name)) {
    if (!table_) return;
    for (const auto& [k, v] : *table_) {
      (void)v;
      if (!allowed.count(std::string(k.str())))
        throw ConfigError("unknown key '" + std::string(k.str()) + "' in [" + name_ + "]");
    }
  }

  template <typename T>
  void get(const char* key, T& out) const {
    if (!table_) return;
    const toml::node* n = table_->get(key);
    if (!n) return;
    if constexpr (std::is_same_v<T, bool>) {
      if (auto v = n->value_exact<bool>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (auto v = n->value_exact<std::string>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (auto v = n->value<double>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_integral_v<T>) {
      if (auto v = n->value_exact<std::int64_t>()) {
        if (*v < 0 && std::is_unsigned_v<T>) throw ConfigError(where(key) + " must be non-negative");
        out = static_cast<T>(*v);
        return;
      }
    }
    throw ConfigError(where(key) + " has the wrong type");
  }

  template <typename T>
  void get_list(const char* key, std::vector<T>& out) const {
    if (!table_) return;
    const toml::node* n = table_->get(key);
    if (!n) return;
    const toml::array* arr = n->as_array();
    if (!arr) throw ConfigError(where(key) + " must be an array");
    std::vector<T> vals;
    for (const auto& el : *arr) {
      if constexpr (std::is_same_v<T, std::string>) {
        if (auto v = el.value_exact<std::string>()) {
          vals.push_back(*v);
          continue;
        }
        if (auto v = el.value<double>()) {
          vals.push_back(fmt_number(*v));
          continue;
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (auto v = el.value<double>()) {
          vals.push_back(*v);
          continue;
        }
      } else {
        if (auto v = el.value_exact<std::int64_t>()) {
          if (*v < 0) throw ConfigError(where(key) + " entries must be non-negative");
          vals.push_back(static_cast<T>(*v));
          continue;
        }
      }
      throw ConfigError(where(key) + " has an entry of the wrong type");
    }
    out = std::move(vals);
  }

  void get_pair(const char* key, std::array<double, 2>& out) const {
    std::vector<double> v;
    get_list(key, v);
    if (v.empty()) return;
    if (v.size() != 2) throw ConfigError(where(key) + " needs one value per qubit");
    out = {v[0], v[1]};
  }

 private:
  std::string where(const char* key) const { return "[" + name_ + "] " + key; }
  const toml::table* table_;
  std::string name_;
};

const toml::table* subtable(const toml::table& root, const char* key) {
  const toml::node* n = root.get(key);
  if (!n) return nullptr;
  if (!n->is_table()) throw ConfigError(std::string("'") + key + "' must be a table");
  return n->as_table();
}

NodeRule parse_rule(const std::string& s) {
  if (s == "left") return NodeRule::Left;
  if (s == "midpoint") return NodeRule::Midpoint;
  if (s == "right") return NodeRule::Right;
  throw ConfigError("node_rule must be left, midpoint or right");
}

// ---------------------------------------------------------------- runs

struct ModeSpec {
  std::string mode;
  bool merged = false;
  double tau = 0.0;  // per propagator, single-gate modes
};

ModeSpec parse_mode(const std::string& mode, const DevicePreset& preset) {
  ModeSpec m{mode};
  if (mode == "merged") {
    m.merged = true;
  } else if (mode == "tau_u") {
    m.tau = preset.tau_u_ns;
  } else {
    char* end = nullptr;
    m.tau = std::strtod(mode.c_str(), &end);
    if (end == mode.c_str() || *end != '\0' || !(m.tau > 0.0))
      throw ConfigError("device mode '" + mode + "' is not 'tau_u', 'merged' or a length in ns");
  }
  return m;
}

struct PulsePlan {
  std::vector<Mat4> targets;
  std::vector<double> taus;
  int pulses_per_step = 1;
};

PulsePlan pulse_plan(const ExperimentConfig& cfg, const DevicePreset& preset, const ModeSpec& mode) {
  PulsePlan plan;
  const Schedule sched = cfg.schedule();
  const TrotterPlan tp = cfg.plan();
  if (mode.merged) {
    const GateDurations durations = merged_gate_durations(preset);
    for (int k = 1; k <= tp.steps; ++k) {
      const Circuit c = merged_propagator_circuit(sched, tp, k);
      plan.pulses_per_step = static_cast<int>(c.size());
      for (const Gate& g : c.gates) {
        const auto it = durations.find(gate_kind(g));
        if (it == durations.end()) throw ConfigError("no pulse length for gate kind " + gate_kind(g));
        plan.targets.push_back(gate_target(g));
        plan.taus.push_back(it->second);
      }
    }
  } else {
    for (int k = 1; k <= tp.steps; ++k) {
      plan.targets.push_back(short_time_propagator(sched, tp, k));
      plan.taus.push_back(mode.tau);
    }
  }
  return plan;
}

DeviceParams synthesis_device(const ExperimentConfig& cfg) {
  DeviceParams p = cfg.device;
  p.noise = NoiseParams::noiseless();
  return p;
}

fs::path cache_dir(const ExperimentConfig& cfg, const fs::path& out) {
  return cfg.pulse_cache.empty() ? out / "pulse_cache" : fs::path(cfg.pulse_cache);
}

std::vector<PulseSequence> pulses_of(const std::vector<OptimizationResult>& results) {
  std::vector<PulseSequence> out;
  out.reserve(results.size());
  for (const auto& r : results) out.push_back(r.pulse);
  return out;
}

struct DeviceRun {
  std::string preset;
  std::string mode;
  DeviceTrajectory trajectory;
  double duration_ns = 0.0;
  double worst_infidelity = 0.0;
};

std::vector<DeviceRun> device_runs(const ExperimentConfig& cfg, const fs::path& out,
                                   const std::vector<std::pair<std::string, std::string>>& combos) {
  const int threads = resolve_threads(cfg.threads);
  const DeviceParams synth = synthesis_device(cfg);
  PulseCache cache(cache_dir(cfg, out));

  // One global synthesis pass so distinct gates optimize in parallel.
  std::vector<PulsePlan> plans;
  std::vector<Mat4> targets;
  std::vector<double> taus;
  for (const auto& [preset, mode] : combos) {
    plans.push_back(pulse_plan(cfg, cfg.preset(preset), parse_mode(mode, cfg.preset(preset))));
    targets.insert(targets.end(), plans.back().targets.begin(), plans.back().targets.end());
    taus.insert(taus.end(), plans.back().taus.begin(), plans.back().taus.end());
  }
  const auto results = synthesize_pulses(targets, taus, synth, cfg.grape, &cache, threads);

  std::vector<DeviceRun> runs(combos.size());
  std::vector<std::size_t> offsets(combos.size(), 0);
  for (std::size_t i = 1; i < combos.size(); ++i) offsets[i] = offsets[i - 1] + plans[i - 1].targets.size();

  parallel_for(combos.size(), threads, [&](std::size_t i) {
    const auto& [preset_name, mode] = combos[i];
    const DevicePreset& preset = cfg.preset(preset_name);
    const PulsePlan& plan = plans[i];
    std::vector<OptimizationResult> mine(results.begin() + offsets[i],
                                         results.begin() + offsets[i] + plan.targets.size());
    DeviceRun& run = runs[i];
    run.preset = preset_name;
    run.mode = mode;
    for (const auto& r : mine) {
      run.duration_ns += r.pulse.duration();
      run.worst_infidelity = std::max(run.worst_infidelity, r.report.final_gate_infidelity);
    }
    const DeviceParams p = device_for(cfg, preset, cfg.noise);
    IntegratorOptions opt;
    opt.substeps = cfg.substeps;
    run.trajectory = run_schedule(pulses_of(mine), p, initial_device_state(p),
                                  ScheduleRun{cfg.schedule(), cfg.plan(), plan.pulses_per_step}, opt);
  });
  return runs;
}

Mat4 normalized_density(const Mat4& rho) { return rho / rho.trace().real(); }

Probabilities rotated_populations(const Mat4& rho, const Mat4& u) {
  const Mat4 r = u * rho * u.adjoint();
  Probabilities p;
  for (int i = 0; i < 4; ++i) p(i) = std::max(0.0, r(i, i).real());
  return p / p.sum();
}

}  // namespace

// ---------------------------------------------------------------- presets

const std::vector<DevicePreset>& builtin_presets() {
  static const std::vector<DevicePreset> presets = [] {
    auto readout = [](double a01, double a10, double b01, double b10) {
      ReadoutModel m;
      m.qubits[0] = {a01, a10};
      m.qubits[1] = {b01, b10};
      return m;
    };
    return std::vector<DevicePreset>{
        {"belem", {102.6, 70.4}, {127.3, 104.5}, 810.7, 2500.0, readout(0.060, 0.012, 0.055, 0.010)},
        {"casablanca", {111.7, 130.1}, {40.7, 102.2}, 760.9, 2400.0, readout(0.050, 0.010, 0.045, 0.012)},
        {"lima", {101.6, 113.0}, {180.0, 106.9}, 305.8, 1000.0, readout(0.040, 0.008, 0.050, 0.015)},
        {"manila", {136.0, 244.2}, {112.8, 46.7}, 277.3, 900.0, readout(0.035, 0.010, 0.030, 0.008)},
    };
  }();
  return presets;
}

const DevicePreset& ExperimentConfig::preset(const std::string& name) const {
  for (const auto& p : presets)
    if (p.name == name) return p;
  throw ConfigError("unknown device preset '" + name + "'");
}

ReadoutModel ExperimentConfig::readout_model(const std::string& name) const {
  if (name == "ideal") return ReadoutModel::ideal();
  return preset(name).readout;
}

void ExperimentConfig::validate() const {
  try {
    Schedule s(total_time);
    (void)s;
    if (steps < 1) throw ConfigError("steps must be positive");
    for (double t : sweep_total_times)
      if (!(t > 0.0)) throw ConfigError("sweep_total_times entries must be positive");
    for (int n : sweep_steps)
      if (n < 1) throw ConfigError("sweep_steps entries must be positive");
    if (dt_fine < 0.0) throw ConfigError("dt_fine must be non-negative");
    device.validate();
    grape.validate();
    for (double tau : synth_taus)
      if (!(tau > 0.0)) throw ConfigError("synth_taus entries must be positive");
    for (const auto& p : presets) {
      for (int i = 0; i < 2; ++i)
        if (!(p.t1_us[i] > 0.0) || !(p.t2_us[i] > 0.0)) throw ConfigError("preset " + p.name + " needs positive T1/T2");
      if (!(p.tau_u_ns > 0.0) || !(p.tau_cnot_ns > 0.0)) throw ConfigError("preset " + p.name + " needs gate times");
      p.readout.validate();
    }
    for (const auto& name : run_presets) {
      const DevicePreset& p = preset(name);
      for (const auto& mode : device_modes) parse_mode(mode, p);
    }
    if (substeps < 1) throw ConfigError("substeps must be positive");
    if (shots == 0) throw ConfigError("shots must be positive");
    if (seeds < 1) throw ConfigError("seeds must be positive");
    readout_model(readout);
    for (const auto& m : study_models) readout_model(m);
    for (auto n : shot_grid)
      if (n == 0) throw ConfigError("shot_grid entries must be positive");
    if (tomography_source != "ideal") {
      if (tomography_source.rfind("device:", 0) != 0) throw ConfigError("tomography_source must be ideal or device:<preset>:<mode>");
      const auto rest = tomography_source.substr(7);
      const auto colon = rest.find(':');
      if (colon == std::string::npos) throw ConfigError("tomography_source must be device:<preset>:<mode>");
      parse_mode(rest.substr(colon + 1), preset(rest.substr(0, colon)));
    }
    if (threads < 0) throw ConfigError("threads must be non-negative");
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig parse_config(std::string_view toml_text) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML parse error: " << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError(msg.str());
  }
  for (const auto& [k, v] : root) {
    (void)v;
    static const std::set<std::string> top{"problem", "device", "grape", "sampling", "output", "run"};
    if (!top.count(std::string(k.str()))) throw ConfigError("unknown section [" + std::string(k.str()) + "]");
  }

  ExperimentConfig cfg;
  {
    Section s(subtable(root, "problem"), "problem",
              {"total_time", "steps", "node_rule", "sweep_total_times", "sweep_steps", "dt_fine"});
    s.get("total_time", cfg.total_time);
    s.get("steps", cfg.steps);
    std::string rule = "midpoint";
    s.get("node_rule", rule);
    cfg.rule = parse_rule(rule);
    s.get_list("sweep_total_times", cfg.sweep_total_times);
    s.get_list("sweep_steps", cfg.sweep_steps);
    if (cfg.sweep_total_times.empty()) cfg.sweep_total_times = {cfg.total_time};
    if (cfg.sweep_steps.empty()) cfg.sweep_steps = {cfg.steps};
    s.get("dt_fine", cfg.dt_fine);
  }
  const toml::table* device = subtable(root, "device");
  {
    Section s(device, "device",
              {"alpha_mhz", "coupling_mhz", "levels", "noise", "dephasing", "swapped_orderings", "run_presets", "substeps",
               "presets"});
    s.get("alpha_mhz", cfg.device.alpha_mhz);
    s.get("coupling_mhz", cfg.device.coupling_mhz);
    s.get("levels", cfg.device.levels);
    s.get("noise", cfg.noise);
    std::string dephasing = "t2";
    s.get("dephasing", dephasing);
    if (dephasing == "t2") {
      cfg.device.noise.dephasing = NoiseParams::Dephasing::T2Rate;
    } else if (dephasing == "pure") {
      cfg.device.noise.dephasing = NoiseParams::Dephasing::PureDephasing;
    } else {
      throw ConfigError("[device] dephasing must be 't2' or 'pure'");
    }
    s.get("swapped_orderings", cfg.device.noise.swapped_orderings);
    s.get_list("run_presets", cfg.run_presets);
    s.get("substeps", cfg.substeps);
  }
  if (device) {
    if (const toml::table* presets = subtable(*device, "presets")) {
      for (const auto& [k, v] : *presets) {
        const std::string name(k.str());
        if (!v.is_table()) throw ConfigError("[device.presets." + name + "] must be a table");
        Section s(v.as_table(), "device.presets." + name,
                  {"t1_us", "t2_us", "tau_cnot_ns", "tau_u_ns", "readout_p01", "readout_p10"});
        auto it = std::find_if(cfg.presets.begin(), cfg.presets.end(), [&](const auto& p) { return p.name == name; });
        if (it == cfg.presets.end()) {
          DevicePreset fresh;
          fresh.name = name;
          cfg.presets.push_back(fresh);
          it = cfg.presets.end() - 1;
          for (const char* required : {"t1_us", "t2_us", "tau_cnot_ns", "tau_u_ns"})
            if (!v.as_table()->contains(required))
              throw ConfigError("[device.presets." + name + "] is missing " + required);
        }
        s.get_pair("t1_us", it->t1_us);
        s.get_pair("t2_us", it->t2_us);
        s.get("tau_cnot_ns", it->tau_cnot_ns);
        s.get("tau_u_ns", it->tau_u_ns);
        std::array<double, 2> p01{it->readout.qubits[0].p01, it->readout.qubits[1].p01};
        std::array<double, 2> p10{it->readout.qubits[0].p10, it->readout.qubits[1].p10};
        s.get_pair("readout_p01", p01);
        s.get_pair("readout_p10", p10);
        for (int i = 0; i < 2; ++i) it->readout.qubits[i] = {p01[i], p10[i]};
      }
    }
  }
  {
    Section s(subtable(root, "grape"), "grape",
              {"eps_cut", "penalty_exponent", "chi", "max_iterations", "target_infidelity", "init_amplitude",
               "sample_rate", "seed", "synth_taus", "device_modes", "pulse_cache"});
    s.get("eps_cut", cfg.grape.eps_cut);
    s.get("penalty_exponent", cfg.grape.penalty_exponent);
    s.get("chi", cfg.grape.chi);
    s.get("max_iterations", cfg.grape.max_iterations);
    s.get("target_infidelity", cfg.grape.target_infidelity);
    s.get("init_amplitude", cfg.grape.init_amplitude);
    s.get("sample_rate", cfg.grape.sample_rate);
    s.get("seed", cfg.grape.seed);
    s.get_list("synth_taus", cfg.synth_taus);
    s.get_list("device_modes", cfg.device_modes);
    s.get("pulse_cache", cfg.pulse_cache);
  }
  {
    Section s(subtable(root, "sampling"), "sampling",
              {"shots", "seeds", "seed", "mitigation", "readout", "tomography_source", "shot_grid", "study_models"});
    s.get("shots", cfg.shots);
    s.get("seeds", cfg.seeds);
    s.get("seed", cfg.seed);
    s.get("mitigation", cfg.mitigation);
    s.get("readout", cfg.readout);
    s.get("tomography_source", cfg.tomography_source);
    s.get_list("shot_grid", cfg.shot_grid);
    s.get_list("study_models", cfg.study_models);
  }
  {
    Section s(subtable(root, "output"), "output", {"dir"});
    s.get("dir", cfg.output_dir);
  }
  {
    Section s(subtable(root, "run"), "run", {"threads"});
    s.get("threads", cfg.threads);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ADIA_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// ---------------------------------------------------------------- pulses

std::string PulseCache::key(const Mat4& target, double tau, const DeviceParams& p, const GrapeConfig& cfg) {
  std::ostringstream s;
  s << std::setprecision(12) << std::scientific;
  // Twelve significant digits: targets equal within ~1e-12 share a key.
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const cd z = target(i, j);
      s << (std::abs(z.real()) < 1e-13 ? 0.0 : z.real()) << ',' << (std::abs(z.imag()) < 1e-13 ? 0.0 : z.imag())
        << ';';
    }
  s << tau << '|' << p.alpha_mhz << '|' << p.coupling_mhz << '|' << p.levels << '|' << cfg.eps_cut << '|'
    << cfg.penalty_exponent << '|' << cfg.chi << '|' << cfg.max_iterations << '|' << cfg.target_infidelity << '|'
    << cfg.seed << '|' << cfg.init_amplitude << '|' << cfg.sample_rate << '|' << cfg.gradient_tolerance;
  return hex64(fnv1a64(s.str()));
}

std::optional<OptimizationResult> PulseCache::load(const std::string& key) const {
  const fs::path csv = dir_ / ("pulse_" + key + ".csv");
  const fs::path meta = dir_ / ("pulse_" + key + ".json");
  if (!fs::exists(csv) || !fs::exists(meta)) return std::nullopt;
  try {
    OptimizationResult r;
    std::ifstream in(csv);
    r.pulse = PulseSequence::read_csv(in);
    std::ifstream mj(meta);
    const auto j = nlohmann::json::parse(mj);
    auto& rep = r.report;
    rep.iterations = j.at("iterations");
    rep.evaluations = j.at("evaluations");
    rep.final_objective = j.at("final_objective");
    rep.final_gate_infidelity = j.at("final_gate_infidelity");
    rep.rms_amplitude = j.at("rms_amplitude");
    rep.max_amplitude = j.at("max_amplitude");
    rep.converged = j.at("converged");
    rep.within_amplitude_threshold = j.at("within_amplitude_threshold");
    rep.stop_reason = j.at("stop_reason");
    rep.objective_history = j.at("objective_history").get<std::vector<double>>();
    return r;
  } catch (const std::exception&) {
    return std::nullopt;  // unreadable entries are recomputed
  }
}

void PulseCache::store(const std::string& key, const OptimizationResult& r) const {
  ensure_dir(dir_);
  const fs::path csv = dir_ / ("pulse_" + key + ".csv");
  const fs::path meta = dir_ / ("pulse_" + key + ".json");
  {
    std::ofstream out(csv.string() + ".tmp");
    r.pulse.write_csv(out);
  }
  nlohmann::ordered_json j;
  const auto& rep = r.report;
  j["iterations"] = rep.iterations;
  j["evaluations"] = rep.evaluations;
  j["final_objective"] = rep.final_objective;
  j["final_gate_infidelity"] = rep.final_gate_infidelity;
  j["rms_amplitude"] = rep.rms_amplitude;
  j["max_amplitude"] = rep.max_amplitude;
  j["converged"] = rep.converged;
  j["within_amplitude_threshold"] = rep.within_amplitude_threshold;
  j["stop_reason"] = rep.stop_reason;
  j["objective_history"] = rep.objective_history;
  {
    std::ofstream out(meta.string() + ".tmp");
    out << j.dump();
  }
  fs::rename(csv.string() + ".tmp", csv);
  fs::rename(meta.string() + ".tmp", meta);
}

std::vector<OptimizationResult> synthesize_pulses(const std::vector<Mat4>& targets, const std::vector<double>& taus,
                                                  const DeviceParams& p, const GrapeConfig& cfg,
                                                  const PulseCache* cache, int threads) {
  if (targets.size() != taus.size()) throw ValidationError("one pulse length per target is required");
  // Deduplicate on (matrix within 1e-12, tau).
  std::vector<std::size_t> job_of(targets.size());
  std::vector<std::size_t> jobs;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    std::size_t found = jobs.size();
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      const std::size_t r = jobs[j];
      if (taus[r] == taus[i] && (targets[r] - targets[i]).cwiseAbs().maxCoeff() <= 1e-12) {
        found = j;
        break;
      }
    }
    if (found == jobs.size()) jobs.push_back(i);
    job_of[i] = found;
  }

  std::vector<OptimizationResult> done(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t j) {
    const std::size_t i = jobs[j];
    const std::string key = PulseCache::key(targets[i], taus[i], p, cfg);
    if (cache) {
      if (auto hit = cache->load(key)) {
        done[j] = std::move(*hit);
        return;
      }
    }
    done[j] = optimize(embed_target(targets[i], p), taus[i], p, cfg);
    if (cache) cache->store(key, done[j]);
  });

  std::vector<OptimizationResult> out;
  out.reserve(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) out.push_back(done[job_of[i]]);
  return out;
}

Circuit merged_propagator_circuit(const Schedule& sched, const TrotterPlan& plan, int k) {
  return merge_u3_pairs(decompose_two_qubit(short_time_propagator(sched, plan, k)));
}

GateDurations merged_gate_durations(const DevicePreset& preset) {
  const auto round5 = [](double x) { return std::max(5.0, 5.0 * std::round(x / 5.0)); };
  const double cnot = round5(preset.tau_cnot_ns);
  const double single = round5((preset.tau_u_ns - 3.0 * cnot) / 4.0);
  return {{"CNOT", cnot}, {"UNITARY", single}, {"U3", single}};
}

DeviceParams device_for(const ExperimentConfig& cfg, const DevicePreset& preset, bool noisy) {
  DeviceParams p = cfg.device;
  if (noisy) {
    p.noise.t1_us = preset.t1_us;
    p.noise.t2_us = preset.t2_us;
  } else {
    p.noise.t1_us = NoiseParams::noiseless().t1_us;
    p.noise.t2_us = NoiseParams::noiseless().t2_us;
  }
  return p;
}

// ---------------------------------------------------------------- commands

CommandResult cmd_exact_evolve(const ExperimentConfig& cfg, const fs::path& out) {
  CommandResult res;
  std::ostringstream summary;
  summary << "kind,T_ns,steps,final_fidelity,final_energy\n" << std::setprecision(12);
  for (double t : cfg.sweep_total_times) {
    const Schedule sched(t);
    const Trajectory tr = evolve_exact(sched, initial_state(), cfg.dt_fine > 0.0 ? cfg.dt_fine : t / 2000.0);
    const std::string name = "exact_T" + fmt_number(t) + ".csv";
    auto f = open_out(out / name);
    tr.write_csv(f);
    res.files.push_back(name);
    summary << "exact," << t << ",0," << tr.fidelities.back() << ',' << tr.energies.back() << '\n';
  }
  for (int n : cfg.sweep_steps) {
    const Schedule sched(cfg.total_time);
    const TrotterPlan plan{n, cfg.total_time, cfg.rule};
    const Trajectory tr = trotter_evolve(sched, plan, initial_state());
    const std::string name = "trotter_n" + std::to_string(n) + ".csv";
    auto f = open_out(out / name);
    tr.write_csv(f);
    res.files.push_back(name);
    summary << "trotter," << cfg.total_time << ',' << n << ',' << tr.fidelities.back() << ',' << tr.energies.back()
            << '\n';
  }
  auto f = open_out(out / "exact_summary.csv");
  f << summary.str();
  res.files.push_back("exact_summary.csv");
  return res;
}

CommandResult cmd_grape_synth(const ExperimentConfig& cfg, const fs::path& out) {
  CommandResult res;
  const DeviceParams p = synthesis_device(cfg);
  const Schedule sched = cfg.schedule();
  const TrotterPlan plan = cfg.plan();
  PulseCache cache(cache_dir(cfg, out));

  std::vector<Mat4> targets;
  std::vector<double> taus;
  for (double tau : cfg.synth_taus)
    for (int k = 1; k <= plan.steps; ++k) {
      targets.push_back(short_time_propagator(sched, plan, k));
      taus.push_back(tau);
    }
  const auto results = synthesize_pulses(targets, taus, p, cfg.grape, &cache, resolve_threads(cfg.threads));

  nlohmann::ordered_json report = nlohmann::ordered_json::object();
  std::ostringstream summary;
  summary << "tau_ns,k,gate_infidelity,rms_amplitude_mhz,max_amplitude_mhz,iterations,converged,within_alpha_20\n"
          << std::setprecision(12);
  int failures = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const int k = static_cast<int>(i % plan.steps) + 1;
    const double tau = taus[i];
    const auto& r = results[i];
    const std::string name = "pulses/tau" + fmt_number(tau) + "/k" + two_digits(k) + ".csv";
    auto f = open_out(out / name);
    r.pulse.write_csv(f);
    res.files.push_back(name);
    const auto& rep = r.report;
    nlohmann::ordered_json entry;
    entry["k"] = k;
    entry["gate_infidelity"] = rep.final_gate_infidelity;
    entry["rms_amplitude_mhz"] = rep.rms_amplitude;
    entry["max_amplitude_mhz"] = rep.max_amplitude;
    entry["iterations"] = rep.iterations;
    entry["converged"] = rep.converged;
    entry["within_alpha_20"] = rep.within_amplitude_threshold;
    entry["stop_reason"] = rep.stop_reason;
    entry["pulse_csv"] = name;
    report[fmt_number(tau)].push_back(entry);
    summary << tau << ',' << k << ',' << rep.final_gate_infidelity << ',' << rep.rms_amplitude << ','
            << rep.max_amplitude << ',' << rep.iterations << ',' << rep.converged << ','
            << rep.within_amplitude_threshold << '\n';
    if (!rep.converged) ++failures;
  }
  {
    auto f = open_out(out / "grape_report.json");
    f << report.dump(2) << '\n';
    res.files.push_back("grape_report.json");
  }
  {
    auto f = open_out(out / "grape_summary.csv");
    f << summary.str();
    res.files.push_back("grape_summary.csv");
  }
  if (failures > 0) {
    res.numerical_failure = true;
    res.message = std::to_string(failures) + " pulse(s) did not reach the target infidelity";
  }
  return res;
}

CommandResult cmd_device_sim(const ExperimentConfig& cfg, const fs::path& out) {
  CommandResult res;
  std::vector<std::pair<std::string, std::string>> combos;
  for (const auto& preset : cfg.run_presets)
    for (const auto& mode : cfg.device_modes) combos.emplace_back(preset, mode);
  const auto runs = device_runs(cfg, out, combos);

  std::ostringstream summary;
  summary << "preset,mode,schedule_ns,final_fidelity,final_energy,final_dominant_energy,final_leakage,"
             "worst_gate_infidelity\n"
          << std::setprecision(12);
  for (const auto& run : runs) {
    const std::string name = "device/" + run.preset + "_" + run.mode + ".csv";
    auto f = open_out(out / name);
    run.trajectory.write_csv(f);
    res.files.push_back(name);
    const auto& t = run.trajectory;
    summary << run.preset << ',' << run.mode << ',' << run.duration_ns << ',' << t.fidelities.back() << ','
            << t.energies.back() << ',' << t.dominant_energies.back() << ',' << t.leakage.back() << ','
            << run.worst_infidelity << '\n';
  }
  auto f = open_out(out / "device_summary.csv");
  f << summary.str();
  res.files.push_back("device_summary.csv");
  return res;
}

CommandResult cmd_tomography(const ExperimentConfig& cfg, const fs::path& out) {
  CommandResult res;
  const Schedule sched = cfg.schedule();
  const TrotterPlan plan = cfg.plan();

  std::vector<Mat4> states;  // normalized computational-block density per step
  if (cfg.tomography_source == "ideal") {
    const Trajectory tr = trotter_evolve(sched, plan, initial_state());
    for (const auto& psi : tr.states) states.push_back(psi * psi.adjoint());
  } else {
    const auto rest = cfg.tomography_source.substr(7);
    const auto colon = rest.find(':');
    const auto runs = device_runs(cfg, out, {{rest.substr(0, colon), rest.substr(colon + 1)}});
    for (const auto& rho : runs[0].trajectory.densities) states.push_back(normalized_density(rho));
  }

  const ReadoutModel model = cfg.readout_model(cfg.readout);
  const Mat4 ht = build_ht().matrix();
  const Probabilities cal00_ideal(1.0, 0.0, 0.0, 0.0);
  const Probabilities cal11_ideal(0.0, 0.0, 0.0, 1.0);
  const MeasurementAxis axes[3] = {MeasurementAxis::Z, MeasurementAxis::X, MeasurementAxis::Y};

  std::ostringstream csv;
  csv << "t_ns,fidelity_exact,fidelity_raw,fidelity_mitigated,energy_exact,energy_raw,energy_mitigated,clipped\n"
      << std::setprecision(12);
  for (std::size_t k = 0; k < states.size(); ++k) {
    const Mat4& rho = states[k];
    const Mat4 probe = circuit_unitary(build_fidelity_probe(sched, plan, static_cast<int>(k)));
    const Probabilities p_probe = rotated_populations(rho, probe);
    std::array<Probabilities, 3> p_basis;
    for (int b = 0; b < 3; ++b)
      p_basis[b] = rotated_populations(rho, kron(axis_rotation(axes[b]), axis_rotation(axes[b])));

    const auto draw = [&](const Probabilities& p, std::uint64_t stream) {
      return sample_counts(p, cfg.shots, model, stream_seed(cfg.seed, 16 * k + stream));
    };
    const Counts c_probe = draw(p_probe, 0);
    std::array<Counts, 3> c_basis{draw(p_basis[0], 1), draw(p_basis[1], 2), draw(p_basis[2], 3)};

    const double f_exact = estimate_fidelity(p_probe);
    const double e_exact = (rho * ht).trace().real();
    const double f_raw = estimate_fidelity(c_probe);
    const double e_raw = estimate_ht(c_basis[0], c_basis[1], c_basis[2]);
    double f_mit = f_raw, e_mit = e_raw;
    bool clipped = false;
    if (cfg.mitigation) {
      // Fresh calibration at every step.
      const ConfusionMatrix conf = build_confusion(draw(cal00_ideal, 4), draw(cal11_ideal, 5));
      const auto m_probe = mitigate(c_probe, conf);
      std::array<MitigationResult, 3> m;
      for (int b = 0; b < 3; ++b) m[b] = mitigate(c_basis[b], conf);
      f_mit = estimate_fidelity(m_probe.probabilities);
      e_mit = estimate_ht(m[0].probabilities, m[1].probabilities, m[2].probabilities);
      clipped = m_probe.clipped || m[0].clipped || m[1].clipped || m[2].clipped;
    }
    csv << plan.end_time(static_cast<int>(k)) << ',' << f_exact << ',' << f_raw << ',' << f_mit << ',' << e_exact
        << ',' << e_raw << ',' << e_mit << ',' << clipped << '\n';
  }
  auto f = open_out(out / "tomography.csv");
  f << csv.str();
  res.files.push_back("tomography.csv");
  return res;
}

CommandResult cmd_error_study(const ExperimentConfig& cfg, const fs::path& out) {
  CommandResult res;
  std::vector<std::vector<ShotErrorRow>> tables(cfg.study_models.size());
  parallel_for(cfg.study_models.size(), resolve_threads(cfg.threads), [&](std::size_t i) {
    tables[i] = error_vs_shots(uniform_probabilities(), cfg.readout_model(cfg.study_models[i]), cfg.shot_grid,
                               cfg.seeds, stream_seed(cfg.seed, i));
  });
  std::ostringstream csv;
  csv << "model,shots,mean_deviation,standard_error\n" << std::setprecision(12);
  for (std::size_t i = 0; i < tables.size(); ++i)
    for (const auto& row : tables[i])
      csv << cfg.study_models[i] << ',' << row.shots << ',' << row.mean_deviation << ',' << row.standard_error << '\n';
  auto f = open_out(out / "error_study.csv");
  f << csv.str();
  res.files.push_back("error_study.csv");
  return res;
}

void write_manifest(const fs::path& out, const std::string& command, std::uint64_t config_hash, std::uint64_t seed,
                    std::vector<std::string> files) {
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config_hash"] = hex64(config_hash);
  j["seed"] = seed;
  j["versions"] = {{"adia", "0.1.0"}, {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                                    std::to_string(EIGEN_MINOR_VERSION)}};
  j["files"] = files;
  auto f = open_out(out / "manifest.json");
  f << j.dump(2) << '\n';
}

}  // namespace adia
