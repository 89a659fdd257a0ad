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

// GRAPE synthesis of piecewise-constant control pulses.
//
// A pulse holds four channels (eI1, eQ1, eI2, eQ2) sampled at `sample_rate`
// samples per ns, amplitudes in MHz. Sample j is held constant over
// [j, j+1) / sample_rate.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "adia/circuits.hpp"
#include "adia/transmon.hpp"

namespace adia {

struct PulseSequence {
  double sample_rate = 8.0;
  std::array<std::vector<double>, 4> channels;

  /// Zero pulse of the given duration; duration * sample_rate must be integral.
  static PulseSequence zeros(double duration_ns, double sample_rate = 8.0);

  std::size_t samples() const { return channels[0].size(); }
  double duration() const { return static_cast<double>(samples()) / sample_rate; }
  double dt() const { return 1.0 / sample_rate; }
  void validate() const;

  /// Root mean square over all channels and samples, in MHz.
  double rms_amplitude() const;
  double max_amplitude() const;

  /// Concatenation in time; sample rates must agree.
  PulseSequence& append(const PulseSequence& other);

  void write_csv(std::ostream& out) const;
  static PulseSequence read_csv(std::istream& in);
};

struct GrapeConfig {
  double eps_cut = 30.0;  // MHz
  int penalty_exponent = 3;
  double chi = 1e-3;
  int max_iterations = 2000;
  double target_infidelity = 1e-4;
  std::uint64_t seed = 0;
  double init_amplitude = 0.5;  // MHz
  double sample_rate = 8.0;
  double gradient_tolerance = 1e-10;

  void validate() const;
};

struct OptimizationReport {
  int iterations = 0;
  int evaluations = 0;
  double final_objective = 0.0;
  double final_gate_infidelity = 1.0;
  double rms_amplitude = 0.0;
  double max_amplitude = 0.0;
  std::vector<double> objective_history;
  bool converged = false;  // reached target_infidelity
  /// max |eps| < alpha / 20: a soft hardware-friendliness diagnostic, never enforced.
  bool within_amplitude_threshold = false;
  std::string stop_reason;
};

/// Time-ordered product of the segment exponentials.
MatX propagate_pulse(const PulseSequence& pulse, const DeviceParams& p);

/// |tr(target^dagger realized)| / dim.
double gate_fidelity(const EmbeddedTarget& target, const MatX& realized);
double gate_fidelity(const MatX& target, const MatX& realized);

double amplitude_penalty(const PulseSequence& pulse, const GrapeConfig& cfg);

/// 1 - F^2 / 2 + amplitude_penalty.
double objective(const PulseSequence& pulse, const EmbeddedTarget& target, const DeviceParams& p,
                 const GrapeConfig& cfg);

struct ObjectiveGradient {
  double objective = 0.0;
  double fidelity = 0.0;
  double penalty = 0.0;
  std::array<std::vector<double>, 4> gradient;  // d objective / d eps, per MHz
};

ObjectiveGradient objective_gradient(const PulseSequence& pulse, const EmbeddedTarget& target, const DeviceParams& p,
                                     const GrapeConfig& cfg);

/// Seeded low-amplitude smooth random start.
PulseSequence initial_pulse(double tau_ns, const GrapeConfig& cfg);

struct OptimizationResult {
  PulseSequence pulse;
  OptimizationReport report;
};

OptimizationResult optimize(const EmbeddedTarget& target, double tau_ns, const DeviceParams& p,
                            const GrapeConfig& cfg);

/// Continue from a given pulse instead of the seeded start.
OptimizationResult optimize_from(const EmbeddedTarget& target, PulseSequence start, const DeviceParams& p,
                                 const GrapeConfig& cfg);

/// Gate-kind keys: "U3", "CNOT", "RXX", "UNITARY".
using GateDurations = std::map<std::string, double>;

std::string gate_kind(const Gate& g);

/// Two-qubit unitary a single customized pulse must realize for this gate.
Mat4 gate_target(const Gate& g);

/// One optimized pulse per gate in circuit order; identical (matrix, tau)
/// pairs share a single optimization.
std::vector<OptimizationResult> schedule_for_circuit(const Circuit& c, const GateDurations& per_gate_tau,
                                                     const DeviceParams& p, const GrapeConfig& cfg);

}  // namespace adia
