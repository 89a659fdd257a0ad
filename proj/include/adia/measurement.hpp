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

// Shot sampling with readout error, expectation estimation and
// confusion-matrix mitigation.
//
// Outcome index 2 q1 + q2, labelled "q1q2". A measured bit 1 corresponds to
// the +1 eigenvalue of sigma^z in this library's convention.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "adia/circuits.hpp"
#include "adia/spin_system.hpp"

namespace adia {

using Probabilities = Eigen::Vector4d;

struct Counts {
  std::array<std::uint64_t, 4> n{};

  std::uint64_t total() const { return n[0] + n[1] + n[2] + n[3]; }
  Probabilities frequencies() const;
  void validate() const;

  static std::string label(int outcome);
  std::string to_json() const;
  static Counts from_json(const std::string& text);
};

/// Per-qubit flip probabilities: p01 = P(read 0 | prepared 1),
/// p10 = P(read 1 | prepared 0).
struct QubitReadout {
  double p01 = 0.0;
  double p10 = 0.0;
};

struct ConfusionMatrix {
  /// P(measured row | prepared column); columns sum to 1.
  Eigen::Matrix4d matrix = Eigen::Matrix4d::Identity();

  void validate() const;
  double condition_number() const;
  Probabilities apply(const Probabilities& p) const { return matrix * p; }
};

struct ReadoutModel {
  std::array<QubitReadout, 2> qubits{};

  static ReadoutModel ideal() { return {}; }
  void validate() const;
  /// Tensor product of the per-qubit 2x2 matrices [[1-p10, p01], [p10, 1-p01]].
  ConfusionMatrix confusion() const;
};

/// Computational-basis populations of a two-qubit state.
Probabilities probabilities(const Vec4& psi);

/// Populations of a 4x4 density matrix, or of a device-space density matrix
/// with any excited level read as bit 1.
Probabilities probabilities(const MatX& rho);

/// Multinomial draw of N shots from the readout-corrupted distribution.
Counts sample_counts(const Probabilities& ideal, std::uint64_t shots, const ReadoutModel& model,
                     std::uint64_t seed);

/// <sigma^a sigma^b> from data measured after basis_rotation for the
/// corresponding axes; identity factors marginalize.
double estimate_pauli(const Probabilities& freq, Pauli a, Pauli b);
double estimate_pauli(const Counts& counts, Pauli a, Pauli b);

using BasisKey = std::pair<MeasurementAxis, MeasurementAxis>;

/// Probabilities measured after rotating qubit 1 into axis `first` and qubit 2
/// into axis `second`.
Probabilities rotated_probabilities(const Vec4& psi, const BasisKey& basis);

/// Sum of h_ab <sigma^a sigma^b>, each term taken from a compatible dataset.
double estimate_hamiltonian(const PauliSum& h, const std::map<BasisKey, Probabilities>& data);

/// <H_T> from the ZZ, XX and YY datasets.
double estimate_ht(const Probabilities& z, const Probabilities& x, const Probabilities& y);
double estimate_ht(const Counts& z, const Counts& x, const Counts& y);

/// sqrt(p_00) of a fidelity-probe measurement.
double estimate_fidelity(const Probabilities& freq);
double estimate_fidelity(const Counts& counts);

/// Single-qubit flip probabilities inferred from |00> and |11> calibrations.
ReadoutModel infer_readout_model(const Counts& cal00, const Counts& cal11);
ConfusionMatrix build_confusion(const Counts& cal00, const Counts& cal11);

struct MitigationResult {
  Probabilities probabilities;
  double condition_number = 0.0;
  bool clipped = false;
};

MitigationResult mitigate(const Probabilities& measured, const ConfusionMatrix& p);
MitigationResult mitigate(const Counts& counts, const ConfusionMatrix& p);

struct ShotErrorRow {
  std::uint64_t shots = 0;
  double mean_deviation = 0.0;  // mean over outcomes of |f - p|, averaged over seeds
  double standard_error = 0.0;
};

/// Average deviation of sampled frequencies from `ideal` for each N.
std::vector<ShotErrorRow> error_vs_shots(const Probabilities& ideal, const ReadoutModel& model,
                                         const std::vector<std::uint64_t>& shot_grid, int seeds,
                                         std::uint64_t base_seed);

/// Expected deviation of a single shot: sum_i 2 p_i (1 - p_i) / 4.
double single_shot_deviation(const Probabilities& p);

/// Uniform superposition H x H |00>.
Probabilities uniform_probabilities();

}  // namespace adia
