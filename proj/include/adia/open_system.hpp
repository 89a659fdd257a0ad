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

// Lindblad evolution of the two-transmon density matrix under pulse schedules.

#pragma once

#include <iosfwd>
#include <vector>

#include "adia/pulse_control.hpp"
#include "adia/spin_system.hpp"
#include "adia/transmon.hpp"

namespace adia {

struct DensityMatrix {
  MatX rho;

  static DensityMatrix pure(const VecX& psi);
  static DensityMatrix maximally_mixed(int dim);

  int dim() const { return static_cast<int>(rho.rows()); }
  double trace() const { return rho.trace().real(); }
  double min_eigenvalue() const;
  /// Hermitian to 1e-10, unit trace and eigenvalues above -tol.
  void validate(double tol = 1e-8) const;
};

/// rate * (L rho R - 1/2 {K, rho}). The standard form has R = L^dagger and
/// K = L^dagger L.
struct DissipatorTerm {
  double rate = 0.0;  // 1/ns
  MatX left;
  MatX right;
  MatX anticommutator;
};

struct CollapseOperator {
  double rate = 0.0;  // 1/ns
  MatX op;
};

/// Relaxation a_i at 1/T1_i and dephasing a_i^dagger a_i at the configured
/// dephasing rate; channels with infinite times are omitted.
std::vector<CollapseOperator> collapse_operators(const DeviceParams& p);

/// The generator terms actually integrated: standard D[L] for every collapse
/// operator, or the swapped orderings when noise.swapped_orderings is set.
std::vector<DissipatorTerm> dissipator_terms(const DeviceParams& p);

/// Right-hand side of the master equation, for checks and tests.
MatX lindblad_rhs(const MatX& h, const std::vector<DissipatorTerm>& terms, const MatX& rho);

struct IntegratorOptions {
  int substeps = 4;  // RK4 steps per pulse sample
  double trace_tolerance = 1e-6;
};

/// Piecewise-constant Hamiltonian per sample; the coherent part of each
/// sample is exact and the dissipator is integrated with RK4 in the
/// interaction picture of that sample.
DensityMatrix evolve_density(const DensityMatrix& rho0, const PulseSequence& pulse, const DeviceParams& p,
                             const IntegratorOptions& opt = {});

/// sqrt(<phi|rho|phi>); phi may be 4-dim (computational block) or device-dim.
double mixed_fidelity(const DensityMatrix& rho, const VecX& phi);

struct DominantComponent {
  double weight = 0.0;
  VecX state;
};

/// Largest eigenpair of rho, normalized by its trace.
DominantComponent dominant_component(const DensityMatrix& rho);

struct DeviceTrajectory {
  std::vector<double> step_times;      // ns of the spin problem
  std::vector<Mat4> densities;         // computational block, not renormalized
  std::vector<double> fidelities;
  std::vector<double> energies;        // tr(rho_red H_T) / tr(rho_red)
  std::vector<double> leakage;         // 1 - tr(rho_red)
  std::vector<double> dominant_weights;
  std::vector<double> dominant_energies;
  std::vector<double> full_traces;     // tr of the device-space rho

  std::size_t size() const { return step_times.size(); }
  void write_csv(std::ostream& out) const;
};

struct ScheduleRun {
  Schedule schedule;
  TrotterPlan plan;
  /// Pulses per short-time propagator: 1 for customized propagators, the
  /// gate count per propagator for gate-level emulation.
  int pulses_per_step = 1;
};

/// Plays the pulses in order and records the state after every propagator,
/// against the instantaneous ground state at the end of each step. The first
/// entry is the initial state at t = 0.
DeviceTrajectory run_schedule(const std::vector<PulseSequence>& pulses, const DeviceParams& p,
                              const DensityMatrix& rho0, const ScheduleRun& run, const IntegratorOptions& opt = {});

/// Embedded initial state of the adiabatic evolution.
DensityMatrix initial_device_state(const DeviceParams& p);

}  // namespace adia
