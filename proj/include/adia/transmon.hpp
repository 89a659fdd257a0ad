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

// Rotating-frame model of two coupled transmons.
//
// Device basis: |n1 n2> with n_i < levels has index n1 * levels + n2, so the
// computational states |00>, |01>, |10>, |11> sit at 0, 1, levels, levels + 1.
// Frequencies are quoted in MHz (linear) and enter Hamiltonians as rad/ns.

#pragma once

#include <array>
#include <limits>

#include "adia/linalg.hpp"

namespace adia {

/// MHz (linear frequency) to rad/ns: 2 pi * 1e-3 * f.
double angular_from_mhz(double mhz);

/// Relaxation and dephasing times per transmon, in microseconds. Infinite
/// values switch the corresponding channel off.
struct NoiseParams {
  enum class Dephasing {
    T2Rate,        // rate 1/T2 on a^dagger a
    PureDephasing  // rate 2 (1/T2 - 1/(2 T1)): coherence time matches T2
  };

  std::array<double, 2> t1_us{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  std::array<double, 2> t2_us{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Dephasing dephasing = Dephasing::T2Rate;
  /// Swap a and a^dagger inside the dissipators ({a a^dagger, rho} etc.).
  /// Not trace preserving; diagnostic only.
  bool swapped_orderings = false;

  static NoiseParams noiseless() { return {}; }
  bool is_noiseless() const;
  void validate() const;
};

struct DeviceParams {
  double alpha_mhz = 200.0;   // anharmonicity
  double coupling_mhz = 3.0;  // g
  int levels = 3;             // per transmon
  NoiseParams noise;

  int dim() const { return levels * levels; }
  void validate() const;
};

/// Annihilation operator on one truncated transmon: a|n> = sqrt(n)|n-1>.
MatX lowering_operator(int levels);

/// Lowering operator of transmon `which` (0 or 1) on the two-transmon space.
MatX device_lowering(const DeviceParams& p, int which);

/// -sum_i alpha n_i^2 - g (a1^dagger a2 + a2^dagger a1), rad/ns.
MatX drift_hamiltonian(const DeviceParams& p);

/// G_I^1, G_Q^1, G_I^2, G_Q^2 with G_I = a^dagger + a and G_Q = -i(a^dagger - a).
/// Control Hamiltonian: sum_c angular_from_mhz(eps_c) G_c.
std::array<MatX, 4> control_generators(const DeviceParams& p);

/// Indices of |00>, |01>, |10>, |11> in the device basis.
std::array<int, 4> computational_indices(int levels);

struct EmbeddedTarget {
  MatX unitary;
  std::array<int, 4> computational_indices;

  /// The 4x4 block on the computational subspace.
  Mat4 restriction() const;
};

/// U on the computational subspace, identity on its complement.
EmbeddedTarget embed_target(const Mat4& u, const DeviceParams& p);

VecX embed_state(const Vec4& psi, const DeviceParams& p);

/// 4x4 block of a device operator on the computational subspace.
Mat4 computational_block(const MatX& op, const DeviceParams& p);

}  // namespace adia
