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

// Two-spin Hamiltonians and the interpolation schedule between them.
//
// Basis: computational state |q1 q2> has index 2*q1 + q2, with |0> = spin down
// and |1> = spin up. Pauli matrices are written in this basis with
// sigma_z |up> = +|up>, so sigma_z = diag(-1, +1) and sigma_y = [[0, i], [-i, 0]].
// Energies are angular frequencies in rad/ns (hbar = 1).

#pragma once

#include <array>
#include <map>
#include <utility>
#include <vector>

#include "adia/linalg.hpp"

namespace adia {

enum class Pauli { I, X, Y, Z };

Mat2 pauli_matrix(Pauli p);
char pauli_label(Pauli p);

/// Real linear combination of two-qubit Pauli products sigma^a (x) sigma^b.
class PauliSum {
 public:
  using Key = std::pair<Pauli, Pauli>;

  PauliSum() = default;

  /// Adds `coeff` to the coefficient of sigma^a (x) sigma^b.
  PauliSum& add(Pauli a, Pauli b, double coeff);

  double coeff(Pauli a, Pauli b) const;
  const std::map<Key, double>& terms() const { return terms_; }

  Mat4 matrix() const;

 private:
  std::map<Key, double> terms_;
};

/// sigma^x_1 + sigma^x_2.
PauliSum build_h0();

/// -XX + YY + ZZ/2 - ZI - IZ.
PauliSum build_ht();

enum class Interpolation {
  CosineSquared,  // f = cos^2(pi t / 2T)
  Linear,         // f = 1 - t/T
  Frozen,         // f = 1 everywhere; degenerate, for diagnostics only
};

struct Schedule {
  double total_time = 20.0;  // ns
  Interpolation form = Interpolation::CosineSquared;

  Schedule() = default;
  Schedule(double total_time_ns, Interpolation f = Interpolation::CosineSquared);
};

/// Weights of H0 and HT at one instant; g = 1 - f.
struct Mixing {
  double f;
  double g;
};

Mixing interpolate(const Schedule& sched, double t);

/// d/dt of the weights.
Mixing interpolate_rate(const Schedule& sched, double t);

Mat4 hamiltonian_at(const Schedule& sched, double t);

struct Spectrum {
  Eigen::Vector4d eigenvalues;  // ascending
  Mat4 eigenvectors;            // columns; largest component real positive
};

/// Eigensystem of a Hermitian 4x4 matrix with the phase convention above.
Spectrum diagonalize(const Mat4& h);

Spectrum spectrum_at(const Schedule& sched, double t);

Vec4 ground_state_at(const Schedule& sched, double t);

struct GapInfo {
  double gap;   // min over the grid of eps_1 - eps_0, rad/ns
  double time;  // where it occurs, ns
};

GapInfo min_gap(const Schedule& sched, int grid_points);

/// max_s ||d_s H(s)|| / gap^2 on a uniform grid of s = t/T.
double adiabatic_time_scale(const Schedule& sched, int grid_points);

/// Exact ground energy of HT, (1 - 4 sqrt 2) / 2.
inline double target_ground_energy() { return (1.0 - 4.0 * std::numbers::sqrt2) / 2.0; }

}  // namespace adia
