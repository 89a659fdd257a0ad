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

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "adia/propagation.hpp"

namespace adia {

struct U3Gate {
  double theta = 0.0;
  double phi = 0.0;
  double lambda = 0.0;
  int qubit = 0;
};

struct CnotGate {
  int control = 0;
  int target = 1;
};

/// exp(-i angle X(x)X / 2).
struct RxxGate {
  double angle = 0.0;
};

/// Arbitrary two-qubit unitary acting on both qubits.
struct OpaqueGate {
  Mat4 unitary = Mat4::Identity();
};

using Gate = std::variant<U3Gate, CnotGate, RxxGate, OpaqueGate>;

/// Two-qubit circuit; gates are listed in application order.
struct Circuit {
  static constexpr int kQubits = 2;
  std::vector<Gate> gates;

  Circuit& add(Gate g);
  Circuit& append(const Circuit& other);
  std::size_t size() const { return gates.size(); }
  bool empty() const { return gates.empty(); }

  int count_cnots() const;
  int count_u3() const;
};

/// Validates qubit indices and opaque payloads.
void validate(const Gate& g);

/// Closed-form U3(theta, phi, lambda).
Mat2 u3_matrix(double theta, double phi, double lambda);

/// U3 angles (theta in [0, pi], phi and lambda in (-pi, pi]) of a 2x2 unitary,
/// which the returned gate reproduces up to global phase.
U3Gate u3_from_matrix(const Mat2& u, int qubit);

Mat4 gate_matrix(const Gate& g);

/// G_m ... G_2 G_1 for gates G_1, ..., G_m.
Mat4 circuit_unitary(const Circuit& c);

/// Factors a 4x4 local unitary into A (x) B; throws StructuralError if the
/// matrix is not a tensor product to within `tol`.
std::pair<Mat2, Mat2> factor_tensor_product(const Mat4& u, double tol = 1e-9);

/// U = e^{i phase} (A1 (x) A2) exp(i(a XX + b YY + c ZZ)) (B1 (x) B2).
struct CanonicalForm {
  Mat2 after0, after1;    // A1, A2
  Mat2 before0, before1;  // B1, B2
  double a = 0.0, b = 0.0, c = 0.0;
  double phase = 0.0;

  Mat4 interaction() const;
  Mat4 reconstruct() const;
};

/// Magic-basis (Cartan) decomposition of a two-qubit unitary.
CanonicalForm canonical_decomposition(const Mat4& u);

/// Three CNOTs (control 0, target 1) interleaved with four layers of U3 pairs:
/// [U3 U3] CNOT [U3 U3] CNOT [U3 U3] CNOT [U3 U3]. Equal to `u` up to global phase.
Circuit decompose_two_qubit(const Mat4& u);

/// X(x)X and H(x)H prefix (as U3 gates) followed by the n decomposed short-time propagators.
Circuit build_adiabatic_circuit(const Schedule& sched, const TrotterPlan& plan);

/// Circuit for X(x)X H(x)H U^dagger(t_1) ... U^dagger(t_k); appended after step k
/// it maps the ideal k-step state to |00>. k = 0 yields the inverse prefix.
Circuit build_fidelity_probe(const Schedule& sched, const TrotterPlan& plan, int k);

/// Replaces every simultaneous pair of U3 gates by a single two-qubit opaque gate.
Circuit merge_u3_pairs(const Circuit& c);

enum class MeasurementAxis { X, Y, Z };

/// Per-qubit rotation mapping sigma^a to the measured Z axis (identity for Z).
Mat2 axis_rotation(MeasurementAxis axis);

/// U_a (x) U_a with U (sigma^a (x) sigma^a) U^dagger = sigma^z (x) sigma^z.
Circuit basis_rotation(MeasurementAxis axis);

/// One gate per line: `U3 q theta phi lambda`, `CNOT c t`, `RXX theta`, and
/// `UNITARY` followed by 32 reals (row-major re/im pairs) for opaque gates.
std::string to_text(const Circuit& c);
Circuit parse_circuit(std::string_view text);

/// Maps an angle to (-pi, pi].
double wrap_angle(double x);

}  // namespace adia
