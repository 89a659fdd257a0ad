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

#include "adia/transmon.hpp"

#include <cmath>

namespace adia {

double angular_from_mhz(double mhz) { return 2.0 * kPi * 1e-3 * mhz; }

bool NoiseParams::is_noiseless() const {
  for (int i = 0; i < 2; ++i)
    if (std::isfinite(t1_us[i]) || std::isfinite(t2_us[i])) return false;
  return true;
}

void NoiseParams::validate() const {
  for (int i = 0; i < 2; ++i)
    if (!(t1_us[i] > 0.0) || !(t2_us[i] > 0.0)) throw ValidationError("T1 and T2 must be positive or infinite");
}

void DeviceParams::validate() const {
  if (!(alpha_mhz > 0.0) || !std::isfinite(alpha_mhz)) throw ValidationError("anharmonicity must be positive");
  if (!(coupling_mhz >= 0.0) || !std::isfinite(coupling_mhz)) throw ValidationError("coupling must be non-negative");
  if (levels < 2) throw ValidationError("transmons need at least two levels");
  noise.validate();
}

MatX lowering_operator(int levels) {
  if (levels < 2) throw ValidationError("transmons need at least two levels");
  MatX a = MatX::Zero(levels, levels);
  for (int n = 1; n < levels; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

MatX device_lowering(const DeviceParams& p, int which) {
  const MatX a = lowering_operator(p.levels);
  const MatX id = MatX::Identity(p.levels, p.levels);
  return which == 0 ? kron(a, id) : kron(id, a);
}

MatX drift_hamiltonian(const DeviceParams& p) {
  p.validate();
  const double alpha = angular_from_mhz(p.alpha_mhz);
  const double g = angular_from_mhz(p.coupling_mhz);
  const MatX a1 = device_lowering(p, 0);
  const MatX a2 = device_lowering(p, 1);
  const MatX n1 = a1.adjoint() * a1;
  const MatX n2 = a2.adjoint() * a2;
  MatX h = -alpha * (n1 * n1 + n2 * n2) - g * (a1.adjoint() * a2 + a2.adjoint() * a1);
  return h;
}

std::array<MatX, 4> control_generators(const DeviceParams& p) {
  std::array<MatX, 4> out;
  for (int i = 0; i < 2; ++i) {
    const MatX a = device_lowering(p, i);
    out[2 * i] = a.adjoint() + a;
    out[2 * i + 1] = -kI * (a.adjoint() - a);
  }
  return out;
}

std::array<int, 4> computational_indices(int levels) { return {0, 1, levels, levels + 1}; }

Mat4 EmbeddedTarget::restriction() const {
  Mat4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r(i, j) = unitary(computational_indices[i], computational_indices[j]);
  return r;
}

EmbeddedTarget embed_target(const Mat4& u, const DeviceParams& p) {
  if (unitarity_error(u) > 1e-9) throw ValidationError("embedded target is not unitary");
  EmbeddedTarget t;
  t.computational_indices = computational_indices(p.levels);
  t.unitary = MatX::Identity(p.dim(), p.dim());
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) t.unitary(t.computational_indices[i], t.computational_indices[j]) = u(i, j);
  return t;
}

VecX embed_state(const Vec4& psi, const DeviceParams& p) {
  VecX v = VecX::Zero(p.dim());
  const auto idx = computational_indices(p.levels);
  for (int i = 0; i < 4; ++i) v(idx[i]) = psi(i);
  return v;
}

Mat4 computational_block(const MatX& op, const DeviceParams& p) {
  const auto idx = computational_indices(p.levels);
  Mat4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r(i, j) = op(idx[i], idx[j]);
  return r;
}

}  // namespace adia
