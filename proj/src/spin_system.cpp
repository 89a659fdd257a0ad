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

#include "adia/spin_system.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace adia {

Mat2 pauli_matrix(Pauli p) {
  Mat2 m;
  switch (p) {
    case Pauli::I:
      m << 1, 0, 0, 1;
      break;
    case Pauli::X:
      m << 0, 1, 1, 0;
      break;
    case Pauli::Y:
      m << 0, kI, -kI, 0;
      break;
    case Pauli::Z:
      m << -1, 0, 0, 1;
      break;
  }
  return m;
}

char pauli_label(Pauli p) {
  switch (p) {
    case Pauli::I:
      return 'I';
    case Pauli::X:
      return 'X';
    case Pauli::Y:
      return 'Y';
    case Pauli::Z:
      return 'Z';
  }
  return '?';
}

PauliSum& PauliSum::add(Pauli a, Pauli b, double coeff) {
  if (!std::isfinite(coeff)) throw ValidationError("PauliSum coefficient must be finite");
  terms_[{a, b}] += coeff;
  return *this;
}

double PauliSum::coeff(Pauli a, Pauli b) const {
  auto it = terms_.find({a, b});
  return it == terms_.end() ? 0.0 : it->second;
}

Mat4 PauliSum::matrix() const {
  Mat4 m = Mat4::Zero();
  for (const auto& [key, c] : terms_) m += c * kron(pauli_matrix(key.first), pauli_matrix(key.second));
  return m;
}

PauliSum build_h0() {
  PauliSum h;
  h.add(Pauli::X, Pauli::I, 1.0).add(Pauli::I, Pauli::X, 1.0);
  return h;
}

PauliSum build_ht() {
  PauliSum h;
  h.add(Pauli::X, Pauli::X, -1.0)
      .add(Pauli::Y, Pauli::Y, 1.0)
      .add(Pauli::Z, Pauli::Z, 0.5)
      .add(Pauli::Z, Pauli::I, -1.0)
      .add(Pauli::I, Pauli::Z, -1.0);
  return h;
}

Schedule::Schedule(double total_time_ns, Interpolation f) : total_time(total_time_ns), form(f) {
  if (!(total_time > 0.0) || !std::isfinite(total_time))
    throw ValidationError("schedule duration must be positive and finite");
}

namespace {

void check_time(const Schedule& sched, double t) {
  if (!(t >= 0.0 && t <= sched.total_time)) {
    std::ostringstream msg;
    msg << "time " << t << " ns outside [0, " << sched.total_time << "]";
    throw DomainError(msg.str());
  }
}

const Mat4& h0_matrix() {
  static const Mat4 m = build_h0().matrix();
  return m;
}

const Mat4& ht_matrix() {
  static const Mat4 m = build_ht().matrix();
  return m;
}

}  // namespace

Mixing interpolate(const Schedule& sched, double t) {
  check_time(sched, t);
  double f = 1.0;
  switch (sched.form) {
    case Interpolation::CosineSquared: {
      const double c = std::cos(kPi * t / (2.0 * sched.total_time));
      f = c * c;
      break;
    }
    case Interpolation::Linear:
      f = 1.0 - t / sched.total_time;
      break;
    case Interpolation::Frozen:
      f = 1.0;
      break;
  }
  return {f, 1.0 - f};
}

Mixing interpolate_rate(const Schedule& sched, double t) {
  check_time(sched, t);
  double df = 0.0;
  switch (sched.form) {
    case Interpolation::CosineSquared:
      df = -kPi / (2.0 * sched.total_time) * std::sin(kPi * t / sched.total_time);
      break;
    case Interpolation::Linear:
      df = -1.0 / sched.total_time;
      break;
    case Interpolation::Frozen:
      df = 0.0;
      break;
  }
  return {df, -df};
}

Mat4 hamiltonian_at(const Schedule& sched, double t) {
  const Mixing w = interpolate(sched, t);
  return w.f * h0_matrix() + w.g * ht_matrix();
}

Spectrum diagonalize(const Mat4& h) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(h);
  Spectrum s;
  s.eigenvalues = es.eigenvalues();
  s.eigenvectors = es.eigenvectors();
  for (int k = 0; k < 4; ++k) {
    auto col = s.eigenvectors.col(k);
    Eigen::Index idx = 0;
    col.cwiseAbs().maxCoeff(&idx);
    const cd phase = std::conj(col(idx)) / std::abs(col(idx));
    col *= phase;
    col(idx) = std::abs(col(idx));
  }
  return s;
}

Spectrum spectrum_at(const Schedule& sched, double t) { return diagonalize(hamiltonian_at(sched, t)); }

Vec4 ground_state_at(const Schedule& sched, double t) { return spectrum_at(sched, t).eigenvectors.col(0); }

GapInfo min_gap(const Schedule& sched, int grid_points) {
  if (grid_points < 2) throw ValidationError("min_gap needs at least 2 grid points");
  GapInfo best{std::numeric_limits<double>::infinity(), 0.0};
  for (int i = 0; i < grid_points; ++i) {
    const double t = sched.total_time * static_cast<double>(i) / (grid_points - 1);
    const Eigen::Vector4d e = Eigen::SelfAdjointEigenSolver<Mat4>(hamiltonian_at(sched, t), Eigen::EigenvaluesOnly).eigenvalues();
    const double gap = e(1) - e(0);
    if (gap < best.gap) best = {gap, t};
  }
  return best;
}

double adiabatic_time_scale(const Schedule& sched, int grid_points) {
  const GapInfo gap = min_gap(sched, grid_points);
  double numerator = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    const double t = sched.total_time * static_cast<double>(i) / (grid_points - 1);
    const Mixing rate = interpolate_rate(sched, t);
    // d/ds = T d/dt
    const Mat4 dh = sched.total_time * (rate.f * h0_matrix() + rate.g * ht_matrix());
    numerator = std::max(numerator, operator_norm(dh));
  }
  return numerator / (gap.gap * gap.gap);
}

}  // namespace adia
