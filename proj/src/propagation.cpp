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

#include "adia/propagation.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace adia {

void require_normalized(const Vec4& psi, double tol) {
  if (std::abs(psi.norm() - 1.0) > tol) {
    std::ostringstream msg;
    msg << "state not normalized (norm " << psi.norm() << ")";
    throw ValidationError(msg.str());
  }
}

Vec4 initial_state() { return Vec4(0.5, -0.5, -0.5, 0.5); }

Vec4 basis_state(int index) {
  if (index < 0 || index > 3) throw ValidationError("basis index must be in [0, 3]");
  Vec4 v = Vec4::Zero();
  v(index) = 1.0;
  return v;
}

void Trajectory::write_csv(std::ostream& out) const {
  out << "t_ns,fidelity,energy\n";
  out << std::setprecision(12);
  for (std::size_t i = 0; i < times.size(); ++i)
    out << times[i] << ',' << fidelities[i] << ',' << energies[i] << '\n';
}

double TrotterPlan::node(int k) const {
  const double dt = step_width();
  switch (rule) {
    case NodeRule::Left:
      return (k - 1) * dt;
    case NodeRule::Midpoint:
      return (k - 0.5) * dt;
    case NodeRule::Right:
      return std::min(k * dt, total_time);
  }
  return (k - 0.5) * dt;
}

namespace {

const PauliSum& target_hamiltonian() {
  static const PauliSum h = build_ht();
  return h;
}

void record(Trajectory& traj, const Schedule& sched, double t, const Vec4& psi) {
  traj.times.push_back(t);
  traj.states.push_back(psi);
  traj.fidelities.push_back(fidelity_pure(psi, ground_state_at(sched, t)));
  traj.energies.push_back(expectation(psi, target_hamiltonian()));
}

void check_plan(const Schedule& sched, const TrotterPlan& plan) {
  if (plan.steps < 1) throw ValidationError("Trotter plan needs at least one step");
  if (std::abs(plan.total_time - sched.total_time) > 1e-12 * sched.total_time)
    throw ValidationError("Trotter plan duration differs from the schedule");
}

}  // namespace

Trajectory evolve_exact(const Schedule& sched, const Vec4& psi0, double dt_fine) {
  require_normalized(psi0);
  const double T = sched.total_time;
  if (!(dt_fine > 0.0) || dt_fine > T / 100.0 * (1.0 + 1e-12))
    throw ValidationError("dt_fine must lie in (0, T/100]");
  const int steps = static_cast<int>(std::ceil(T / dt_fine - 1e-9));
  const double h = T / steps;

  auto rhs = [&](double t, const Vec4& psi) -> Vec4 { return -kI * (hamiltonian_at(sched, t) * psi); };

  Trajectory traj;
  Vec4 psi = psi0;
  record(traj, sched, 0.0, psi);
  for (int s = 0; s < steps; ++s) {
    const double t = s * h;
    const double t_half = std::min(t + 0.5 * h, T);
    const double t_next = (s + 1 == steps) ? T : (s + 1) * h;
    const Vec4 k1 = rhs(t, psi);
    const Vec4 k2 = rhs(t_half, psi + 0.5 * h * k1);
    const Vec4 k3 = rhs(t_half, psi + 0.5 * h * k2);
    const Vec4 k4 = rhs(t_next, psi + h * k3);
    psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (std::abs(psi.norm() - 1.0) > 1e-6) {
      std::ostringstream msg;
      msg << "norm drift " << psi.norm() - 1.0 << " at t = " << t_next << " ns";
      throw IntegrationError(msg.str());
    }
    record(traj, sched, t_next, psi);
  }
  return traj;
}

Mat4 short_time_propagator(const Schedule& sched, const TrotterPlan& plan, int k) {
  check_plan(sched, plan);
  if (k < 1 || k > plan.steps) throw DomainError("propagator index outside [1, n]");
  return expm_hermitian(hamiltonian_at(sched, plan.node(k)), plan.step_width());
}

Trajectory trotter_evolve(const Schedule& sched, const TrotterPlan& plan, const Vec4& psi0) {
  require_normalized(psi0);
  check_plan(sched, plan);
  Trajectory traj;
  Vec4 psi = psi0;
  record(traj, sched, 0.0, psi);
  for (int k = 1; k <= plan.steps; ++k) {
    psi = short_time_propagator(sched, plan, k) * psi;
    record(traj, sched, plan.end_time(k), psi);
  }
  return traj;
}

Mat4 trotter_unitary(const Schedule& sched, const TrotterPlan& plan, int k) {
  check_plan(sched, plan);
  if (k < 0 || k > plan.steps) throw DomainError("step count outside [0, n]");
  Mat4 u = Mat4::Identity();
  for (int i = 1; i <= k; ++i) u = short_time_propagator(sched, plan, i) * u;
  return u;
}

double fidelity_pure(const Vec4& psi, const Vec4& phi) {
  return std::min(1.0, std::abs(phi.dot(psi)));
}

double expectation(const Vec4& psi, const PauliSum& h) {
  return psi.dot(h.matrix() * psi).real();
}

double projector_distance(const Vec4& psi, const Vec4& phi) {
  const double f = std::abs(phi.dot(psi));
  return std::sqrt(std::max(0.0, 1.0 - f * f));
}

}  // namespace adia
