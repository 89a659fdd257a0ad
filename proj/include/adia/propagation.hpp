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

#include <iosfwd>
#include <vector>

#include "adia/spin_system.hpp"

namespace adia {

/// Throws ValidationError unless |norm(psi) - 1| <= tol.
void require_normalized(const Vec4& psi, double tol = 1e-10);

/// (|00> - |01> - |10> + |11>) / 2, the ground state of H0 reached by
/// H(x)H X(x)X |00>.
Vec4 initial_state();

Vec4 basis_state(int index);

/// Closed-system trajectory, sampled on a strictly increasing time grid.
struct Trajectory {
  std::vector<double> times;       // ns
  std::vector<Vec4> states;
  std::vector<double> fidelities;  // |<phi(t)|psi(t)>| against the instantaneous ground state
  std::vector<double> energies;    // <psi(t)|HT|psi(t)>, rad/ns

  std::size_t size() const { return times.size(); }

  /// CSV with header `t_ns,fidelity,energy`.
  void write_csv(std::ostream& out) const;
};

enum class NodeRule { Left, Midpoint, Right };

/// n short-time propagators of width T/n.
struct TrotterPlan {
  int steps = 20;
  double total_time = 20.0;
  NodeRule rule = NodeRule::Midpoint;

  double step_width() const { return total_time / steps; }
  /// Time at which H is frozen for step k (1-based).
  double node(int k) const;
  /// End time of step k; exactly total_time for k = steps.
  double end_time(int k) const { return k == steps ? total_time : total_time * k / steps; }
};

/// RK4 on i d|psi>/dt = H(t)|psi> with fixed step dt_fine (<= T/100).
Trajectory evolve_exact(const Schedule& sched, const Vec4& psi0, double dt_fine);

/// exp(-i H(t_k) dt) for step k in [1, n].
Mat4 short_time_propagator(const Schedule& sched, const TrotterPlan& plan, int k);

/// Applies the n propagators in order, recording after each (and at t = 0).
Trajectory trotter_evolve(const Schedule& sched, const TrotterPlan& plan, const Vec4& psi0);

/// Product U(t_k) ... U(t_1) of the first k propagators.
Mat4 trotter_unitary(const Schedule& sched, const TrotterPlan& plan, int k);

double fidelity_pure(const Vec4& psi, const Vec4& phi);

double expectation(const Vec4& psi, const PauliSum& h);

/// ||(|psi><psi| - |phi><phi|)|| in operator norm.
double projector_distance(const Vec4& psi, const Vec4& phi);

}  // namespace adia
