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


#include "adia/open_system.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "adia/propagation.hpp"
#include "test_util.hpp"

namespace adia {
namespace {

DeviceParams noisy(double t1_us, double t2_us, NoiseParams::Dephasing mode = NoiseParams::Dephasing::T2Rate) {
  DeviceParams p;
  p.noise.t1_us = {t1_us, t1_us};
  p.noise.t2_us = {t2_us, t2_us};
  p.noise.dephasing = mode;
  return p;
}

PulseSequence random_pulse(double tau, double amplitude, std::uint64_t seed) {
  PulseSequence pulse = PulseSequence::zeros(tau);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  for (auto& ch : pulse.channels)
    for (double& e : ch) e = dist(rng);
  return pulse;
}

VecX basis(int dim, int i) {
  VecX v = VecX::Zero(dim);
  v(i) = 1.0;
  return v;
}

TEST(CollapseOperators, NoiselessHasNone) {
  EXPECT_TRUE(collapse_operators(DeviceParams{}).empty());
  EXPECT_TRUE(dissipator_terms(DeviceParams{}).empty());
}

TEST(CollapseOperators, RatesFromCoherenceTimes) {
  DeviceParams p = noisy(102.6, 80.0);
  p.noise.t1_us[1] = INFINITY;
  const auto ops = collapse_operators(p);
  // Relaxation and dephasing on transmon 0, dephasing only on transmon 1.
  ASSERT_EQ(ops.size(), 3u);
  int relax = 0;
  for (const auto& c : ops) {
    if ((c.op - device_lowering(p, 0)).norm() < 1e-15) {
      EXPECT_DOUBLE_EQ(c.rate, 1.0 / 102600.0);
      ++relax;
    } else {
      EXPECT_DOUBLE_EQ(c.rate, 1.0 / 80000.0);
    }
  }
  EXPECT_EQ(relax, 1);
}

TEST(CollapseOperators, PureDephasingRate) {
  const DeviceParams p = noisy(100.0, 60.0, NoiseParams::Dephasing::PureDephasing);
  const MatX n0 = device_lowering(p, 0).adjoint() * device_lowering(p, 0);
  bool found = false;
  for (const auto& c : collapse_operators(p))
    if ((c.op - n0).norm() < 1e-15) {
      EXPECT_NEAR(c.rate, 2.0 * (1.0 / 60000.0 - 1.0 / 200000.0), 1e-18);
      found = true;
    }
  EXPECT_TRUE(found);
  EXPECT_THROW(collapse_operators(noisy(10.0, 30.0, NoiseParams::Dephasing::PureDephasing)), ValidationError);
}

TEST(LindbladRhs, MatchesStandardForm) {
  const DeviceParams p = noisy(30.0, 20.0);
  std::mt19937_64 rng(1);
  const MatX rho = testing::random_density(9, rng);
  const MatX h = drift_hamiltonian(p);
  MatX expected = cd(0.0, -1.0) * (h * rho - rho * h);
  for (const auto& c : collapse_operators(p)) {
    const MatX& l = c.op;
    expected += c.rate * (l * rho * l.adjoint() - 0.5 * (l.adjoint() * l * rho + rho * l.adjoint() * l));
  }
  const MatX rhs = lindblad_rhs(h, dissipator_terms(p), rho);
  EXPECT_LT((rhs - expected).norm(), 1e-15);
  EXPECT_LT(std::abs(rhs.trace()), 1e-16);
  EXPECT_LT((rhs - rhs.adjoint()).norm(), 1e-16);
}

TEST(LindbladRhs, SwappedOrderingLeaksTrace) {
  DeviceParams p = noisy(30.0, 20.0);
  p.noise.swapped_orderings = true;
  std::mt19937_64 rng(2);
  const MatX rho = testing::random_density(9, rng);
  EXPECT_GT(std::abs(lindblad_rhs(MatX::Zero(9, 9), dissipator_terms(p), rho).trace()), 1e-6);
}

TEST(Evolve, NoiselessMatchesUnitaryConjugation) {
  const DeviceParams p;
  std::mt19937_64 rng(3);
  const PulseSequence pulse = random_pulse(20.0, 30.0, 4);
  const MatX rho0 = testing::random_density(9, rng);
  const MatX u = propagate_pulse(pulse, p);
  const DensityMatrix out = evolve_density(DensityMatrix{rho0}, pulse, p);
  EXPECT_LT((out.rho - u * rho0 * u.adjoint()).norm(), 1e-10);
}

// With no coupling, |10> relaxes to |00> at exactly 1/T1 and |11> at the sum
// of both rates.
TEST(Evolve, RelaxationIsExponential) {
  DeviceParams p = noisy(1.0, INFINITY);
  p.noise.t1_us[1] = 2.0;
  p.coupling_mhz = 0.0;
  const double tau = 500.0;
  const PulseSequence pulse = PulseSequence::zeros(tau);

  const DensityMatrix one = evolve_density(DensityMatrix::pure(basis(9, 3)), pulse, p);
  EXPECT_NEAR(one.rho(3, 3).real(), std::exp(-tau / 1000.0), 1e-9);
  EXPECT_NEAR(one.rho(0, 0).real(), 1.0 - std::exp(-tau / 1000.0), 1e-9);

  const DensityMatrix both = evolve_density(DensityMatrix::pure(basis(9, 4)), pulse, p);
  EXPECT_NEAR(both.rho(4, 4).real(), std::exp(-tau / 1000.0 - tau / 2000.0), 1e-9);
}

// Coherence between |0> and |1> of one transmon decays at 1/(2 T1) + 1/(2 T2)
// with the T2 rate on n, and at exactly 1/T2 with the pure-dephasing rate.
TEST(Evolve, CoherenceDecay) {
  const double t1 = 3.0, t2 = 2.0, tau = 400.0;
  VecX plus = (basis(9, 0) + basis(9, 3)) / std::sqrt(2.0);
  for (const auto mode : {NoiseParams::Dephasing::T2Rate, NoiseParams::Dephasing::PureDephasing}) {
    DeviceParams p = noisy(t1, t2, mode);
    p.coupling_mhz = 0.0;
    const DensityMatrix out = evolve_density(DensityMatrix::pure(plus), PulseSequence::zeros(tau), p);
    const double rate = mode == NoiseParams::Dephasing::T2Rate ? 0.5 / (t1 * 1e3) + 0.5 / (t2 * 1e3) : 1.0 / (t2 * 1e3);
    EXPECT_NEAR(std::abs(out.rho(0, 3)), 0.5 * std::exp(-rate * tau), 1e-9);
  }
}

TEST(Evolve, DensityPropertiesUnderNoise) {
  const DeviceParams p = noisy(5.0, 4.0);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const MatX rho0 = testing::random_density(9, rng);
    const DensityMatrix out = evolve_density(DensityMatrix{rho0}, random_pulse(30.0, 35.0, 100 + trial), p);
    EXPECT_LT(std::abs(out.trace() - 1.0), 1e-8);
    EXPECT_LT((out.rho - out.rho.adjoint()).norm(), 1e-8);
    EXPECT_GT(out.min_eigenvalue(), -1e-8);
    EXPECT_NO_THROW(out.validate());
  }
}

TEST(Evolve, RejectsMismatchedInputs) {
  const DeviceParams p;
  EXPECT_THROW(evolve_density(DensityMatrix::maximally_mixed(4), PulseSequence::zeros(1.0), p), ValidationError);
  IntegratorOptions opt;
  opt.substeps = 0;
  EXPECT_THROW(evolve_density(DensityMatrix::maximally_mixed(9), PulseSequence::zeros(1.0), p, opt),
               ValidationError);
  MatX bad = MatX::Identity(9, 9) / 9.0;
  bad(0, 1) = cd(0.0, 0.1);
  EXPECT_THROW(evolve_density(DensityMatrix{bad}, PulseSequence::zeros(1.0), p), ValidationError);
}

TEST(DensityMatrixTest, ConstructorsAndValidation) {
  EXPECT_NEAR(DensityMatrix::maximally_mixed(9).trace(), 1.0, 1e-15);
  EXPECT_THROW(DensityMatrix::pure(2.0 * basis(4, 0)), ValidationError);
  DensityMatrix neg{MatX::Identity(2, 2)};
  neg.rho(0, 0) = 1.2;
  neg.rho(1, 1) = -0.2;
  EXPECT_THROW(neg.validate(), ValidationError);
}

TEST(MixedFidelity, Cases) {
  std::mt19937_64 rng(9);
  const VecX a = testing::random_state(9, rng);
  const VecX b = testing::random_state(9, rng);
  EXPECT_NEAR(mixed_fidelity(DensityMatrix::pure(a), a), 1.0, 1e-14);
  EXPECT_NEAR(mixed_fidelity(DensityMatrix::pure(a), b), std::abs(a.dot(b)), 1e-14);

  // Maximally mixed computational block inside the device space.
  MatX rho = MatX::Zero(9, 9);
  for (int i : computational_indices(3)) rho(i, i) = 0.25;
  const Vec4 phi = testing::random_state(4, rng);
  EXPECT_NEAR(mixed_fidelity(DensityMatrix{rho}, VecX(phi)), 0.5, 1e-14);
  EXPECT_NEAR(mixed_fidelity(DensityMatrix::maximally_mixed(9), VecX(phi)), 1.0 / 3.0, 1e-14);
  EXPECT_THROW(mixed_fidelity(DensityMatrix{rho}, VecX::Ones(5).normalized()), ValidationError);
}

TEST(DominantComponentTest, Cases) {
  MatX rho = MatX::Zero(4, 4);
  rho(0, 0) = 0.2;
  rho(2, 2) = 0.7;
  rho(3, 3) = 0.1;
  DominantComponent d = dominant_component(DensityMatrix{rho});
  EXPECT_NEAR(d.weight, 0.7, 1e-14);
  EXPECT_NEAR(std::abs(d.state(2)), 1.0, 1e-14);

  // Sub-normalized block: weight relative to the trace.
  rho *= 0.5;
  d = dominant_component(DensityMatrix{rho});
  EXPECT_NEAR(d.weight, 0.7, 1e-14);

  std::mt19937_64 rng(10);
  const VecX psi = testing::random_state(4, rng);
  d = dominant_component(DensityMatrix::pure(psi));
  EXPECT_NEAR(d.weight, 1.0, 1e-13);
  EXPECT_NEAR(std::abs(d.state.dot(psi)), 1.0, 1e-13);
}

TEST(RunSchedule, RecordsEveryStep) {
  DeviceParams p;
  p.coupling_mhz = 0.0;  // no exchange into |02>, |20>: idle pulses cannot leak
  const ScheduleRun run{Schedule(10.0), TrotterPlan{4, 10.0, NodeRule::Midpoint}, 2};
  const std::vector<PulseSequence> pulses(8, PulseSequence::zeros(2.0));
  const DeviceTrajectory traj = run_schedule(pulses, p, initial_device_state(p), run);
  ASSERT_EQ(traj.size(), 5u);
  EXPECT_DOUBLE_EQ(traj.step_times.back(), 10.0);
  EXPECT_NEAR(traj.fidelities[0], 1.0, 1e-12);
  EXPECT_NEAR(traj.energies[0], expectation(initial_state(), build_ht()), 1e-12);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    EXPECT_NEAR(traj.full_traces[i], 1.0, 1e-10);
    EXPECT_LT(std::abs(traj.leakage[i]), 1e-10);
    EXPECT_GE(traj.energies[i], target_ground_energy() - 1e-12);
  }
  std::ostringstream csv;
  traj.write_csv(csv);
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);

  // The exchange coupling populates the non-computational levels slightly.
  const DeviceTrajectory coupled = run_schedule(pulses, DeviceParams{}, initial_device_state(DeviceParams{}), run);
  EXPECT_GT(coupled.leakage.back(), 1e-6);
  EXPECT_LT(coupled.leakage.back(), 1e-3);

  EXPECT_THROW(run_schedule(std::vector<PulseSequence>(7, PulseSequence::zeros(2.0)), p, initial_device_state(p), run),
               ValidationError);
}

}  // namespace
}  // namespace adia
