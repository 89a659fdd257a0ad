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
#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace adia {
namespace {

using testing::kron_loops;

// Pauli matrices typed in directly, in the library's basis convention.
MatX sx() {
  MatX m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
MatX sy() {
  MatX m(2, 2);
  m << 0, cd(0, 1), cd(0, -1), 0;
  return m;
}
MatX sz() {
  MatX m(2, 2);
  m << -1, 0, 0, 1;
  return m;
}
MatX id2() { return MatX::Identity(2, 2); }

MatX h0_oracle() { return kron_loops(sx(), id2()) + kron_loops(id2(), sx()); }

MatX ht_oracle() {
  return -kron_loops(sx(), sx()) + kron_loops(sy(), sy()) + 0.5 * kron_loops(sz(), sz()) - kron_loops(sz(), id2()) -
         kron_loops(id2(), sz());
}

// Smallest eigenvalue of a real symmetric matrix by power iteration on
// (shift - H); independent of any library eigensolver.
double ground_energy_by_power_iteration(const Eigen::MatrixXd& h) {
  const double shift = h.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
  const Eigen::MatrixXd m = shift * Eigen::MatrixXd::Identity(h.rows(), h.cols()) - h;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(h.rows()) + Eigen::VectorXd::LinSpaced(h.rows(), 0.1, 0.4);
  for (int i = 0; i < 20000; ++i) v = (m * v).normalized();
  return v.dot(h * v);
}

TEST(Interpolate, BoundaryAndMidpointValues) {
  const Schedule s(20.0);
  EXPECT_DOUBLE_EQ(interpolate(s, 0.0).f, 1.0);
  EXPECT_DOUBLE_EQ(interpolate(s, 0.0).g, 0.0);
  EXPECT_NEAR(interpolate(s, 20.0).f, 0.0, 1e-16);
  EXPECT_NEAR(interpolate(s, 20.0).g, 1.0, 1e-16);
  EXPECT_NEAR(interpolate(s, 10.0).f, 0.5, 1e-15);
  EXPECT_NEAR(interpolate(s, 10.0).g, 0.5, 1e-15);
}

TEST(Interpolate, OutsideWindowThrows) {
  const Schedule s(20.0);
  EXPECT_THROW(interpolate(s, -1e-9), DomainError);
  EXPECT_THROW(interpolate(s, 20.0 + 1e-9), DomainError);
  EXPECT_THROW(hamiltonian_at(s, 21.0), DomainError);
  EXPECT_THROW(Schedule(0.0), ValidationError);
}

TEST(Interpolate, WeightsSumToOneExactly) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto form : {Interpolation::CosineSquared, Interpolation::Linear, Interpolation::Frozen}) {
    const Schedule s(17.3, form);
    for (int i = 0; i < 1000; ++i) {
      const Mixing w = interpolate(s, s.total_time * u(rng));
      EXPECT_EQ(w.f + w.g, 1.0);
    }
  }
}

TEST(Hamiltonian, MatchesIndependentConstruction) {
  const Schedule s(20.0);
  EXPECT_LT((MatX(build_h0().matrix()) - h0_oracle()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((MatX(build_ht().matrix()) - ht_oracle()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((MatX(hamiltonian_at(s, 0.0)) - h0_oracle()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((MatX(hamiltonian_at(s, 20.0)) - ht_oracle()).cwiseAbs().maxCoeff(), 1e-15);
  const MatX mid = 0.5 * (h0_oracle() + ht_oracle());
  EXPECT_LT((MatX(hamiltonian_at(s, 10.0)) - mid).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Hamiltonian, HermitianAlongSchedule) {
  const Schedule s(20.0);
  for (int i = 0; i <= 200; ++i) {
    const Mat4 h = hamiltonian_at(s, 0.1 * i);
    EXPECT_LT((h - h.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Hamiltonian, TargetGroundEnergyAgainstPowerIteration) {
  const MatX ht = ht_oracle();
  ASSERT_LT(ht.imag().cwiseAbs().maxCoeff(), 1e-15);  // real symmetric in this basis
  const double e0 = ground_energy_by_power_iteration(ht.real());
  EXPECT_NEAR(e0, (1.0 - 4.0 * std::sqrt(2.0)) / 2.0, 1e-12);
  EXPECT_NEAR(spectrum_at(Schedule(20.0), 20.0).eigenvalues(0), e0, 1e-12);
  EXPECT_NEAR(target_ground_energy(), -2.328427124746190, 1e-14);
}

TEST(Hamiltonian, TargetGroundStateDominatedByUpUp) {
  const Vec4 g = ground_state_at(Schedule(20.0), 20.0);
  Eigen::Index idx = 0;
  g.cwiseAbs().maxCoeff(&idx);
  EXPECT_EQ(idx, 3);  // |11> = up-up
}

TEST(Spectrum, InitialGroundEnergyIsMinusTwo) {
  EXPECT_NEAR(spectrum_at(Schedule(20.0), 0.0).eigenvalues(0), -2.0, 1e-13);
}

TEST(Spectrum, OrthonormalWithFixedPhases) {
  const Schedule s(20.0);
  for (double t : {0.0, 3.3, 10.0, 17.9, 20.0}) {
    const Spectrum sp = spectrum_at(s, t);
    const Mat4 h = hamiltonian_at(s, t);
    EXPECT_LT((sp.eigenvectors.adjoint() * sp.eigenvectors - Mat4::Identity()).norm(), 1e-13);
    for (int k = 0; k < 4; ++k) {
      EXPECT_LT((h * sp.eigenvectors.col(k) - sp.eigenvalues(k) * sp.eigenvectors.col(k)).norm(), 1e-12);
      Eigen::Index idx = 0;
      sp.eigenvectors.col(k).cwiseAbs().maxCoeff(&idx);
      EXPECT_EQ(sp.eigenvectors(idx, k).imag(), 0.0);
      EXPECT_GT(sp.eigenvectors(idx, k).real(), 0.0);
      if (k > 0) {
        EXPECT_LE(sp.eigenvalues(k - 1), sp.eigenvalues(k));
      }
    }
  }
}

TEST(Spectrum, EigenvaluesAreContinuous) {
  const Schedule s(20.0);
  for (int i = 0; i < 2000; ++i) {
    const double t = 0.01 * i;
    const auto a = spectrum_at(s, t).eigenvalues;
    const auto b = spectrum_at(s, t + 1e-3).eigenvalues;
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-2);
  }
}

TEST(MinGap, PositiveAndMatchesDenseScan) {
  const Schedule s(20.0);
  const GapInfo coarse = min_gap(s, 1001);
  EXPECT_GT(coarse.gap, 0.0);

  // 10^5-point scan with a separately constructed Hamiltonian.
  double best = 1e300;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double t = 20.0 * i / (n - 1);
    const double c = std::cos(kPi * t / 40.0);
    const MatX h = c * c * h0_oracle() + (1.0 - c * c) * ht_oracle();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.real(), Eigen::EigenvaluesOnly);
    best = std::min(best, es.eigenvalues()(1) - es.eigenvalues()(0));
  }
  // The gap is smooth, so a grid of spacing dt misses the minimum by O(dt^2).
  EXPECT_GE(coarse.gap, best - 1e-12);
  EXPECT_LT(coarse.gap - best, 1e-3);
}

TEST(MinGap, TwoPointGridUsesEndpoints) {
  const Schedule s(20.0);
  const auto e0 = spectrum_at(s, 0.0).eigenvalues;
  const auto e1 = spectrum_at(s, 20.0).eigenvalues;
  EXPECT_NEAR(min_gap(s, 2).gap, std::min(e0(1) - e0(0), e1(1) - e1(0)), 1e-13);
  EXPECT_THROW(min_gap(s, 1), ValidationError);
}

TEST(AdiabaticTimeScale, FinitePositiveForCosine) {
  const double t = adiabatic_time_scale(Schedule(20.0), 1001);
  EXPECT_TRUE(std::isfinite(t));
  EXPECT_GT(t, 0.0);
}

TEST(AdiabaticTimeScale, FrozenScheduleHasZeroNumerator) {
  EXPECT_EQ(adiabatic_time_scale(Schedule(20.0, Interpolation::Frozen), 101), 0.0);
}

TEST(AdiabaticTimeScale, MatchesFiniteDifferenceDerivative) {
  const Schedule s(20.0);
  const int grid = 401;
  const double gap = min_gap(s, grid).gap;
  double numerator = 0.0;
  const double h = 1e-5;
  for (int i = 0; i < grid; ++i) {
    const double sv = static_cast<double>(i) / (grid - 1);
    const double lo = std::max(0.0, sv - h), hi = std::min(1.0, sv + h);
    const auto f = [](double x) {
      const double c = std::cos(kPi * x / 2.0);
      return c * c;
    };
    const double df = (f(hi) - f(lo)) / (hi - lo);
    const MatX dh = df * (h0_oracle() - ht_oracle());
    numerator = std::max(numerator, Eigen::JacobiSVD<MatX>(dh).singularValues()(0));
  }
  const double expected = numerator / (gap * gap);
  EXPECT_NEAR(adiabatic_time_scale(s, grid) / expected, 1.0, 1e-6);
}

TEST(PauliSum, AccumulatesAndRejectsNonFinite) {
  PauliSum h;
  h.add(Pauli::Z, Pauli::Z, 0.25).add(Pauli::Z, Pauli::Z, 0.25);
  EXPECT_DOUBLE_EQ(h.coeff(Pauli::Z, Pauli::Z), 0.5);
  EXPECT_DOUBLE_EQ(h.coeff(Pauli::X, Pauli::X), 0.0);
  EXPECT_THROW(h.add(Pauli::X, Pauli::I, std::nan("")), ValidationError);
}

}  // namespace
}  // namespace adia
