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
#include <iomanip>
#include <ostream>

#include "adia/propagation.hpp"

namespace adia {

namespace {

constexpr double kUsToNs = 1e3;

// Hadamard product with the interaction-picture phases e^{i(l_a - l_b)t}.
MatX rotate(const MatX& x, const VecX& phase) {
  MatX out(x.rows(), x.cols());
  for (Eigen::Index b = 0; b < x.cols(); ++b)
    for (Eigen::Index a = 0; a < x.rows(); ++a) out(a, b) = phase(a) * x(a, b) * std::conj(phase(b));
  return out;
}

struct RotatedTerms {
  std::vector<MatX> left, right;
  std::vector<double> rates;
  MatX anticommutator;  // sum of rate * K
};

// In-place accumulation of the dissipator action on rho.
void apply_dissipator(const RotatedTerms& t, const MatX& rho, MatX& out, MatX& tmp) {
  out.noalias() = -0.5 * t.anticommutator * rho;
  out.noalias() -= 0.5 * rho * t.anticommutator;
  for (std::size_t i = 0; i < t.rates.size(); ++i) {
    tmp.noalias() = t.left[i] * rho;
    out.noalias() += t.rates[i] * tmp * t.right[i];
  }
}

}  // namespace

DensityMatrix DensityMatrix::pure(const VecX& psi) {
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw ValidationError("pure state must be normalized");
  return {psi * psi.adjoint()};
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  if (dim < 1) throw ValidationError("dimension must be positive");
  return {MatX::Identity(dim, dim) / static_cast<double>(dim)};
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<MatX> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

void DensityMatrix::validate(double tol) const {
  if (rho.rows() != rho.cols() || rho.rows() == 0) throw ValidationError("density matrix must be square");
  if (hermiticity_error(rho) > 1e-10) throw ValidationError("density matrix is not Hermitian");
  if (std::abs(trace() - 1.0) > tol) throw ValidationError("density matrix trace differs from 1");
  if (min_eigenvalue() < -tol) throw ValidationError("density matrix has a negative eigenvalue");
}

std::vector<CollapseOperator> collapse_operators(const DeviceParams& p) {
  p.validate();
  std::vector<CollapseOperator> out;
  for (int i = 0; i < 2; ++i) {
    const double t1 = p.noise.t1_us[i] * kUsToNs;
    const double t2 = p.noise.t2_us[i] * kUsToNs;
    const MatX a = device_lowering(p, i);
    if (std::isfinite(t1)) out.push_back({1.0 / t1, a});
    if (!std::isfinite(t2)) continue;
    double rate = 1.0 / t2;
    if (p.noise.dephasing == NoiseParams::Dephasing::PureDephasing) {
      // D[n] at rate gamma damps qubit coherences at gamma / 2, so matching a
      // total coherence time T2 needs gamma = 2 (1/T2 - 1/(2 T1)).
      const double relax = std::isfinite(t1) ? 1.0 / (2.0 * t1) : 0.0;
      rate = 2.0 * (1.0 / t2 - relax);
      if (rate < -1e-15) throw ValidationError("T2 exceeds 2 T1; pure dephasing rate would be negative");
      if (rate <= 0.0) continue;
    }
    out.push_back({rate, a.adjoint() * a});
  }
  return out;
}

std::vector<DissipatorTerm> dissipator_terms(const DeviceParams& p) {
  std::vector<DissipatorTerm> out;
  if (!p.noise.swapped_orderings) {
    for (const auto& c : collapse_operators(p))
      out.push_back({c.rate, c.op, c.op.adjoint(), c.op.adjoint() * c.op});
    return out;
  }
  p.validate();
  for (int i = 0; i < 2; ++i) {
    const double t1 = p.noise.t1_us[i] * kUsToNs;
    const double t2 = p.noise.t2_us[i] * kUsToNs;
    const MatX a = device_lowering(p, i);
    const MatX ad = a.adjoint();
    if (std::isfinite(t1)) out.push_back({1.0 / t1, a, ad, a * ad});
    if (std::isfinite(t2)) out.push_back({1.0 / t2, ad * a, a * ad, a * ad * ad * a});
  }
  return out;
}

MatX lindblad_rhs(const MatX& h, const std::vector<DissipatorTerm>& terms, const MatX& rho) {
  MatX out = -kI * (h * rho - rho * h);
  for (const auto& t : terms)
    out += t.rate * (t.left * rho * t.right - 0.5 * (t.anticommutator * rho + rho * t.anticommutator));
  return out;
}

DensityMatrix evolve_density(const DensityMatrix& rho0, const PulseSequence& pulse, const DeviceParams& p,
                             const IntegratorOptions& opt) {
  pulse.validate();
  if (rho0.dim() != p.dim()) throw ValidationError("density matrix dimension does not match the device");
  if (hermiticity_error(rho0.rho) > 1e-10) throw ValidationError("initial density matrix is not Hermitian");
  if (opt.substeps < 1) throw ValidationError("substeps must be positive");

  const int d = p.dim();
  const MatX drift = drift_hamiltonian(p);
  const auto gens = control_generators(p);
  const double kappa = angular_from_mhz(1.0);
  const double dt = pulse.dt();
  const int s = opt.substeps;
  const double h = dt / s;

  const auto terms = dissipator_terms(p);
  const bool noisy = !terms.empty();
  // Standard-form terms enter as rate * L rho L^dagger; the anticommutator
  // parts are summed once.
  MatX ksum = MatX::Zero(d, d);
  for (const auto& t : terms) ksum += t.rate * t.anticommutator;

  Eigen::SelfAdjointEigenSolver<MatX> es;
  MatX rho = rho0.rho;
  const double trace0 = rho.trace().real();

  std::vector<RotatedTerms> stage(2 * s + 1);
  std::vector<MatX> left_e(terms.size()), right_e(terms.size());
  MatX k1(d, d), k2(d, d), k3(d, d), k4(d, d), tmp(d, d), work(d, d);

  for (std::size_t j = 0; j < pulse.samples(); ++j) {
    MatX hseg = drift;
    for (int c = 0; c < 4; ++c)
      if (pulse.channels[c][j] != 0.0) hseg += (kappa * pulse.channels[c][j]) * gens[c];
    es.compute(hseg);
    const MatX& v = es.eigenvectors();
    const Eigen::VectorXd& lam = es.eigenvalues();

    if (!noisy) {
      VecX ph(d);
      for (int a = 0; a < d; ++a) ph(a) = std::exp(cd(0.0, -lam(a) * dt));
      const MatX u = v * ph.asDiagonal() * v.adjoint();
      rho = u * rho * u.adjoint();
      continue;
    }

    // Work in the eigenbasis of this sample's Hamiltonian, where the coherent
    // evolution is a pure phase and only the dissipator needs integrating.
    MatX rho_i = v.adjoint() * rho * v;
    const MatX k_e = v.adjoint() * ksum * v;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      left_e[i] = v.adjoint() * terms[i].left * v;
      right_e[i] = v.adjoint() * terms[i].right * v;
    }
    for (int q = 0; q <= 2 * s; ++q) {
      const double t = 0.5 * h * q;
      VecX ph(d);
      for (int a = 0; a < d; ++a) ph(a) = std::exp(cd(0.0, lam(a) * t));
      RotatedTerms& rt = stage[q];
      rt.left.resize(terms.size());
      rt.right.resize(terms.size());
      rt.rates.resize(terms.size());
      for (std::size_t i = 0; i < terms.size(); ++i) {
        rt.left[i] = rotate(left_e[i], ph);
        rt.right[i] = rotate(right_e[i], ph);
        rt.rates[i] = terms[i].rate;
      }
      rt.anticommutator = rotate(k_e, ph);
    }

    for (int m = 0; m < s; ++m) {
      const RotatedTerms& t0 = stage[2 * m];
      const RotatedTerms& tm = stage[2 * m + 1];
      const RotatedTerms& t1 = stage[2 * m + 2];
      apply_dissipator(t0, rho_i, k1, tmp);
      work = rho_i + (0.5 * h) * k1;
      apply_dissipator(tm, work, k2, tmp);
      work = rho_i + (0.5 * h) * k2;
      apply_dissipator(tm, work, k3, tmp);
      work = rho_i + h * k3;
      apply_dissipator(t1, work, k4, tmp);
      rho_i += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    VecX ph(d);
    for (int a = 0; a < d; ++a) ph(a) = std::exp(cd(0.0, -lam(a) * dt));
    rho = v * rotate(rho_i, ph) * v.adjoint();
    rho = 0.5 * (rho + rho.adjoint().eval());
  }

  if (!p.noise.swapped_orderings && std::abs(rho.trace().real() - trace0) > opt.trace_tolerance)
    throw IntegrationError("density matrix trace drifted beyond tolerance");
  return {rho};
}

double mixed_fidelity(const DensityMatrix& rho, const VecX& phi) {
  if (std::abs(phi.norm() - 1.0) > 1e-10) throw ValidationError("reference state must be normalized");
  VecX ref = phi;
  if (phi.size() != rho.dim()) {
    if (phi.size() != 4 || rho.dim() < 4) throw ValidationError("reference state dimension mismatch");
    const int levels = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rho.dim()))));
    if (levels * levels != rho.dim()) throw ValidationError("reference state dimension mismatch");
    DeviceParams dp;
    dp.levels = levels;
    ref = embed_state(phi, dp);
  }
  const double overlap = (ref.adjoint() * rho.rho * ref)(0, 0).real();
  return std::sqrt(std::max(0.0, overlap));
}

DominantComponent dominant_component(const DensityMatrix& rho) {
  if (hermiticity_error(rho.rho) > 1e-8) throw ValidationError("density matrix is not Hermitian");
  const double tr = rho.trace();
  if (!(tr > 0.0)) throw ValidationError("density matrix has non-positive trace");
  Eigen::SelfAdjointEigenSolver<MatX> es(rho.rho);
  const Eigen::Index top = rho.rho.rows() - 1;
  DominantComponent out;
  out.weight = std::clamp(es.eigenvalues()(top) / tr, 0.0, 1.0);
  out.state = es.eigenvectors().col(top);
  Eigen::Index idx = 0;
  out.state.cwiseAbs().maxCoeff(&idx);
  out.state *= std::abs(out.state(idx)) / out.state(idx);
  return out;
}

void DeviceTrajectory::write_csv(std::ostream& out) const {
  out << "t_ns,fidelity,energy,leakage,dominant_weight\n" << std::setprecision(12);
  for (std::size_t i = 0; i < size(); ++i)
    out << step_times[i] << ',' << fidelities[i] << ',' << energies[i] << ',' << leakage[i] << ','
        << dominant_weights[i] << '\n';
}

DensityMatrix initial_device_state(const DeviceParams& p) {
  return DensityMatrix::pure(embed_state(initial_state(), p));
}

DeviceTrajectory run_schedule(const std::vector<PulseSequence>& pulses, const DeviceParams& p,
                              const DensityMatrix& rho0, const ScheduleRun& run, const IntegratorOptions& opt) {
  if (run.pulses_per_step < 1) throw ValidationError("pulses_per_step must be positive");
  if (pulses.size() != static_cast<std::size_t>(run.plan.steps * run.pulses_per_step))
    throw ValidationError("pulse count does not match the schedule");
  if (std::abs(run.plan.total_time - run.schedule.total_time) > 1e-12)
    throw ValidationError("plan and schedule durations differ");

  const Mat4 ht = build_ht().matrix();
  DeviceTrajectory traj;
  const auto record = [&](double t, const DensityMatrix& rho) {
    const Mat4 red = computational_block(rho.rho, p);
    const double tr_red = red.trace().real();
    const Vec4 phi = ground_state_at(run.schedule, t);
    traj.step_times.push_back(t);
    traj.densities.push_back(red);
    traj.fidelities.push_back(mixed_fidelity(rho, phi));
    traj.energies.push_back((red * ht).trace().real() / tr_red);
    traj.leakage.push_back(1.0 - tr_red);
    const DominantComponent dom = dominant_component(DensityMatrix{MatX(red)});
    traj.dominant_weights.push_back(dom.weight);
    traj.dominant_energies.push_back((dom.state.adjoint() * MatX(ht) * dom.state)(0, 0).real());
    traj.full_traces.push_back(rho.trace());
  };

  DensityMatrix rho = rho0;
  record(0.0, rho);
  for (int k = 1; k <= run.plan.steps; ++k) {
    for (int g = 0; g < run.pulses_per_step; ++g)
      rho = evolve_density(rho, pulses[(k - 1) * run.pulses_per_step + g], p, opt);
    record(run.plan.end_time(k), rho);
  }
  return traj;
}

}  // namespace adia
