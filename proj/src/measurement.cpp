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

#include "adia/measurement.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

namespace adia {

namespace {

MeasurementAxis axis_of(Pauli p) {
  switch (p) {
    case Pauli::X: return MeasurementAxis::X;
    case Pauli::Y: return MeasurementAxis::Y;
    default: return MeasurementAxis::Z;
  }
}

// Eigenvalue of sigma^p carried by measured bit m after the axis rotation:
// <m| u sigma^p u^dagger |m>.
std::array<double, 2> bit_eigenvalues(Pauli p) {
  if (p == Pauli::I) return {1.0, 1.0};
  const Mat2 u = axis_rotation(axis_of(p));
  const Mat2 rotated = u * pauli_matrix(p) * u.adjoint();
  return {rotated(0, 0).real(), rotated(1, 1).real()};
}

Eigen::Matrix2d qubit_confusion(const QubitReadout& q) {
  Eigen::Matrix2d m;
  m << 1.0 - q.p10, q.p01, q.p10, 1.0 - q.p01;
  return m;
}

void check_probabilities(const Probabilities& p) {
  for (int i = 0; i < 4; ++i)
    if (!(p(i) >= -1e-12) || !std::isfinite(p(i))) throw ValidationError("probabilities must be non-negative");
  if (std::abs(p.sum() - 1.0) > 1e-9) throw ValidationError("probabilities must sum to 1");
}

}  // namespace

Probabilities Counts::frequencies() const {
  validate();
  const double t = static_cast<double>(total());
  return Probabilities(n[0] / t, n[1] / t, n[2] / t, n[3] / t);
}

void Counts::validate() const {
  if (total() == 0) throw ValidationError("counts must contain at least one shot");
}

std::string Counts::label(int outcome) {
  if (outcome < 0 || outcome > 3) throw ValidationError("outcome index out of range");
  return std::string{static_cast<char>('0' + (outcome >> 1)), static_cast<char>('0' + (outcome & 1))};
}

std::string Counts::to_json() const {
  nlohmann::ordered_json j;
  for (int i = 0; i < 4; ++i) j[label(i)] = n[i];
  j["total"] = total();
  return j.dump();
}

Counts Counts::from_json(const std::string& text) {
  Counts c;
  try {
    const auto j = nlohmann::json::parse(text);
    for (int i = 0; i < 4; ++i) c.n[i] = j.value(label(i), std::uint64_t{0});
    if (j.contains("total") && j.at("total").get<std::uint64_t>() != c.total())
      throw ValidationError("counts do not sum to the stated total");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed counts JSON: ") + e.what());
  }
  c.validate();
  return c;
}

void ConfusionMatrix::validate() const {
  for (int c = 0; c < 4; ++c) {
    if (std::abs(matrix.col(c).sum() - 1.0) > 1e-12) throw ValidationError("confusion matrix columns must sum to 1");
    for (int r = 0; r < 4; ++r)
      if (matrix(r, c) < 0.0 || matrix(r, c) > 1.0) throw ValidationError("confusion matrix entries must be in [0,1]");
  }
}

double ConfusionMatrix::condition_number() const {
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(matrix);
  const auto& s = svd.singularValues();
  return s(3) > 0.0 ? s(0) / s(3) : std::numeric_limits<double>::infinity();
}

void ReadoutModel::validate() const {
  for (const auto& q : qubits)
    if (!(q.p01 >= 0.0 && q.p01 <= 1.0 && q.p10 >= 0.0 && q.p10 <= 1.0))
      throw ValidationError("readout flip probabilities must lie in [0,1]");
}

ConfusionMatrix ReadoutModel::confusion() const {
  validate();
  const Eigen::Matrix2d a = qubit_confusion(qubits[0]);
  const Eigen::Matrix2d b = qubit_confusion(qubits[1]);
  ConfusionMatrix out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.matrix.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

Probabilities probabilities(const Vec4& psi) {
  Probabilities p = psi.cwiseAbs2();
  if (std::abs(p.sum() - 1.0) > 1e-9) throw ValidationError("state must be normalized");
  return p / p.sum();
}

Probabilities probabilities(const MatX& rho) {
  Probabilities p = Probabilities::Zero();
  if (rho.rows() == 4) {
    for (int i = 0; i < 4; ++i) p(i) = rho(i, i).real();
  } else {
    const int levels = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rho.rows()))));
    if (levels * levels != rho.rows() || rho.rows() != rho.cols()) throw ValidationError("unsupported density matrix shape");
    for (int n1 = 0; n1 < levels; ++n1)
      for (int n2 = 0; n2 < levels; ++n2) p(2 * (n1 > 0) + (n2 > 0)) += rho(n1 * levels + n2, n1 * levels + n2).real();
  }
  p = p.cwiseMax(0.0);
  if (!(p.sum() > 0.0)) throw ValidationError("density matrix has no population");
  return p / p.sum();
}

Counts sample_counts(const Probabilities& ideal, std::uint64_t shots, const ReadoutModel& model,
                     std::uint64_t seed) {
  if (shots == 0) throw ValidationError("at least one shot is required");
  check_probabilities(ideal);
  Probabilities q = model.confusion().apply(ideal.cwiseMax(0.0));
  q /= q.sum();

  // Multinomial via successive conditional binomials.
  std::mt19937_64 rng(seed);
  Counts c;
  std::uint64_t remaining = shots;
  double mass = 1.0;
  for (int i = 0; i < 3 && remaining > 0; ++i) {
    const double pi = mass > 0.0 ? std::clamp(q(i) / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::uint64_t> draw(remaining, pi);
    c.n[i] = draw(rng);
    remaining -= c.n[i];
    mass -= q(i);
  }
  c.n[3] = remaining;
  return c;
}

double estimate_pauli(const Probabilities& freq, Pauli a, Pauli b) {
  const auto ea = bit_eigenvalues(a);
  const auto eb = bit_eigenvalues(b);
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += ea[i >> 1] * eb[i & 1] * freq(i);
  return s;
}

double estimate_pauli(const Counts& counts, Pauli a, Pauli b) { return estimate_pauli(counts.frequencies(), a, b); }

Probabilities rotated_probabilities(const Vec4& psi, const BasisKey& basis) {
  const Mat4 u = kron(axis_rotation(basis.first), axis_rotation(basis.second));
  return probabilities(Vec4(u * psi));
}

double estimate_hamiltonian(const PauliSum& h, const std::map<BasisKey, Probabilities>& data) {
  double total = 0.0;
  for (const auto& [key, coeff] : h.terms()) {
    const auto [a, b] = key;
    if (a == Pauli::I && b == Pauli::I) {
      total += coeff;
      continue;
    }
    const Probabilities* found = nullptr;
    for (const auto& [basis, freq] : data) {
      const bool first_ok = a == Pauli::I || basis.first == axis_of(a);
      const bool second_ok = b == Pauli::I || basis.second == axis_of(b);
      if (first_ok && second_ok) {
        found = &freq;
        break;
      }
    }
    if (!found)
      throw ValidationError(std::string("no measurement basis for term ") + pauli_label(a) + pauli_label(b));
    total += coeff * estimate_pauli(*found, a, b);
  }
  return total;
}

double estimate_ht(const Probabilities& z, const Probabilities& x, const Probabilities& y) {
  using A = MeasurementAxis;
  std::map<BasisKey, Probabilities> data{{{A::Z, A::Z}, z}, {{A::X, A::X}, x}, {{A::Y, A::Y}, y}};
  return estimate_hamiltonian(build_ht(), data);
}

double estimate_ht(const Counts& z, const Counts& x, const Counts& y) {
  return estimate_ht(z.frequencies(), x.frequencies(), y.frequencies());
}

double estimate_fidelity(const Probabilities& freq) { return std::sqrt(std::max(0.0, freq(0))); }

double estimate_fidelity(const Counts& counts) { return estimate_fidelity(counts.frequencies()); }

ReadoutModel infer_readout_model(const Counts& cal00, const Counts& cal11) {
  if (cal00.total() == 0 || cal11.total() == 0) throw CalibrationError("calibration counts are empty");
  const Probabilities f0 = cal00.frequencies();
  const Probabilities f1 = cal11.frequencies();
  ReadoutModel m;
  m.qubits[0].p10 = f0(2) + f0(3);
  m.qubits[1].p10 = f0(1) + f0(3);
  m.qubits[0].p01 = f1(0) + f1(1);
  m.qubits[1].p01 = f1(0) + f1(2);
  for (const auto& q : m.qubits)
    if (std::abs(1.0 - q.p01 - q.p10) < 1e-12)
      throw CalibrationError("calibration cannot distinguish prepared states");
  return m;
}

ConfusionMatrix build_confusion(const Counts& cal00, const Counts& cal11) {
  return infer_readout_model(cal00, cal11).confusion();
}

MitigationResult mitigate(const Probabilities& measured, const ConfusionMatrix& p) {
  MitigationResult out;
  out.condition_number = p.condition_number();
  if (!std::isfinite(out.condition_number) || out.condition_number > 1e12)
    throw MitigationError("confusion matrix is singular");
  Probabilities x = p.matrix.fullPivLu().solve(measured);
  if ((x.array() < 0.0).any()) {
    out.clipped = true;
    x = x.cwiseMax(0.0);
  }
  const double s = x.sum();
  if (!(s > 0.0)) throw MitigationError("mitigated distribution vanished");
  if (out.clipped || std::abs(s - 1.0) > 1e-12) x /= s;
  out.probabilities = x;
  return out;
}

MitigationResult mitigate(const Counts& counts, const ConfusionMatrix& p) { return mitigate(counts.frequencies(), p); }

std::vector<ShotErrorRow> error_vs_shots(const Probabilities& ideal, const ReadoutModel& model,
                                         const std::vector<std::uint64_t>& shot_grid, int seeds,
                                         std::uint64_t base_seed) {
  if (seeds < 1) throw ValidationError("at least one seed is required");
  std::vector<ShotErrorRow> out;
  for (std::size_t g = 0; g < shot_grid.size(); ++g) {
    const std::uint64_t n = shot_grid[g];
    double sum = 0.0, sum_sq = 0.0;
    for (int s = 0; s < seeds; ++s) {
      const std::uint64_t seed = base_seed ^ (0x9E3779B97F4A7C15ULL * (g * 100003ULL + static_cast<std::uint64_t>(s) + 1));
      const Probabilities f = sample_counts(ideal, n, model, seed).frequencies();
      const double dev = (f - ideal).cwiseAbs().mean();
      sum += dev;
      sum_sq += dev * dev;
    }
    const double mean = sum / seeds;
    const double var = seeds > 1 ? std::max(0.0, (sum_sq - seeds * mean * mean) / (seeds - 1)) : 0.0;
    out.push_back({n, mean, std::sqrt(var / seeds)});
  }
  return out;
}

double single_shot_deviation(const Probabilities& p) {
  return (2.0 * p.array() * (1.0 - p.array())).sum() / 4.0;
}

Probabilities uniform_probabilities() { return Probabilities::Constant(0.25); }

}  // namespace adia
