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

#include "test_util.hpp"

#include <cmath>

namespace adia::testing {

namespace {

MatX ginibre(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatX g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = cd(normal(rng), normal(rng));
  return g;
}

using cl = std::complex<long double>;
using MatL = Eigen::Matrix<cl, Eigen::Dynamic, Eigen::Dynamic>;

MatL expm_ld(const MatL& a) {
  long double norm = 0.0L;
  for (int i = 0; i < a.rows(); ++i) {
    long double row = 0.0L;
    for (int j = 0; j < a.cols(); ++j) row += std::abs(a(i, j));
    norm = std::max(norm, row);
  }
  int squarings = 0;
  if (norm > 0.25L) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.25L)));
  const MatL s = a / std::ldexp(1.0L, squarings);
  MatL term = MatL::Identity(a.rows(), a.cols());
  MatL sum = term;
  for (int k = 1; k <= 24; ++k) {
    term = (term * s) / static_cast<long double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

MatL to_ld(const MatX& m) { return m.cast<cl>(); }

}  // namespace

std::vector<long double> finite_difference_gradient(const PulseProblem& problem,
                                                    const std::array<std::vector<double>, 4>& channels,
                                                    const std::vector<std::pair<int, int>>& where, long double step) {
  const std::size_t n = channels[0].size();
  const int d = static_cast<int>(problem.drift.rows());
  const long double two_pi_milli = 2.0L * 3.141592653589793238462643383279502884L * 1e-3L;
  const MatL drift = to_ld(problem.drift);
  std::array<MatL, 4> gens;
  for (int c = 0; c < 4; ++c) gens[c] = to_ld(problem.generators[c]);
  const MatL target_adj = to_ld(problem.target).adjoint();
  const cl minus_i_dt(0.0L, -static_cast<long double>(problem.dt));

  const auto segment = [&](std::size_t j, int perturbed_channel, long double delta) {
    MatL h = drift;
    for (int c = 0; c < 4; ++c) {
      long double e = channels[c][j];
      if (c == perturbed_channel) e += delta;
      h += (two_pi_milli * e) * gens[c];
    }
    return expm_ld(minus_i_dt * h);
  };

  // prefix[j] = U_{j-1} ... U_0 and suffix[j] = U_{n-1} ... U_{j+1}.
  std::vector<MatL> prefix(n + 1), suffix(n + 1);
  prefix[0] = MatL::Identity(d, d);
  for (std::size_t j = 0; j < n; ++j) prefix[j + 1] = segment(j, -1, 0.0L) * prefix[j];
  suffix[n] = MatL::Identity(d, d);
  for (std::size_t j = n; j-- > 0;) suffix[j] = (j + 1 < n ? suffix[j + 1] * segment(j + 1, -1, 0.0L) : suffix[n]);

  long double sum_sq = 0.0L;
  for (const auto& ch : channels)
    for (double e : ch) sum_sq += static_cast<long double>(e) * e;
  const long double scale = 1.0L / (static_cast<long double>(n) * problem.eps_cut * problem.eps_cut);
  const long double norm = problem.chi / (std::exp(1.0L) - 1.0L);

  std::vector<long double> out;
  out.reserve(where.size());
  for (const auto& [c, j] : where) {
    const auto value = [&](long double delta) {
      const MatL u = suffix[j] * segment(j, c, delta) * prefix[j];
      const long double f = std::abs((target_adj * u).trace()) / d;
      const long double e = channels[c][j];
      const long double u_norm = (sum_sq - e * e + (e + delta) * (e + delta)) * scale;
      return 1.0L - 0.5L * f * f + norm * std::expm1(std::pow(u_norm, problem.exponent));
    };
    out.push_back((value(step) - value(-step)) / (2.0L * step));
  }
  return out;
}

MatX haar_unitary(int n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<MatX> qr(ginibre(n, rng));
  MatX q = qr.householderQ();
  const MatX r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) q.col(j) *= r(j, j) / std::abs(r(j, j));
  return q;
}

VecX random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VecX v(n);
  for (int i = 0; i < n; ++i) v(i) = cd(normal(rng), normal(rng));
  return v.normalized();
}

MatX random_density(int n, std::mt19937_64& rng) {
  const MatX g = ginibre(n, rng);
  MatX rho = g * g.adjoint();
  return rho / rho.trace();
}

MatX taylor_expm(const MatX& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const MatX s = a / std::ldexp(1.0, squarings);
  MatX term = MatX::Identity(a.rows(), a.cols());
  MatX sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * s / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

double phase_free_distance(const MatX& a, const MatX& b) {
  // The optimal phase aligns tr(a^dagger b); subtracting explicitly avoids the
  // cancellation of the closed form sqrt(|a|^2 + |b|^2 - 2 |tr(a^dagger b)|).
  const cd overlap = (a.adjoint() * b).trace();
  const cd phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cd(1.0);
  return (a * phase - b).norm();
}

MatX kron_loops(const MatX& a, const MatX& b) {
  MatX out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

}  // namespace adia::testing
