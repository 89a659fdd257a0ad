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

// Reference implementations used as oracles. None of them call into the
// library's numerical routines.

#pragma once

#include <array>
#include <complex>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace adia::testing {

using cd = std::complex<double>;
using MatX = Eigen::MatrixXcd;
using VecX = Eigen::VectorXcd;

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the
/// diagonal phases of R divided out.
MatX haar_unitary(int n, std::mt19937_64& rng);

/// Uniformly distributed pure state.
VecX random_state(int n, std::mt19937_64& rng);

/// Random density matrix from a Ginibre matrix G: G G^dagger / tr.
MatX random_density(int n, std::mt19937_64& rng);

/// exp(A) by scaling and squaring of a 30-term Taylor series.
MatX taylor_expm(const MatX& a);

/// min over phi of ||a e^{i phi} - b||_F.
double phase_free_distance(const MatX& a, const MatX& b);

/// Kronecker product written out element by element.
MatX kron_loops(const MatX& a, const MatX& b);

/// Central finite differences of 1 - F^2/2 + chi expm1(u^m)/(e - 1), where
/// u = sum eps^2 / (samples eps_cut^2), for a piecewise-constant pulse
/// H_j = drift + sum_c 2 pi 1e-3 eps_c[j] G_c. Everything, including the
/// segment exponentials, runs in long double. `where` lists (channel, sample).
struct PulseProblem {
  MatX drift;
  std::array<MatX, 4> generators;
  MatX target;
  double dt = 0.125;
  double eps_cut = 30.0;
  int exponent = 3;
  double chi = 1e-3;
};
std::vector<long double> finite_difference_gradient(const PulseProblem& problem,
                                                    const std::array<std::vector<double>, 4>& channels,
                                                    const std::vector<std::pair<int, int>>& where, long double step);

}  // namespace adia::testing
