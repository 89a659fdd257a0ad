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

#include "adia/linalg.hpp"

#include <cmath>

namespace adia {

Mat4 kron(const Mat2& a, const Mat2& b) {
  Mat4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

MatX kron(const MatX& a, const MatX& b) {
  MatX out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

MatX expm_hermitian(const MatX& h, double t) {
  Eigen::SelfAdjointEigenSolver<MatX> es(h);
  const VecX phases =
      (es.eigenvalues().cast<cd>() * (-kI * t)).array().exp().matrix();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Mat4 expm_hermitian(const Mat4& h, double t) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(h);
  const Vec4 phases =
      (es.eigenvalues().cast<cd>() * (-kI * t)).array().exp().matrix();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

double unitarity_error(const MatX& u) {
  return (u.adjoint() * u - MatX::Identity(u.cols(), u.cols())).norm();
}

double hermiticity_error(const MatX& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double phase_distance(const MatX& a, const MatX& b) {
  // ||a e^{i phi} - b||^2 = |a|^2 + |b|^2 - 2 Re(e^{i phi} <b, a>), minimized
  // when e^{i phi} aligns <b, a> with the positive real axis.
  const cd overlap = (b.adjoint() * a).trace();
  const double sq = a.squaredNorm() + b.squaredNorm() - 2.0 * std::abs(overlap);
  return std::sqrt(std::max(sq, 0.0));
}

double operator_norm(const MatX& a) {
  Eigen::JacobiSVD<MatX> svd(a);
  return svd.singularValues()(0);
}

}  // namespace adia
