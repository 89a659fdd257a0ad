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

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace adia {

using cd = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Vec4 = Eigen::Vector4cd;
using MatX = Eigen::MatrixXcd;
using VecX = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cd kI{0.0, 1.0};

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of an operation (e.g. t outside [0, T]).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed input: non-unitary matrix, unnormalized state, bad parameters.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A fixed-step integrator drifted beyond its conservation tolerance.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// A circuit does not have the structure an operation requires.
class StructuralError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class MitigationError : public Error {
 public:
  using Error::Error;
};

Mat4 kron(const Mat2& a, const Mat2& b);
MatX kron(const MatX& a, const MatX& b);

/// exp(-i H t) for Hermitian H, via its eigendecomposition.
MatX expm_hermitian(const MatX& h, double t);
Mat4 expm_hermitian(const Mat4& h, double t);

/// ||U^dagger U - I||_F.
double unitarity_error(const MatX& u);

/// ||A - A^dagger||_max.
double hermiticity_error(const MatX& a);

/// min over phi of ||a e^{i phi} - b||_F.
double phase_distance(const MatX& a, const MatX& b);

/// Largest singular value.
double operator_norm(const MatX& a);

}  // namespace adia
