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

#include "adia/circuits.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace adia {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

const Mat4& magic_basis() {
  static const Mat4 m = [] {
    const double s = 1.0 / std::sqrt(2.0);
    Mat4 b;
    b << 1, kI, 0, 0,  //
        0, 0, kI, 1,   //
        0, 0, kI, -1,  //
        1, -kI, 0, 0;
    return Mat4(s * b);
  }();
  return m;
}

const Mat4& cnot01() {
  static const Mat4 m = [] {
    Mat4 c = Mat4::Zero();
    c(0, 0) = c(1, 1) = c(2, 3) = c(3, 2) = 1.0;
    return c;
  }();
  return m;
}

const Mat4& cnot10() {
  static const Mat4 m = [] {
    Mat4 c = Mat4::Zero();
    c(0, 0) = c(2, 2) = c(1, 3) = c(3, 1) = 1.0;
    return c;
  }();
  return m;
}

Mat2 hadamard() {
  Mat2 h;
  h << 1, 1, 1, -1;
  return h / std::sqrt(2.0);
}

// Fixed-axis rotations exp(-i t sigma/2) in the textbook (|0> = +1 eigenstate
// of Z) orientation; only used to build the interaction circuit below.
Mat2 rz(double t) {
  Mat2 m = Mat2::Zero();
  m(0, 0) = std::exp(-kI * (t / 2));
  m(1, 1) = std::exp(kI * (t / 2));
  return m;
}

Mat2 ry(double t) {
  Mat2 m;
  m << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
  return m;
}

void check_qubit(int q) {
  if (q < 0 || q >= Circuit::kQubits) throw ValidationError("qubit index out of range");
}

void add_layer(Circuit& c, const Mat4& local) {
  const auto [a, b] = factor_tensor_product(local);
  c.add(u3_from_matrix(a, 0));
  c.add(u3_from_matrix(b, 1));
}

}  // namespace

double wrap_angle(double x) {
  double y = std::remainder(x, 2.0 * kPi);
  if (y <= -kPi) y += 2.0 * kPi;
  return y;
}

Circuit& Circuit::add(Gate g) {
  validate(g);
  gates.push_back(std::move(g));
  return *this;
}

Circuit& Circuit::append(const Circuit& other) {
  gates.insert(gates.end(), other.gates.begin(), other.gates.end());
  return *this;
}

int Circuit::count_cnots() const {
  int n = 0;
  for (const auto& g : gates) n += std::holds_alternative<CnotGate>(g);
  return n;
}

int Circuit::count_u3() const {
  int n = 0;
  for (const auto& g : gates) n += std::holds_alternative<U3Gate>(g);
  return n;
}

void validate(const Gate& g) {
  std::visit(overloaded{
                 [](const U3Gate& u) {
                   check_qubit(u.qubit);
                   if (!std::isfinite(u.theta) || !std::isfinite(u.phi) || !std::isfinite(u.lambda))
                     throw ValidationError("U3 angles must be finite");
                 },
                 [](const CnotGate& c) {
                   check_qubit(c.control);
                   check_qubit(c.target);
                   if (c.control == c.target) throw ValidationError("CNOT control equals target");
                 },
                 [](const RxxGate& r) {
                   if (!std::isfinite(r.angle)) throw ValidationError("RXX angle must be finite");
                 },
                 [](const OpaqueGate& o) {
                   if (unitarity_error(o.unitary) > 1e-10) throw ValidationError("opaque gate payload is not unitary");
                 },
             },
             g);
}

Mat2 u3_matrix(double theta, double phi, double lambda) {
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  Mat2 m;
  m << c, -std::exp(kI * lambda) * s, std::exp(kI * phi) * s, std::exp(kI * (phi + lambda)) * c;
  return m;
}

U3Gate u3_from_matrix(const Mat2& u, int qubit) {
  constexpr double eps = 1e-12;
  const double c = std::abs(u(0, 0));
  const double s = std::abs(u(1, 0));
  U3Gate g;
  g.qubit = qubit;
  g.theta = 2.0 * std::atan2(s, c);
  if (s < eps * std::max(c, 1.0)) {
    // Diagonal: only phi + lambda is determined.
    const double gamma = std::arg(u(0, 0));
    g.phi = 0.0;
    g.lambda = wrap_angle(std::arg(u(1, 1)) - gamma);
  } else if (c < eps * std::max(s, 1.0)) {
    // Anti-diagonal: only phi - lambda is determined.
    const double gamma = std::arg(-u(0, 1));
    g.lambda = 0.0;
    g.phi = wrap_angle(std::arg(u(1, 0)) - gamma);
  } else {
    const double gamma = std::arg(u(0, 0));
    g.phi = wrap_angle(std::arg(u(1, 0)) - gamma);
    g.lambda = wrap_angle(std::arg(-u(0, 1)) - gamma);
  }
  return g;
}

Mat4 gate_matrix(const Gate& g) {
  return std::visit(overloaded{
                        [](const U3Gate& u) -> Mat4 {
                          const Mat2 m = u3_matrix(u.theta, u.phi, u.lambda);
                          return u.qubit == 0 ? kron(m, Mat2::Identity()) : kron(Mat2::Identity(), m);
                        },
                        [](const CnotGate& c) -> Mat4 { return c.control == 0 ? cnot01() : cnot10(); },
                        [](const RxxGate& r) -> Mat4 {
                          const Mat4 xx = kron(pauli_matrix(Pauli::X), pauli_matrix(Pauli::X));
                          return std::cos(r.angle / 2) * Mat4::Identity() - kI * std::sin(r.angle / 2) * xx;
                        },
                        [](const OpaqueGate& o) -> Mat4 { return o.unitary; },
                    },
                    g);
}

Mat4 circuit_unitary(const Circuit& c) {
  Mat4 u = Mat4::Identity();
  for (const auto& g : c.gates) u = gate_matrix(g) * u;
  return u;
}

std::pair<Mat2, Mat2> factor_tensor_product(const Mat4& u, double tol) {
  // u = A (x) B, so the (i, j) 2x2 block of u is A(i, j) B.
  int bi = 0, bj = 0;
  double best = -1.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double n = u.block<2, 2>(2 * i, 2 * j).norm();
      if (n > best) best = n, bi = i, bj = j;
    }
  Mat2 b = u.block<2, 2>(2 * bi, 2 * bj);
  b /= std::sqrt(b.determinant());
  Mat2 a;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) a(i, j) = (b.adjoint() * u.block<2, 2>(2 * i, 2 * j)).trace() / 2.0;
  if ((kron(a, b) - u).norm() > tol) throw StructuralError("matrix is not a tensor product of one-qubit gates");
  return {a, b};
}

Mat4 CanonicalForm::interaction() const {
  const Mat4 xx = kron(pauli_matrix(Pauli::X), pauli_matrix(Pauli::X));
  const Mat4 yy = kron(pauli_matrix(Pauli::Y), pauli_matrix(Pauli::Y));
  const Mat4 zz = kron(pauli_matrix(Pauli::Z), pauli_matrix(Pauli::Z));
  // The three products commute and square to identity.
  auto rot = [](const Mat4& p, double x) -> Mat4 { return std::cos(x) * Mat4::Identity() + kI * std::sin(x) * p; };
  return rot(xx, a) * rot(yy, b) * rot(zz, c);
}

Mat4 CanonicalForm::reconstruct() const {
  return std::exp(kI * phase) * kron(after0, after1) * interaction() * kron(before0, before1);
}

CanonicalForm canonical_decomposition(const Mat4& u) {
  if (unitarity_error(u) > 1e-9) throw ValidationError("decomposition input is not unitary");
  const Mat4& m = magic_basis();

  // Move to SU(4); the removed phase is restored at the end.
  const double det_phase = std::arg(u.determinant()) / 4.0;
  const Mat4 us = u * std::exp(-kI * det_phase);
  const Mat4 up = m.adjoint() * us * m;

  // up = O1 D O2 with O1, O2 in SO(4): up^T up = O2^T D^2 O2 is symmetric
  // unitary, so its real and imaginary parts commute and share a real
  // orthogonal eigenbasis. A generic real combination separates degeneracies.
  const Mat4 sym = up.transpose() * up;
  const Eigen::Matrix4d re = sym.real();
  const Eigen::Matrix4d im = sym.imag();
  Eigen::Matrix4d o2t;
  double best = std::numeric_limits<double>::infinity();
  for (double mix : {0.5772156649, 1.6180339887, -0.8414709848, 2.7182818285, 0.3183098862}) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(re + mix * im);
    const Eigen::Matrix4d o = es.eigenvectors();
    const Mat4 d = o.transpose().cast<cd>() * sym * o.cast<cd>();
    const double off = (d - Mat4(d.diagonal().asDiagonal())).norm();
    if (off < best) {
      best = off;
      o2t = o;
    }
    if (off < 1e-13) break;
  }
  if (o2t.determinant() < 0) o2t.col(0) *= -1.0;

  const Vec4 d2 = (o2t.transpose().cast<cd>() * sym * o2t.cast<cd>()).diagonal();
  Vec4 d = d2.array().sqrt();
  Mat4 o1 = up * o2t.cast<cd>() * d.cwiseInverse().asDiagonal();
  if (o1.real().determinant() < 0) {
    d(0) = -d(0);
    o1.col(0) *= -1.0;
  }
  const Eigen::Matrix4d o1r = o1.real();

  // Solve a s_x + b s_y + c s_z + phi = arg(d_k), where s_p are the diagonals
  // of P(x)P in the magic basis.
  Eigen::Matrix4d lhs;
  const Pauli paulis[3] = {Pauli::X, Pauli::Y, Pauli::Z};
  for (int p = 0; p < 3; ++p) {
    const Mat4 pp = m.adjoint() * kron(pauli_matrix(paulis[p]), pauli_matrix(paulis[p])) * m;
    lhs.col(p) = pp.diagonal().real();
  }
  lhs.col(3).setOnes();
  Eigen::Vector4d rhs;
  for (int k = 0; k < 4; ++k) rhs(k) = std::arg(d(k));
  const Eigen::Vector4d sol = lhs.fullPivLu().solve(rhs);

  CanonicalForm cf;
  cf.a = sol(0);
  cf.b = sol(1);
  cf.c = sol(2);
  cf.phase = wrap_angle(sol(3) + det_phase);
  const Mat4 left = m * o1r.cast<cd>() * m.adjoint();
  const Mat4 right = m * o2t.transpose().cast<cd>() * m.adjoint();
  std::tie(cf.after0, cf.after1) = factor_tensor_product(left, 1e-8);
  std::tie(cf.before0, cf.before1) = factor_tensor_product(right, 1e-8);
  return cf;
}

Circuit decompose_two_qubit(const Mat4& u) {
  const CanonicalForm cf = canonical_decomposition(u);
  const Mat2 id = Mat2::Identity();
  const Mat4 hh = kron(hadamard(), hadamard());

  // exp(i(a XX + b YY + c ZZ)) equals, up to phase, the sequence
  //   (I (x) Rz(-pi/2)), CNOT10, (I (x) Ry(2a + pi/2)), CNOT01,
  //   (Rz(-pi/2 - 2c) (x) Ry(-pi/2 - 2b)), CNOT10, (Rz(pi/2) (x) I),
  // and CNOT10 = (H (x) H) CNOT01 (H (x) H).
  const Mat4 l0 = kron(id, rz(-kPi / 2));
  const Mat4 l1 = kron(id, ry(2 * cf.a + kPi / 2));
  const Mat4 l2 = kron(rz(-kPi / 2 - 2 * cf.c), ry(-kPi / 2 - 2 * cf.b));
  const Mat4 l3 = kron(rz(kPi / 2), id);

  const Mat4 first = hh * l0 * kron(cf.before0, cf.before1);
  const Mat4 second = l1 * hh;
  const Mat4 third = hh * l2;
  const Mat4 fourth = kron(cf.after0, cf.after1) * l3 * hh;

  Circuit c;
  add_layer(c, first);
  c.add(CnotGate{0, 1});
  add_layer(c, second);
  c.add(CnotGate{0, 1});
  add_layer(c, third);
  c.add(CnotGate{0, 1});
  add_layer(c, fourth);
  return c;
}

namespace {

Circuit state_prefix() {
  Circuit c;
  c.add(U3Gate{kPi, 0.0, kPi, 0}).add(U3Gate{kPi, 0.0, kPi, 1});
  c.add(U3Gate{kPi / 2, 0.0, kPi, 0}).add(U3Gate{kPi / 2, 0.0, kPi, 1});
  return c;
}

}  // namespace

Circuit build_adiabatic_circuit(const Schedule& sched, const TrotterPlan& plan) {
  Circuit c = state_prefix();
  for (int k = 1; k <= plan.steps; ++k) c.append(decompose_two_qubit(short_time_propagator(sched, plan, k)));
  return c;
}

Circuit build_fidelity_probe(const Schedule& sched, const TrotterPlan& plan, int k) {
  if (k == 0) {
    // Inverse of the prefix: H(x)H then X(x)X.
    Circuit c;
    c.add(U3Gate{kPi / 2, 0.0, kPi, 0}).add(U3Gate{kPi / 2, 0.0, kPi, 1});
    c.add(U3Gate{kPi, 0.0, kPi, 0}).add(U3Gate{kPi, 0.0, kPi, 1});
    return c;
  }
  if (k < 0 || k > plan.steps) throw DomainError("probe step outside [0, n]");
  const Mat4 prefix = circuit_unitary(state_prefix());
  const Mat4 probe = prefix.adjoint() * trotter_unitary(sched, plan, k).adjoint();
  return decompose_two_qubit(probe);
}

Circuit merge_u3_pairs(const Circuit& c) {
  Circuit out;
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    if (std::holds_alternative<CnotGate>(g)) {
      out.add(g);
      continue;
    }
    const auto* first = std::get_if<U3Gate>(&g);
    const auto* second = i + 1 < c.gates.size() ? std::get_if<U3Gate>(&c.gates[i + 1]) : nullptr;
    if (first == nullptr || second == nullptr || first->qubit == second->qubit)
      throw StructuralError("circuit is not made of CNOTs and simultaneous U3 pairs");
    out.add(OpaqueGate{gate_matrix(*second) * gate_matrix(*first)});
    ++i;
  }
  return out;
}

Mat2 axis_rotation(MeasurementAxis axis) {
  switch (axis) {
    case MeasurementAxis::X:
      return u3_matrix(kPi / 2, 0.0, kPi);
    case MeasurementAxis::Y:
      return u3_matrix(kPi / 2, kPi / 2, kPi / 2);
    case MeasurementAxis::Z:
      return Mat2::Identity();
  }
  return Mat2::Identity();
}

Circuit basis_rotation(MeasurementAxis axis) {
  Circuit c;
  switch (axis) {
    case MeasurementAxis::X:
      c.add(U3Gate{kPi / 2, 0.0, kPi, 0}).add(U3Gate{kPi / 2, 0.0, kPi, 1});
      break;
    case MeasurementAxis::Y:
      c.add(U3Gate{kPi / 2, kPi / 2, kPi / 2, 0}).add(U3Gate{kPi / 2, kPi / 2, kPi / 2, 1});
      break;
    case MeasurementAxis::Z:
      break;
  }
  return c;
}

std::string to_text(const Circuit& c) {
  std::ostringstream out;
  out << std::setprecision(12);
  for (const auto& g : c.gates) {
    std::visit(overloaded{
                   [&](const U3Gate& u) { out << "U3 " << u.qubit << ' ' << u.theta << ' ' << u.phi << ' ' << u.lambda; },
                   [&](const CnotGate& x) { out << "CNOT " << x.control << ' ' << x.target; },
                   [&](const RxxGate& r) { out << "RXX " << r.angle; },
                   [&](const OpaqueGate& o) {
                     out << "UNITARY" << std::setprecision(17);
                     for (int i = 0; i < 4; ++i)
                       for (int j = 0; j < 4; ++j) out << ' ' << o.unitary(i, j).real() << ' ' << o.unitary(i, j).imag();
                     out << std::setprecision(12);
                   },
               },
               g);
    out << '\n';
  }
  return out.str();
}

Circuit parse_circuit(std::string_view text) {
  Circuit c;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string op;
    if (!(ls >> op) || op[0] == '#') continue;
    bool ok = true;
    if (op == "U3") {
      U3Gate u;
      ok = static_cast<bool>(ls >> u.qubit >> u.theta >> u.phi >> u.lambda);
      if (ok) c.add(u);
    } else if (op == "CNOT") {
      CnotGate x;
      ok = static_cast<bool>(ls >> x.control >> x.target);
      if (ok) c.add(x);
    } else if (op == "RXX") {
      RxxGate r;
      ok = static_cast<bool>(ls >> r.angle);
      if (ok) c.add(r);
    } else if (op == "UNITARY") {
      OpaqueGate o;
      for (int i = 0; i < 4 && ok; ++i)
        for (int j = 0; j < 4 && ok; ++j) {
          double re = 0, im = 0;
          ok = static_cast<bool>(ls >> re >> im);
          o.unitary(i, j) = cd(re, im);
        }
      if (ok) c.add(o);
    } else {
      ok = false;
    }
    if (!ok) throw ValidationError("malformed circuit line " + std::to_string(lineno) + ": " + line);
  }
  return c;
}

}  // namespace adia
