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


#include "adia/lbfgs.hpp"

#include <cmath>

#include <gtest/gtest.h>

namespace adia::optim {
namespace {

using Eigen::VectorXd;

double rosenbrock(const VectorXd& x, VectorXd& g) {
  double f = 0.0;
  g.setZero(x.size());
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    const double a = x(i + 1) - x(i) * x(i);
    const double b = 1.0 - x(i);
    f += 100.0 * a * a + b * b;
    g(i) += -400.0 * x(i) * a - 2.0 * b;
    g(i + 1) += 200.0 * a;
  }
  return f;
}

TEST(Lbfgs, Rosenbrock) {
  VectorXd x0(6);
  x0 << -1.2, 1.0, -1.2, 1.0, -1.2, 1.0;
  LbfgsOptions opt;
  opt.gradient_tolerance = 1e-10;
  const LbfgsResult r = minimize_lbfgs(rosenbrock, x0, opt);
  EXPECT_EQ(r.status, LbfgsStatus::GradientSmall);
  EXPECT_LT((r.x - VectorXd::Ones(6)).norm(), 1e-8);
  EXPECT_LT(r.f, 1e-16);
  EXPECT_LT(r.iterations, 200);
}

// Ill-conditioned quadratic (condition number 1e4) with a known minimizer
// and zero minimum, so f resolves the last digits of x.
TEST(Lbfgs, Quadratic) {
  const int n = 30;
  VectorXd diag(n), x_star(n);
  for (int i = 0; i < n; ++i) {
    diag(i) = std::pow(10.0, 4.0 * i / (n - 1));
    x_star(i) = std::sin(i + 1.0);
  }
  const auto quad = [&](const VectorXd& x, VectorXd& g) {
    g = diag.cwiseProduct(x - x_star);
    return 0.5 * (x - x_star).dot(g);
  };
  LbfgsOptions opt;
  opt.gradient_tolerance = 1e-9;
  const LbfgsResult r = minimize_lbfgs(quad, VectorXd::Zero(n), opt);
  EXPECT_EQ(r.status, LbfgsStatus::GradientSmall);
  EXPECT_LT((r.x - x_star).lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(Lbfgs, MonitorStopsAndSeesLastEvaluation) {
  VectorXd last_eval;
  const auto f = [&](const VectorXd& x, VectorXd& g) {
    last_eval = x;
    return rosenbrock(x, g);
  };
  VectorXd x0(2);
  x0 << -1.2, 1.0;
  int calls = 0;
  const LbfgsResult r = minimize_lbfgs(f, x0, LbfgsOptions{}, [&](int it, const VectorXd& x, double) {
    ++calls;
    EXPECT_EQ(it, calls);
    EXPECT_EQ(x, last_eval);
    return it == 5;
  });
  EXPECT_EQ(r.status, LbfgsStatus::Stopped);
  EXPECT_EQ(r.iterations, 5);
  EXPECT_EQ(calls, 5);
}

TEST(Lbfgs, IterationLimit) {
  VectorXd x0(2);
  x0 << -1.2, 1.0;
  LbfgsOptions opt;
  opt.max_iterations = 3;
  const LbfgsResult r = minimize_lbfgs(rosenbrock, x0, opt);
  EXPECT_EQ(r.status, LbfgsStatus::MaxIterations);
  EXPECT_EQ(r.iterations, 3);
  VectorXd g;
  EXPECT_LT(r.f, rosenbrock(x0, g));
}

TEST(Lbfgs, MonotoneDecrease) {
  VectorXd x0(4);
  x0 << -1.2, 1.0, 0.3, -0.7;
  double prev = INFINITY;
  minimize_lbfgs(rosenbrock, x0, LbfgsOptions{}, [&](int, const VectorXd&, double f) {
    EXPECT_LT(f, prev);
    prev = f;
    return false;
  });
}

TEST(Lbfgs, StartAtMinimum) {
  const LbfgsResult r = minimize_lbfgs(rosenbrock, VectorXd::Ones(3), LbfgsOptions{});
  EXPECT_EQ(r.status, LbfgsStatus::GradientSmall);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.evaluations, 1);
}

}  // namespace
}  // namespace adia::optim
