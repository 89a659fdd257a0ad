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

// Limited-memory BFGS with a strong-Wolfe line search.

#pragma once

#include <functional>

#include <Eigen/Dense>

namespace adia::optim {

/// Returns f(x) and writes the gradient into `grad`.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Called after every accepted step with the new iterate; return true to stop.
/// The most recent call to the objective was made at this iterate.
using Monitor = std::function<bool(int iteration, const Eigen::VectorXd& x, double f)>;

struct LbfgsOptions {
  int memory = 20;
  int max_iterations = 1000;
  double c1 = 1e-4;
  double c2 = 0.9;
  double gradient_tolerance = 1e-12;  // on the max-norm
  double relative_decrease_tolerance = 0.0;
  int max_line_search = 40;
};

enum class LbfgsStatus { Stopped, GradientSmall, MaxIterations, LineSearchFailed, NoProgress };

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  LbfgsStatus status = LbfgsStatus::MaxIterations;
};

LbfgsResult minimize_lbfgs(const Objective& objective, Eigen::VectorXd x0, const LbfgsOptions& options,
                           const Monitor& monitor = {});

}  // namespace adia::optim
