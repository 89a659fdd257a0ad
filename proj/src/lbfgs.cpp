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
#include <deque>
#include <limits>

namespace adia::optim {

namespace {

using Eigen::VectorXd;

struct Probe {
  double alpha;
  double f;
  double slope;  // directional derivative
};

// Minimizer of the cubic through (a, fa, da) and (b, fb, db), safeguarded to
// the interior of [min(a,b), max(a,b)]; falls back to bisection.
double interpolate(const Probe& a, const Probe& b) {
  const double lo = std::min(a.alpha, b.alpha);
  const double hi = std::max(a.alpha, b.alpha);
  const double d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
  const double disc = d1 * d1 - a.slope * b.slope;
  double x = 0.5 * (lo + hi);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    const double denom = b.slope - a.slope + 2.0 * d2;
    if (denom != 0.0) x = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
  }
  const double margin = 0.1 * (hi - lo);
  if (!std::isfinite(x) || x < lo + margin || x > hi - margin) x = 0.5 * (lo + hi);
  return x;
}

class LineSearch {
 public:
  LineSearch(const Objective& f, const LbfgsOptions& opt, int& evals) : f_(f), opt_(opt), evals_(evals) {}

  // On success x, fx, grad hold the accepted point, which is also the last
  // point the objective saw.
  bool run(const VectorXd& x0, double f0, const VectorXd& g0, const VectorXd& dir, double alpha0, VectorXd& x,
           double& fx, VectorXd& grad) {
    x0_ = &x0;
    dir_ = &dir;
    f0_ = f0;
    slope0_ = g0.dot(dir);
    if (!(slope0_ < 0.0)) return false;

    Probe prev{0.0, f0, slope0_};
    double alpha = alpha0;
    for (int i = 0; i < opt_.max_line_search; ++i) {
      const Probe cur = eval(alpha, x, fx, grad);
      if (!std::isfinite(cur.f) || cur.f > f0 + opt_.c1 * alpha * slope0_ || (i > 0 && cur.f >= prev.f))
        return zoom(prev, cur, x, fx, grad);
      if (std::abs(cur.slope) <= -opt_.c2 * slope0_) return true;
      if (cur.slope >= 0.0) return zoom(cur, prev, x, fx, grad);
      prev = cur;
      alpha *= 2.0;
    }
    return false;
  }

 private:
  Probe eval(double alpha, VectorXd& x, double& fx, VectorXd& grad) {
    x = *x0_ + alpha * *dir_;
    fx = f_(x, grad);
    ++evals_;
    return {alpha, fx, grad.dot(*dir_)};
  }

  bool zoom(Probe lo, Probe hi, VectorXd& x, double& fx, VectorXd& grad) {
    for (int i = 0; i < opt_.max_line_search; ++i) {
      const double alpha = interpolate(lo, hi);
      const Probe cur = eval(alpha, x, fx, grad);
      if (!std::isfinite(cur.f) || cur.f > f0_ + opt_.c1 * alpha * slope0_ || cur.f >= lo.f) {
        hi = cur;
      } else {
        if (std::abs(cur.slope) <= -opt_.c2 * slope0_) return true;
        if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = cur;
      }
      if (std::abs(hi.alpha - lo.alpha) < 1e-16 * std::max(1.0, lo.alpha)) break;
    }
    // Accept the best sufficient-decrease point even without the curvature condition.
    if (lo.alpha > 0.0) {
      eval(lo.alpha, x, fx, grad);
      return true;
    }
    return false;
  }

  const Objective& f_;
  const LbfgsOptions& opt_;
  int& evals_;
  const VectorXd* x0_ = nullptr;
  const VectorXd* dir_ = nullptr;
  double f0_ = 0.0;
  double slope0_ = 0.0;
};

}  // namespace

LbfgsResult minimize_lbfgs(const Objective& objective, Eigen::VectorXd x0, const LbfgsOptions& options,
                           const Monitor& monitor) {
  LbfgsResult res;
  VectorXd x = std::move(x0);
  VectorXd g(x.size());
  double f = objective(x, g);
  res.evaluations = 1;

  std::deque<VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  LineSearch ls(objective, options, res.evaluations);
  VectorXd x_new(x.size()), g_new(x.size());

  for (int it = 0; it < options.max_iterations; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
      res.status = LbfgsStatus::GradientSmall;
      break;
    }

    // Two-loop recursion.
    VectorXd q = -g;
    std::vector<double> coef(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      coef[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= coef[i] * y_hist[i];
    }
    double alpha0 = 1.0;
    if (!s_hist.empty()) {
      q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    } else {
      alpha0 = 1.0 / std::max(g.norm(), 1e-300);
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (coef[i] - beta) * s_hist[i];
    }
    if (!(q.dot(g) < 0.0)) {
      // Not a descent direction; restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      q = -g;
      alpha0 = 1.0 / std::max(g.norm(), 1e-300);
    }

    double f_new = f;
    if (!ls.run(x, f, g, q, alpha0, x_new, f_new, g_new)) {
      res.status = LbfgsStatus::LineSearchFailed;
      // The objective last saw a rejected point; re-evaluate at the iterate.
      f = objective(x, g);
      ++res.evaluations;
      break;
    }

    VectorXd s = x_new - x;
    VectorXd y = g_new - g;
    const double sy = s.dot(y);
    const double decrease = f - f_new;
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    res.iterations = it + 1;
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    if (monitor && monitor(res.iterations, x, f)) {
      res.status = LbfgsStatus::Stopped;
      break;
    }
    if (options.relative_decrease_tolerance > 0.0 &&
        decrease <= options.relative_decrease_tolerance * std::max(std::abs(f), 1.0)) {
      res.status = LbfgsStatus::NoProgress;
      break;
    }
    if (it + 1 == options.max_iterations) res.status = LbfgsStatus::MaxIterations;
  }
  res.x = std::move(x);
  res.f = f;
  return res;
}

}  // namespace adia::optim
