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

#include "adia/pulse_control.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "adia/lbfgs.hpp"

namespace adia {

namespace {

constexpr const char* kCsvHeader = "t_ns,eI1_MHz,eQ1_MHz,eI2_MHz,eQ2_MHz";

std::size_t sample_count(double duration_ns, double sample_rate) {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) throw ValidationError("sample rate must be positive");
  if (!(duration_ns > 0.0) || !std::isfinite(duration_ns)) throw ValidationError("pulse duration must be positive");
  const double raw = duration_ns * sample_rate;
  const double n = std::round(raw);
  if (std::abs(raw - n) > 1e-9 * std::max(1.0, raw))
    throw ValidationError("pulse duration is not a whole number of samples");
  return static_cast<std::size_t>(n);
}

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

// Segment propagators and their spectral data for one pulse.
class PulseEvaluator {
 public:
  PulseEvaluator(const DeviceParams& p, double dt)
      : drift_(drift_hamiltonian(p)), gens_(control_generators(p)), kappa_(angular_from_mhz(1.0)), dt_(dt),
        dim_(p.dim()) {}

  void segment(const PulseSequence& pulse, std::size_t j) {
    MatX h = drift_;
    for (int c = 0; c < 4; ++c) {
      const double e = pulse.channels[c][j];
      if (e != 0.0) h += (kappa_ * e) * gens_[c];
    }
    solver_.compute(h);
  }

  const Eigen::VectorXd& eigenvalues() const { return solver_.eigenvalues(); }
  const MatX& eigenvectors() const { return solver_.eigenvectors(); }

  MatX segment_unitary() const {
    const auto& v = solver_.eigenvectors();
    VecX phases(dim_);
    for (int a = 0; a < dim_; ++a) phases(a) = std::exp(cd(0.0, -solver_.eigenvalues()(a) * dt_));
    return v * phases.asDiagonal() * v.adjoint();
  }

  const std::array<MatX, 4>& generators() const { return gens_; }
  double kappa() const { return kappa_; }
  double dt() const { return dt_; }
  int dim() const { return dim_; }

 private:
  MatX drift_;
  std::array<MatX, 4> gens_;
  double kappa_;
  double dt_;
  int dim_;
  Eigen::SelfAdjointEigenSolver<MatX> solver_;
};

struct PenaltyTerms {
  double value = 0.0;
  double per_amplitude = 0.0;  // d penalty / d eps = per_amplitude * eps
};

PenaltyTerms penalty_terms(const PulseSequence& pulse, const GrapeConfig& cfg) {
  const std::size_t n = pulse.samples();
  if (n == 0 || cfg.chi == 0.0) return {};
  double sum_sq = 0.0;
  for (const auto& ch : pulse.channels)
    for (double e : ch) sum_sq += e * e;
  const double scale = 1.0 / (static_cast<double>(n) * cfg.eps_cut * cfg.eps_cut);
  const double u = sum_sq * scale;  // normalized mean square
  const int m = cfg.penalty_exponent;
  const double um = std::pow(u, m);
  const double norm = cfg.chi / (std::exp(1.0) - 1.0);
  PenaltyTerms out;
  out.value = norm * std::expm1(um);
  out.per_amplitude = u > 0.0 ? norm * std::exp(um) * m * std::pow(u, m - 1) * 2.0 * scale : 0.0;
  return out;
}

Eigen::VectorXd flatten(const PulseSequence& pulse) {
  const std::size_t n = pulse.samples();
  Eigen::VectorXd x(4 * n);
  for (int c = 0; c < 4; ++c)
    for (std::size_t j = 0; j < n; ++j) x(c * n + j) = pulse.channels[c][j];
  return x;
}

void unflatten(const Eigen::VectorXd& x, PulseSequence& pulse) {
  const std::size_t n = pulse.samples();
  for (int c = 0; c < 4; ++c)
    for (std::size_t j = 0; j < n; ++j) pulse.channels[c][j] = x(c * n + j);
}

void check_target(const MatX& target, const DeviceParams& p) {
  if (target.rows() != p.dim() || target.cols() != p.dim())
    throw ValidationError("target dimension does not match the device");
}

}  // namespace

PulseSequence PulseSequence::zeros(double duration_ns, double sample_rate) {
  PulseSequence p;
  p.sample_rate = sample_rate;
  const std::size_t n = sample_count(duration_ns, sample_rate);
  for (auto& ch : p.channels) ch.assign(n, 0.0);
  return p;
}

void PulseSequence::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) throw ValidationError("sample rate must be positive");
  for (const auto& ch : channels) {
    if (ch.size() != channels[0].size()) throw ValidationError("pulse channels differ in length");
    for (double e : ch)
      if (!std::isfinite(e)) throw ValidationError("pulse amplitude is not finite");
  }
}

double PulseSequence::rms_amplitude() const {
  if (samples() == 0) return 0.0;
  double s = 0.0;
  for (const auto& ch : channels)
    for (double e : ch) s += e * e;
  return std::sqrt(s / static_cast<double>(samples()));
}

double PulseSequence::max_amplitude() const {
  double m = 0.0;
  for (const auto& ch : channels)
    for (double e : ch) m = std::max(m, std::abs(e));
  return m;
}

PulseSequence& PulseSequence::append(const PulseSequence& other) {
  if (samples() == 0) {
    *this = other;
    return *this;
  }
  if (other.sample_rate != sample_rate) throw ValidationError("cannot join pulses with different sample rates");
  for (int c = 0; c < 4; ++c) channels[c].insert(channels[c].end(), other.channels[c].begin(), other.channels[c].end());
  return *this;
}

void PulseSequence::write_csv(std::ostream& out) const {
  out << kCsvHeader << '\n' << std::setprecision(17);
  for (std::size_t j = 0; j < samples(); ++j) {
    out << static_cast<double>(j) / sample_rate;
    for (const auto& ch : channels) out << ',' << ch[j];
    out << '\n';
  }
}

PulseSequence PulseSequence::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("pulse CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ValidationError("pulse CSV has an unexpected header: " + line);
  PulseSequence p;
  std::vector<double> times;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    std::string cell;
    std::array<double, 5> v{};
    for (int i = 0; i < 5; ++i) {
      if (!std::getline(row, cell, ',')) throw ValidationError("pulse CSV row has too few columns");
      try {
        v[i] = std::stod(cell);
      } catch (const std::exception&) {
        throw ValidationError("pulse CSV has a malformed number: " + cell);
      }
    }
    times.push_back(v[0]);
    for (int c = 0; c < 4; ++c) p.channels[c].push_back(v[c + 1]);
  }
  if (times.size() >= 2) {
    const double span = times.back() - times.front();
    if (!(span > 0.0)) throw ValidationError("pulse CSV times are not increasing");
    double rate = static_cast<double>(times.size() - 1) / span;
    if (std::abs(rate - std::round(rate)) < 1e-9 * rate) rate = std::round(rate);
    p.sample_rate = rate;
  }
  p.validate();
  return p;
}

void GrapeConfig::validate() const {
  if (!(eps_cut > 0.0)) throw ValidationError("eps_cut must be positive");
  if (!(chi >= 0.0)) throw ValidationError("chi must be non-negative");
  if (penalty_exponent < 1) throw ValidationError("penalty exponent must be at least 1");
  if (max_iterations < 0) throw ValidationError("max_iterations must be non-negative");
  if (!(target_infidelity >= 0.0)) throw ValidationError("target infidelity must be non-negative");
  if (!(init_amplitude >= 0.0)) throw ValidationError("init amplitude must be non-negative");
  if (!(sample_rate > 0.0)) throw ValidationError("sample rate must be positive");
}

MatX propagate_pulse(const PulseSequence& pulse, const DeviceParams& p) {
  pulse.validate();
  if (pulse.samples() == 0) throw ValidationError("pulse is empty");
  PulseEvaluator ev(p, pulse.dt());
  MatX u = MatX::Identity(p.dim(), p.dim());
  for (std::size_t j = 0; j < pulse.samples(); ++j) {
    ev.segment(pulse, j);
    u = ev.segment_unitary() * u;
  }
  return u;
}

double gate_fidelity(const MatX& target, const MatX& realized) {
  if (target.rows() != realized.rows() || target.cols() != realized.cols())
    throw ValidationError("gate fidelity needs equal dimensions");
  const double f = std::abs((target.adjoint() * realized).trace()) / static_cast<double>(target.rows());
  return std::min(1.0, f);
}

double gate_fidelity(const EmbeddedTarget& target, const MatX& realized) {
  return gate_fidelity(target.unitary, realized);
}

double amplitude_penalty(const PulseSequence& pulse, const GrapeConfig& cfg) {
  cfg.validate();
  return penalty_terms(pulse, cfg).value;
}

double objective(const PulseSequence& pulse, const EmbeddedTarget& target, const DeviceParams& p,
                 const GrapeConfig& cfg) {
  check_target(target.unitary, p);
  const double f = gate_fidelity(target, propagate_pulse(pulse, p));
  return 1.0 - 0.5 * f * f + amplitude_penalty(pulse, cfg);
}

ObjectiveGradient objective_gradient(const PulseSequence& pulse, const EmbeddedTarget& target, const DeviceParams& p,
                                     const GrapeConfig& cfg) {
  cfg.validate();
  pulse.validate();
  check_target(target.unitary, p);
  const std::size_t n = pulse.samples();
  if (n == 0) throw ValidationError("pulse is empty");

  PulseEvaluator ev(p, pulse.dt());
  const int d = ev.dim();

  // Forward sweep: spectral data and partial products A_j = U_j ... U_1.
  std::vector<MatX> vecs(n), fwd(n + 1), seg(n);
  std::vector<Eigen::VectorXd> vals(n);
  fwd[0] = MatX::Identity(d, d);
  for (std::size_t j = 0; j < n; ++j) {
    ev.segment(pulse, j);
    vals[j] = ev.eigenvalues();
    vecs[j] = ev.eigenvectors();
    seg[j] = ev.segment_unitary();
    fwd[j + 1].noalias() = seg[j] * fwd[j];
  }

  const MatX wdag = target.unitary.adjoint();
  const cd z = (wdag * fwd[n]).trace();
  const double fid = std::min(1.0, std::abs(z) / d);
  const PenaltyTerms pen = penalty_terms(pulse, cfg);

  ObjectiveGradient out;
  out.fidelity = fid;
  out.penalty = pen.value;
  out.objective = 1.0 - 0.5 * (std::abs(z) / d) * (std::abs(z) / d) + pen.value;
  for (auto& g : out.gradient) g.assign(n, 0.0);

  const double dt = ev.dt();
  const cd prefactor = cd(0.0, -dt * ev.kappa());
  const cd zbar = std::conj(z) / static_cast<double>(d * d);
  const auto& gens = ev.generators();

  // Backward sweep with B_j = W^dagger U_N ... U_{j+1}.
  MatX back = wdag;
  MatX m(d, d), mt(d, d), q(d, d), r(d, d);
  for (std::size_t jj = n; jj-- > 0;) {
    const MatX& v = vecs[jj];
    const Eigen::VectorXd& lam = vals[jj];
    m.noalias() = fwd[jj] * back;
    mt.noalias() = v.adjoint() * m * v;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        const double sum = lam(a) + lam(b);
        const double diff = lam(a) - lam(b);
        q(a, b) = mt(b, a) * std::exp(cd(0.0, -0.5 * sum * dt)) * sinc(0.5 * diff * dt);
      }
    r.noalias() = v.conjugate() * q * v.transpose();
    for (int c = 0; c < 4; ++c) {
      const cd dz = prefactor * gens[c].cwiseProduct(r).sum();
      out.gradient[c][jj] = -(zbar * dz).real() + pen.per_amplitude * pulse.channels[c][jj];
    }
    back = back * seg[jj];
  }
  return out;
}

PulseSequence initial_pulse(double tau_ns, const GrapeConfig& cfg) {
  cfg.validate();
  PulseSequence p = PulseSequence::zeros(tau_ns, cfg.sample_rate);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> dist(-cfg.init_amplitude, cfg.init_amplitude);
  const std::size_t n = p.samples();
  for (auto& ch : p.channels) {
    std::vector<double> raw(n);
    for (auto& e : raw) e = dist(rng);
    for (std::size_t j = 0; j < n; ++j) {
      double s = raw[j];
      int k = 1;
      if (j > 0) s += raw[j - 1], ++k;
      if (j + 1 < n) s += raw[j + 1], ++k;
      ch[j] = s / k;
    }
  }
  return p;
}

OptimizationResult optimize_from(const EmbeddedTarget& target, PulseSequence start, const DeviceParams& p,
                                 const GrapeConfig& cfg) {
  cfg.validate();
  start.validate();
  check_target(target.unitary, p);
  if (start.samples() < 8) throw ValidationError("pulses need at least 8 samples");

  OptimizationResult res;
  res.pulse = std::move(start);
  PulseSequence work = res.pulse;
  double last_fidelity = 0.0;

  optim::Objective fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    unflatten(x, work);
    const ObjectiveGradient og = objective_gradient(work, target, p, cfg);
    const std::size_t n = work.samples();
    grad.resize(x.size());
    for (int c = 0; c < 4; ++c)
      for (std::size_t j = 0; j < n; ++j) grad(c * n + j) = og.gradient[c][j];
    last_fidelity = og.fidelity;
    return og.objective;
  };

  auto& report = res.report;
  Eigen::VectorXd x0 = flatten(res.pulse);
  Eigen::VectorXd g0;
  const double f0 = fn(x0, g0);
  report.objective_history.push_back(f0);
  const auto reached = [&] { return 1.0 - last_fidelity <= cfg.target_infidelity; };

  optim::LbfgsResult lr;
  if (reached() || cfg.max_iterations == 0) {
    lr.x = x0;
    lr.f = f0;
    lr.status = reached() ? optim::LbfgsStatus::Stopped : optim::LbfgsStatus::MaxIterations;
    lr.evaluations = 1;
  } else {
    optim::LbfgsOptions opt;
    opt.max_iterations = cfg.max_iterations;
    opt.gradient_tolerance = cfg.gradient_tolerance;
    optim::Monitor mon = [&](int, const Eigen::VectorXd&, double f) {
      report.objective_history.push_back(f);
      return reached();
    };
    lr = optim::minimize_lbfgs(fn, x0, opt, mon);
    lr.evaluations += 1;
  }

  unflatten(lr.x, res.pulse);
  report.iterations = lr.iterations;
  report.evaluations = lr.evaluations;
  report.final_objective = lr.f;
  report.final_gate_infidelity = std::clamp(1.0 - gate_fidelity(target, propagate_pulse(res.pulse, p)), 0.0, 1.0);
  report.converged = report.final_gate_infidelity <= cfg.target_infidelity;
  report.rms_amplitude = res.pulse.rms_amplitude();
  report.max_amplitude = res.pulse.max_amplitude();
  report.within_amplitude_threshold = report.max_amplitude < p.alpha_mhz / 20.0;
  switch (lr.status) {
    case optim::LbfgsStatus::Stopped: report.stop_reason = "target infidelity reached"; break;
    case optim::LbfgsStatus::GradientSmall: report.stop_reason = "gradient below tolerance"; break;
    case optim::LbfgsStatus::MaxIterations: report.stop_reason = "iteration limit"; break;
    case optim::LbfgsStatus::LineSearchFailed: report.stop_reason = "line search stalled"; break;
    case optim::LbfgsStatus::NoProgress: report.stop_reason = "no further progress"; break;
  }
  return res;
}

OptimizationResult optimize(const EmbeddedTarget& target, double tau_ns, const DeviceParams& p,
                            const GrapeConfig& cfg) {
  return optimize_from(target, initial_pulse(tau_ns, cfg), p, cfg);
}

std::string gate_kind(const Gate& g) {
  struct {
    std::string operator()(const U3Gate&) const { return "U3"; }
    std::string operator()(const CnotGate&) const { return "CNOT"; }
    std::string operator()(const RxxGate&) const { return "RXX"; }
    std::string operator()(const OpaqueGate&) const { return "UNITARY"; }
  } visitor;
  return std::visit(visitor, g);
}

Mat4 gate_target(const Gate& g) { return gate_matrix(g); }

std::vector<OptimizationResult> schedule_for_circuit(const Circuit& c, const GateDurations& per_gate_tau,
                                                     const DeviceParams& p, const GrapeConfig& cfg) {
  struct Entry {
    Mat4 unitary;
    double tau;
    std::size_t index;
  };
  for (const Gate& g : c.gates)
    if (!per_gate_tau.count(gate_kind(g))) throw ConfigError("no pulse length configured for gate kind " + gate_kind(g));

  std::vector<OptimizationResult> out;
  std::vector<Entry> cache;
  out.reserve(c.size());
  for (const Gate& g : c.gates) {
    const Mat4 u = gate_target(g);
    const double tau = per_gate_tau.at(gate_kind(g));
    const Entry* hit = nullptr;
    for (const Entry& e : cache)
      if (e.tau == tau && (e.unitary - u).cwiseAbs().maxCoeff() <= 1e-12) {
        hit = &e;
        break;
      }
    if (hit) {
      out.push_back(out[hit->index]);
      continue;
    }
    out.push_back(optimize(embed_target(u, p), tau, p, cfg));
    cache.push_back({u, tau, out.size() - 1});
  }
  return out;
}

}  // namespace adia
