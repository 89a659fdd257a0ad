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


#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "adia/experiment.hpp"

namespace py = pybind11;
using namespace adia;

namespace {

py::dict trajectory_dict(const Trajectory& t) {
  py::dict d;
  d["t_ns"] = t.times;
  d["fidelity"] = t.fidelities;
  d["energy"] = t.energies;
  d["states"] = t.states;
  return d;
}

py::list gate_list(const Circuit& c) {
  py::list out;
  for (const Gate& g : c.gates) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, U3Gate>)
            out.append(py::make_tuple("U3", x.qubit, x.theta, x.phi, x.lambda));
          else if constexpr (std::is_same_v<T, CnotGate>)
            out.append(py::make_tuple("CNOT", x.control, x.target));
          else if constexpr (std::is_same_v<T, RxxGate>)
            out.append(py::make_tuple("RXX", x.angle));
          else
            out.append(py::make_tuple("UNITARY", x.unitary));
        },
        g);
  }
  return out;
}

Eigen::MatrixXd channels_matrix(const PulseSequence& p) {
  Eigen::MatrixXd m(4, static_cast<Eigen::Index>(p.samples()));
  for (int c = 0; c < 4; ++c)
    for (std::size_t j = 0; j < p.samples(); ++j) m(c, static_cast<Eigen::Index>(j)) = p.channels[c][j];
  return m;
}

PulseSequence pulse_from(const Eigen::MatrixXd& m, double sample_rate) {
  if (m.rows() != 4) throw ValidationError("pulse array must have shape (4, samples)");
  PulseSequence p;
  p.sample_rate = sample_rate;
  for (int c = 0; c < 4; ++c) {
    p.channels[c].resize(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) p.channels[c][static_cast<std::size_t>(j)] = m(c, j);
  }
  p.validate();
  return p;
}

py::dict report_dict(const OptimizationReport& r) {
  py::dict d;
  d["iterations"] = r.iterations;
  d["evaluations"] = r.evaluations;
  d["objective"] = r.final_objective;
  d["gate_infidelity"] = r.final_gate_infidelity;
  d["rms_amplitude_mhz"] = r.rms_amplitude;
  d["max_amplitude_mhz"] = r.max_amplitude;
  d["converged"] = r.converged;
  d["stop_reason"] = r.stop_reason;
  d["objective_history"] = r.objective_history;
  return d;
}

}  // namespace

PYBIND11_MODULE(_adia, m) {
  m.doc() = "Adiabatic state preparation from Hamiltonians down to transmon pulses.";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<IntegrationError>(m, "IntegrationError", base.ptr());
  py::register_exception<MitigationError>(m, "MitigationError", base.ptr());

  m.def("angular_from_mhz", &angular_from_mhz);
  m.def("ht_matrix", [] { return build_ht().matrix(); }, "Target Hamiltonian as a 4x4 matrix.");
  m.def("h0_matrix", [] { return build_h0().matrix(); });
  m.def("target_ground_energy", &target_ground_energy);
  m.def("initial_state", &initial_state);

  py::enum_<NodeRule>(m, "NodeRule")
      .value("LEFT", NodeRule::Left)
      .value("MIDPOINT", NodeRule::Midpoint)
      .value("RIGHT", NodeRule::Right);

  py::class_<Schedule>(m, "Schedule")
      .def(py::init<double>(), py::arg("total_time_ns"))
      .def_readonly("total_time", &Schedule::total_time)
      .def("hamiltonian", [](const Schedule& s, double t) { return hamiltonian_at(s, t); })
      .def("ground_state", [](const Schedule& s, double t) { return ground_state_at(s, t); })
      .def("mixing", [](const Schedule& s, double t) {
        const Mixing mx = interpolate(s, t);
        return py::make_tuple(mx.f, mx.g);
      });

  py::class_<TrotterPlan>(m, "TrotterPlan")
      .def(py::init([](int steps, double total_time, NodeRule rule) { return TrotterPlan{steps, total_time, rule}; }),
           py::arg("steps"), py::arg("total_time"), py::arg("rule") = NodeRule::Midpoint)
      .def_readonly("steps", &TrotterPlan::steps)
      .def_readonly("total_time", &TrotterPlan::total_time)
      .def("node", &TrotterPlan::node)
      .def("end_time", &TrotterPlan::end_time);

  m.def("evolve_exact", [](const Schedule& s, double dt) { return trajectory_dict(evolve_exact(s, initial_state(), dt)); },
        py::arg("schedule"), py::arg("dt_fine"));
  m.def("trotter_evolve",
        [](const Schedule& s, const TrotterPlan& p) { return trajectory_dict(trotter_evolve(s, p, initial_state())); });
  m.def("short_time_propagator", &short_time_propagator);
  m.def("fidelity_pure", &fidelity_pure);

  m.def("decompose", [](const Mat4& u) { return gate_list(decompose_two_qubit(u)); },
        "Three-CNOT, eight-U3 circuit for a two-qubit unitary.");
  m.def("decomposition_unitary", [](const Mat4& u) { return circuit_unitary(decompose_two_qubit(u)); });
  m.def("adiabatic_circuit", [](const Schedule& s, const TrotterPlan& p) { return gate_list(build_adiabatic_circuit(s, p)); });

  py::class_<DeviceParams>(m, "DeviceParams")
      .def(py::init<>())
      .def_readwrite("alpha_mhz", &DeviceParams::alpha_mhz)
      .def_readwrite("coupling_mhz", &DeviceParams::coupling_mhz)
      .def_readwrite("levels", &DeviceParams::levels)
      .def("set_noise", [](DeviceParams& p, std::array<double, 2> t1_us, std::array<double, 2> t2_us) {
        p.noise.t1_us = t1_us;
        p.noise.t2_us = t2_us;
        p.noise.validate();
      });
  m.def("drift_hamiltonian", &drift_hamiltonian);

  py::class_<GrapeConfig>(m, "GrapeConfig")
      .def(py::init<>())
      .def_readwrite("eps_cut", &GrapeConfig::eps_cut)
      .def_readwrite("penalty_exponent", &GrapeConfig::penalty_exponent)
      .def_readwrite("chi", &GrapeConfig::chi)
      .def_readwrite("max_iterations", &GrapeConfig::max_iterations)
      .def_readwrite("target_infidelity", &GrapeConfig::target_infidelity)
      .def_readwrite("seed", &GrapeConfig::seed)
      .def_readwrite("sample_rate", &GrapeConfig::sample_rate);

  m.def(
      "optimize_pulse",
      [](const Mat4& target, double tau, const DeviceParams& p, const GrapeConfig& cfg) {
        OptimizationResult r;
        {
          py::gil_scoped_release release;
          r = optimize(embed_target(target, p), tau, p, cfg);
        }
        return py::make_tuple(channels_matrix(r.pulse), report_dict(r.report));
      },
      py::arg("target"), py::arg("tau_ns"), py::arg("device") = DeviceParams{}, py::arg("config") = GrapeConfig{},
      "Returns (channels with shape (4, samples) in MHz, report).");
  m.def(
      "propagate_pulse",
      [](const Eigen::MatrixXd& channels, double sample_rate, const DeviceParams& p) {
        return propagate_pulse(pulse_from(channels, sample_rate), p);
      },
      py::arg("channels"), py::arg("sample_rate") = 8.0, py::arg("device") = DeviceParams{});
  m.def(
      "evolve_density",
      [](const MatX& rho, const Eigen::MatrixXd& channels, double sample_rate, const DeviceParams& p) {
        return evolve_density(DensityMatrix{rho}, pulse_from(channels, sample_rate), p).rho;
      },
      py::arg("rho"), py::arg("channels"), py::arg("sample_rate") = 8.0, py::arg("device") = DeviceParams{});

  const auto readout = [](std::array<double, 2> p01, std::array<double, 2> p10) {
    ReadoutModel r;
    for (int q = 0; q < 2; ++q) r.qubits[q] = {p01[q], p10[q]};
    r.validate();
    return r;
  };
  m.def(
      "confusion_matrix",
      [readout](std::array<double, 2> p01, std::array<double, 2> p10) { return readout(p01, p10).confusion().matrix; },
      py::arg("p01"), py::arg("p10"));
  m.def(
      "sample_counts",
      [readout](const Eigen::Vector4d& probs, std::uint64_t shots, std::array<double, 2> p01,
                std::array<double, 2> p10, std::uint64_t seed) {
        return sample_counts(probs, shots, readout(p01, p10), seed).n;
      },
      py::arg("probabilities"), py::arg("shots"), py::arg("p01") = std::array<double, 2>{0.0, 0.0},
      py::arg("p10") = std::array<double, 2>{0.0, 0.0}, py::arg("seed") = 0);
  m.def("mitigate", [](const Eigen::Vector4d& measured, const Eigen::Matrix4d& confusion) {
    ConfusionMatrix c;
    c.matrix = confusion;
    c.validate();
    return mitigate(measured, c).probabilities;
  });
  m.def("estimate_ht", [](const Eigen::Vector4d& z, const Eigen::Vector4d& x, const Eigen::Vector4d& y) {
    return estimate_ht(Probabilities(z), Probabilities(x), Probabilities(y));
  });
  m.def("rotated_probabilities", [](const Vec4& psi, const std::string& axes) {
    if (axes.size() != 2) throw ValidationError("axes must name two of X, Y, Z, e.g. \"XX\"");
    const auto axis = [](char c) {
      switch (c) {
        case 'X': return MeasurementAxis::X;
        case 'Y': return MeasurementAxis::Y;
        case 'Z': return MeasurementAxis::Z;
      }
      throw ValidationError("unknown axis");
    };
    return rotated_probabilities(psi, {axis(axes[0]), axis(axes[1])});
  });

  m.def(
      "run",
      [](const std::string& command, const std::string& config_text, const std::filesystem::path& out) {
        const ExperimentConfig cfg = parse_config(config_text);
        CommandResult r;
        {
          py::gil_scoped_release release;
          if (command == "exact-evolve") r = cmd_exact_evolve(cfg, out);
          else if (command == "grape-synth") r = cmd_grape_synth(cfg, out);
          else if (command == "device-sim") r = cmd_device_sim(cfg, out);
          else if (command == "tomography") r = cmd_tomography(cfg, out);
          else if (command == "error-study") r = cmd_error_study(cfg, out);
          else throw ConfigError("unknown command " + command);
          write_manifest(out, command, fnv1a64(config_text), cfg.seed, r.files);
        }
        if (r.numerical_failure) throw IntegrationError(r.message);
        return r.files;
      },
      py::arg("command"), py::arg("config_text"), py::arg("out_dir"),
      "Runs one CLI command in-process; returns the files written.");
}
