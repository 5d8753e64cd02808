#include <map>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ptmag/config.hpp"
#include "ptmag/dynamics.hpp"
#include "ptmag/error.hpp"
#include "ptmag/metrics.hpp"
#include "ptmag/model.hpp"
#include "ptmag/scenarios.hpp"
#include "ptmag/spectrum.hpp"

namespace py = pybind11;
using namespace ptmag;

namespace {

Occupation occupation(const std::array<int, 3>& n) { return {n[0], n[1], n[2]}; }

KetState ket(int cutoff, const Vector& amplitudes) { return KetState(make_basis(cutoff), amplitudes); }

py::dict to_dict(const Trajectory& t) {
    py::dict out;
    py::list fid, coh, trace, mean_n, purity;
    for (const auto& r : t.records) {
        fid.append(r.fidelity);
        coh.append(r.coherence);
        trace.append(r.trace);
        mean_n.append(r.mean_N);
        purity.append(r.purity);
    }
    out["targets"] = t.target_labels;
    out["t_us"] = t.times;
    out["fidelity"] = fid;
    out["coherence"] = coh;
    out["trace"] = trace;
    out["mean_N"] = mean_n;
    out["purity"] = purity;
    out["final_rho"] = t.final_rho.elements();
    return out;
}

std::vector<NamedTarget> targets_of(const BasisPtr& basis, const std::map<std::string, Vector>& targets) {
    std::vector<NamedTarget> out;
    for (const auto& [label, v] : targets) out.push_back({label, KetState(basis, v)});
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "PT-symmetric magnon-photon simulator";

    auto base = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init<>())
        .def_readwrite("nu_a", &ModelParams::nu_a)
        .def_readwrite("nu_b", &ModelParams::nu_b)
        .def_readwrite("nu_c", &ModelParams::nu_c)
        .def_readwrite("g", &ModelParams::g)
        .def_readwrite("r", &ModelParams::r)
        .def_readwrite("phi", &ModelParams::phi)
        .def_readwrite("theta", &ModelParams::theta)
        .def_readwrite("kappa_a", &ModelParams::kappa_a)
        .def_readwrite("kappa_b", &ModelParams::kappa_b)
        .def_readwrite("gamma_m", &ModelParams::gamma_m)
        .def_readwrite("frame_nu", &ModelParams::frame_nu)
        .def_property("delta", &ModelParams::delta, &ModelParams::set_delta)
        .def("validate", &ModelParams::validate)
        .def("__eq__", [](const ModelParams& a, const ModelParams& b) { return a == b; })
        .def("__repr__", [](const ModelParams& p) {
            return "ModelParams(nu_a=" + std::to_string(p.nu_a) + ", nu_b=" + std::to_string(p.nu_b) +
                   ", nu_c=" + std::to_string(p.nu_c) + ", g=" + std::to_string(p.g) + ", r=" + std::to_string(p.r) +
                   ", phi=" + std::to_string(p.phi) + ", theta=" + std::to_string(p.theta) + ")";
        });
    m.def("canonical_params", &canonical_params);

    m.def("basis_states", [](int cutoff) {
        const auto b = make_basis(cutoff);
        std::vector<std::array<int, 3>> out;
        for (const auto& s : b->states()) out.push_back({s.a, s.b, s.c});
        return out;
    }, py::arg("cutoff"), "Occupations (n_a, n_b, n_c) in basis order.");

    m.def("hamiltonian", [](const ModelParams& p, int cutoff, bool frame) {
        return build_hamiltonian(p, make_basis(cutoff), frame).elements;
    }, py::arg("params"), py::arg("cutoff"), py::arg("frame") = true, "H in rad/us.");
    m.def("single_excitation_matrix", [](const ModelParams& p) { return Matrix(single_excitation_matrix(p)); });
    m.def("analytic_eigenvalues", [](const ModelParams& p) { return analytic_eigenvalues(p).omega; });
    m.def("numeric_eigenvalues", [](const Eigen::Matrix3cd& mat) { return numeric_eigenvalues(mat).omega; });
    m.def("classify_phase", [](const ModelParams& p, double eps) {
        return phase_name(classify_phase(analytic_eigenvalues(p), eps > 0.0 ? eps : default_epsilon_im(p)).phase);
    }, py::arg("params"), py::arg("epsilon_im") = 0.0);
    m.def("find_exceptional_points", [](const ModelParams& p, double lo, double hi, double step) {
        std::vector<double> out;
        for (const auto& e : find_exceptional_points(p, lo, hi, step)) out.push_back(e.delta_star);
        return out;
    }, py::arg("params"), py::arg("delta_min"), py::arg("delta_max"), py::arg("step") = 0.01);

    m.def("target_state", [](int cutoff, int n, double theta) {
        return target_state(make_basis(cutoff), n, theta).amplitudes();
    }, py::arg("cutoff"), py::arg("n"), py::arg("theta"));
    m.def("gain_mode_state", [](const ModelParams& p, int cutoff, int n) {
        return gain_mode_state(p, make_basis(cutoff), n).amplitudes();
    }, py::arg("params"), py::arg("cutoff"), py::arg("n"));
    m.def("fock_state", [](int cutoff, std::array<int, 3> n) {
        const auto b = make_basis(cutoff);
        Vector v = Vector::Zero(static_cast<Eigen::Index>(b->size()));
        v[static_cast<Eigen::Index>(b->index_of(occupation(n)))] = 1.0;
        return v;
    }, py::arg("cutoff"), py::arg("occupation"));

    m.def("fidelity", [](int cutoff, const Matrix& rho, const Vector& target) {
        return fidelity(DensityMatrix(make_basis(cutoff), rho), ket(cutoff, target));
    }, py::arg("cutoff"), py::arg("rho"), py::arg("target"));
    m.def("collective_coherence", [](int cutoff, const Matrix& rho, bool truncated) {
        return collective_coherence(DensityMatrix(make_basis(cutoff), rho),
                                    truncated ? CoherenceSpace::truncated : CoherenceSpace::product);
    }, py::arg("cutoff"), py::arg("rho"), py::arg("truncated") = false);
    m.def("von_neumann_entropy", [](const Matrix& rho) { return von_neumann_entropy(rho); });

    m.def("evolve", [](const ModelParams& p, int cutoff, const Matrix& initial, double t_final, double dt,
                       int record_stride, const std::map<std::string, Vector>& targets, bool record_coherence) {
        const auto basis = make_basis(cutoff);
        EvolutionConfig cfg;
        cfg.t_final = t_final;
        cfg.dt = dt;
        cfg.record_stride = record_stride;
        cfg.record_coherence = record_coherence;
        const auto named = targets_of(basis, targets);
        std::optional<Trajectory> t;
        {
            py::gil_scoped_release release;
            t = initial.cols() == 1 ? evolve(KetState(basis, initial.col(0)), p, cfg, named)
                                    : evolve(DensityMatrix(basis, initial), p, cfg, named);
        }
        return to_dict(*t);
    }, py::arg("params"), py::arg("cutoff"), py::arg("initial"), py::arg("t_final") = 0.2, py::arg("dt") = 1e-5,
       py::arg("record_stride") = 100, py::arg("targets") = std::map<std::string, Vector>{},
       py::arg("record_coherence") = true,
       "Evolves a state vector (1-column) or density matrix; returns observables.");

    m.def("scenario_names", [] {
        std::vector<std::string> out;
        for (const auto& s : scenario_registry()) out.push_back(s.name);
        return out;
    });
    m.def("default_config", [](const std::string& name) { return config_to_json(default_config(name)); },
          "Scenario defaults as JSON text.");
    m.def("validate_config", [](const std::string& text) { return config_to_json(parse_config(text)); },
          "Parses a JSON config and returns it fully defaulted.");
    m.def("run_scenario", [](const std::string& text) {
        const ScenarioConfig cfg = parse_config(text);
        ScenarioReport rep;
        {
            py::gil_scoped_release release;
            rep = run_scenario(cfg);
        }
        py::dict out;
        out["scenario"] = rep.scenario;
        out["outputs"] = rep.outputs;
        out["summary"] = rep.summary;
        out["runtime_s"] = rep.runtime_s;
        return out;
    }, py::arg("config_json"), "Runs a scenario from JSON text; files go to its output_dir.");
}
