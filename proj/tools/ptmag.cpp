// ptmag command-line front end.
//
//   ptmag run <config.json>
//   ptmag spectrum --g <MHz> --r <MHz> --phi <rad> --delta-min <x> --delta-max <x> --steps <n> --out <dir>
//   ptmag list-scenarios
//   ptmag validate <config.json>
//
// Exit codes: 0 success, 1 configuration error, 2 numerical abort.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "ptmag/config.hpp"
#include "ptmag/error.hpp"
#include "ptmag/scenarios.hpp"
#include "ptmag/spectrum.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kNumericalError = 2;

int run(const std::string& path) {
    const ptmag::ScenarioConfig cfg = ptmag::load_config(path);
    const ptmag::ScenarioReport rep = ptmag::run_scenario(cfg);
    std::cout << rep.scenario << " finished in " << rep.runtime_s << " s\n";
    for (const auto& [key, value] : rep.summary) std::cout << "  " << key << " = " << value << '\n';
    for (const auto& ep : rep.exceptional_points)
        std::cout << "  EP: g = " << ep.g << " MHz, delta* = " << ep.delta_star << '\n';
    for (const auto& out : rep.outputs) std::cout << "  wrote " << out << '\n';
    return 0;
}

int spectrum(double g, double r, double phi, double dmin, double dmax, int steps, const std::string& out) {
    if (!(dmax > dmin)) throw ptmag::ConfigError("delta-max", "must exceed --delta-min");
    if (steps < 2) throw ptmag::ConfigError("steps", "must be >= 2");
    if (!(g > 0.0)) throw ptmag::ConfigError("g", "must be positive");
    ptmag::ModelParams p = ptmag::canonical_params();
    p.g = g;
    p.r = r;
    p.phi = phi;
    p.nu_b = p.nu_a;

    std::filesystem::create_directories(out);
    const ptmag::PhaseDiagram d = ptmag::sweep_phase_diagram(p, g, g, 1, dmin, dmax, steps);
    const auto csv = std::filesystem::path(out) / "spectrum.csv";
    std::ofstream os(csv);
    if (!os) throw ptmag::ConfigError("out", "cannot write " + csv.string());
    ptmag::write_phase_diagram_csv(os, d);

    const auto eps = ptmag::find_exceptional_points(p, dmin, dmax, (dmax - dmin) / (steps - 1));
    const auto ep_csv = std::filesystem::path(out) / "exceptional_points.csv";
    std::ofstream es(ep_csv);
    es.precision(12);
    es << "g_over_2pi_MHz,delta_star,bracket_width\n";
    for (const auto& ep : eps) es << ep.g << ',' << ep.delta_star << ',' << ep.bracket_width << '\n';

    for (const auto& ep : eps) std::cout << "EP at delta = " << ep.delta_star << '\n';
    std::cout << "wrote " << csv.string() << "\nwrote " << ep_csv.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PT-symmetric magnon-photon simulator"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "run a scenario from a JSON config");
    run_cmd->add_option("config", config_path, "config file")->required();

    auto* validate_cmd = app.add_subcommand("validate", "parse a config and echo it with defaults applied");
    validate_cmd->add_option("config", config_path, "config file")->required();

    app.add_subcommand("list-scenarios", "list registered scenarios");

    double g = 70.0, r = 50.0, phi = 3.141592653589793, dmin = -3.0, dmax = 3.0;
    int steps = 601;
    std::string out = ".";
    auto* spec_cmd = app.add_subcommand("spectrum", "single-excitation spectrum over the detuning delta");
    spec_cmd->add_option("--g", g, "magnon-photon coupling g/2pi (MHz)");
    spec_cmd->add_option("--r", r, "photon-photon coupling r/2pi (MHz)");
    spec_cmd->add_option("--phi", phi, "coupling phase (rad)");
    spec_cmd->add_option("--delta-min", dmin, "sweep start");
    spec_cmd->add_option("--delta-max", dmax, "sweep end");
    spec_cmd->add_option("--steps", steps, "grid points");
    spec_cmd->add_option("--out", out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (run_cmd->parsed()) return run(config_path);
        if (validate_cmd->parsed()) {
            std::cout << ptmag::config_to_json(ptmag::load_config(config_path)) << '\n';
            return 0;
        }
        if (spec_cmd->parsed()) return spectrum(g, r, phi, dmin, dmax, steps, out);
        for (const auto& info : ptmag::scenario_registry()) {
            std::cout << info.name << "\t" << info.description;
            if (!info.sweep_variable.empty()) std::cout << " [sweep: " << info.sweep_variable << "]";
            std::cout << '\n';
        }
        return 0;
    } catch (const ptmag::ConfigError& e) {
        std::cerr << "ptmag: config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ptmag::DomainError& e) {
        std::cerr << "ptmag: invalid input: " << e.what() << '\n';
        return kConfigError;
    } catch (const ptmag::NumericalError& e) {
        std::cerr << "ptmag: numerical error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "ptmag: " << e.what() << '\n';
        return kConfigError;
    }
}
