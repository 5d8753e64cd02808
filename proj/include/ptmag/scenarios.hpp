#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ptmag/config.hpp"
#include "ptmag/dynamics.hpp"
#include "ptmag/spectrum.hpp"

namespace ptmag {

struct ScenarioInfo {
    std::string name;
    std::string description;
    /// Sweep axis accepted by the scenario; empty when it takes none.
    std::string sweep_variable;
};

const std::vector<ScenarioInfo>& scenario_registry();
const ScenarioInfo& scenario_info(const std::string& name);

struct ScenarioReport {
    std::string scenario;
    std::string config_echo;  // JSON
    std::vector<std::string> outputs;
    std::map<std::string, double> summary;
    std::vector<ExceptionalPoint> exceptional_points;
    double runtime_s = 0.0;
};

/// Runs the named scenario, writes its CSVs and report.json into
/// cfg.output_dir (created if needed).
ScenarioReport run_scenario(const ScenarioConfig& cfg);

struct DisorderResult {
    double mean_fidelity = 0.0;
    double mean_coherence = 0.0;
    std::vector<double> u;  // drawn deviates
    std::vector<double> fidelity;
    std::vector<double> coherence;
};

/// Evolves cfg.samples copies of |00n>, n = min(3, cutoff), with
/// g' = g (1 + u_i) to t_final and averages F(phi_n) and C. u_i = delta * v_i
/// with v_i uniform on [-1, 1) from mt19937_64(cfg.rng_seed), so every delta
/// reuses the same v_i and delta = 0 reproduces the unperturbed run.
DisorderResult disorder_sample(const ScenarioConfig& cfg, double delta);

/// First time the fidelity to target `index` reaches `level`, linearly
/// interpolated between records; NaN when never reached.
double time_to_fidelity(const Trajectory& traj, std::size_t index, double level);

/// Population standard deviation of the fidelity to target `index` over the
/// records with t0 <= t <= t1.
double fidelity_std(const Trajectory& traj, std::size_t index, double t0, double t1);

}  // namespace ptmag
