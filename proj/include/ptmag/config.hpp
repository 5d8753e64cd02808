#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ptmag/dynamics.hpp"
#include "ptmag/model.hpp"

namespace ptmag {

struct SweepSpec {
    std::string variable;
    double min = 0.0;
    double max = 0.0;
    int steps = 1;

    std::vector<double> values() const;
    bool operator==(const SweepSpec&) const = default;
};

struct ScenarioConfig {
    std::string scenario;
    ModelParams params;
    int cutoff = 1;
    EvolutionConfig evolution;
    std::optional<SweepSpec> sweep;
    std::uint64_t rng_seed = 12345;
    int samples = 51;
    std::string output_dir = "ptmag-out";
    /// Scenario-specific mixture weights (purity11: p_0..p_3 of panel b).
    std::vector<double> weights;

    bool operator==(const ScenarioConfig&) const = default;
};

/// Defaults for a registered scenario: canonical parameters plus the
/// scenario's own cutoff, sweep and evolution settings. Throws ConfigError
/// for unknown names.
ScenarioConfig default_config(const std::string& scenario);

/// Parses a flat JSON object. Keys (units in the suffix):
///   scenario, cutoff, nu_a_mhz, nu_b_mhz, nu_c_mhz, g_mhz, r_mhz, phi_rad,
///   theta_rad, kappa_a_mhz, kappa_b_mhz, gamma_m_mhz, frame_nu_mhz, dt_us,
///   t_final_us, record_stride, renormalize_trace, hermitize, frame,
///   record_coherence, coherence_space, sweep_variable, sweep_min, sweep_max,
///   sweep_steps, rng_seed, samples, output_dir, weights
/// Omitted keys take the scenario defaults. Errors are ConfigError naming the
/// key (or the line for syntax errors).
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);

/// Full config as JSON; parse_config(config_to_json(c)) == c.
std::string config_to_json(const ScenarioConfig& c, int indent = 2);

}  // namespace ptmag
