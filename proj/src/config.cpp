#include "ptmag/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ptmag/error.hpp"
#include "ptmag/scenarios.hpp"

namespace ptmag {

using json = nlohmann::json;

std::vector<double> SweepSpec::values() const {
    std::vector<double> v;
    if (steps == 1) return {min};
    for (int i = 0; i < steps; ++i) v.push_back(min + (max - min) * static_cast<double>(i) / (steps - 1));
    return v;
}

ScenarioConfig default_config(const std::string& scenario) {
    const ScenarioInfo& info = scenario_info(scenario);
    ScenarioConfig c;
    c.scenario = info.name;
    c.params = canonical_params();
    c.cutoff = 3;
    if (scenario == "spectrum2") {
        c.params.g = 70.0;
        c.cutoff = 1;
        c.sweep = SweepSpec{"delta", -3.0, 3.0, 121};
    } else if (scenario == "populations3" || scenario == "coherence4") {
        c.cutoff = 1;
    } else if (scenario == "epscan7") {
        c.sweep = SweepSpec{"delta", -4.0, 4.0, 161};
    } else if (scenario == "nscaling8") {
        c.cutoff = 6;
    } else if (scenario == "decay9") {
        c.sweep = SweepSpec{"gamma_ratio", 0.0, 0.2, 21};
    } else if (scenario == "purity11") {
        c.sweep = SweepSpec{"p", 0.0, 1.0, 21};
        c.weights = {0.25, 0.25, 0.25, 0.25};
        c.evolution.record_stride = 10;
        c.evolution.record_coherence = false;
    } else if (scenario == "disorder12") {
        c.sweep = SweepSpec{"disorder", 0.0, 1.0, 11};
        c.evolution.record_coherence = false;
    }
    return c;
}

namespace {

std::size_t line_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

double number(const json& j, const std::string& key) {
    if (!j.is_number()) throw ConfigError(key, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
    return v;
}

double non_negative(const json& j, const std::string& key) {
    const double v = number(j, key);
    if (v < 0.0) throw ConfigError(key, "must be non-negative");
    return v;
}

double positive(const json& j, const std::string& key) {
    const double v = number(j, key);
    if (!(v > 0.0)) throw ConfigError(key, "must be positive");
    return v;
}

long long integer(const json& j, const std::string& key) {
    if (!j.is_number_integer()) throw ConfigError(key, "expected an integer");
    return j.get<long long>();
}

bool boolean(const json& j, const std::string& key) {
    if (!j.is_boolean()) throw ConfigError(key, "expected true or false");
    return j.get<bool>();
}

std::string text_value(const json& j, const std::string& key) {
    if (!j.is_string()) throw ConfigError(key, "expected a string");
    return j.get<std::string>();
}

const std::set<std::string> kKnownKeys = {
    "scenario",     "cutoff",         "nu_a_mhz",         "nu_b_mhz",        "nu_c_mhz",
    "g_mhz",        "r_mhz",          "phi_rad",          "theta_rad",       "kappa_a_mhz",
    "kappa_b_mhz",  "gamma_m_mhz",    "frame_nu_mhz",     "dt_us",           "t_final_us",
    "record_stride", "renormalize_trace", "hermitize",    "frame",           "record_coherence",
    "coherence_space", "sweep_variable", "sweep_min",     "sweep_max",       "sweep_steps",
    "rng_seed",     "samples",        "output_dir",       "weights",
};

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", "JSON syntax error at line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("", "top level must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!kKnownKeys.count(key)) throw ConfigError(key, "unknown key");
    if (!j.contains("scenario")) throw ConfigError("scenario", "required key missing");

    const std::string name = text_value(j["scenario"], "scenario");
    bool known = false;
    for (const auto& info : scenario_registry()) known = known || info.name == name;
    if (!known) throw ConfigError("scenario", "unknown scenario '" + name + "'");
    ScenarioConfig c = default_config(name);

    auto has = [&](const char* k) { return j.contains(k); };
    if (has("cutoff")) {
        const auto v = integer(j["cutoff"], "cutoff");
        if (v < 1 || v > 12) throw ConfigError("cutoff", "must be in 1..12");
        c.cutoff = static_cast<int>(v);
    }
    ModelParams& p = c.params;
    if (has("nu_a_mhz")) p.nu_a = non_negative(j["nu_a_mhz"], "nu_a_mhz");
    if (has("nu_b_mhz")) p.nu_b = non_negative(j["nu_b_mhz"], "nu_b_mhz");
    if (has("nu_c_mhz")) p.nu_c = non_negative(j["nu_c_mhz"], "nu_c_mhz");
    if (has("g_mhz")) p.g = non_negative(j["g_mhz"], "g_mhz");
    if (has("r_mhz")) p.r = non_negative(j["r_mhz"], "r_mhz");
    if (has("phi_rad")) p.phi = number(j["phi_rad"], "phi_rad");
    if (has("theta_rad")) p.theta = number(j["theta_rad"], "theta_rad");
    if (has("kappa_a_mhz")) p.kappa_a = non_negative(j["kappa_a_mhz"], "kappa_a_mhz");
    if (has("kappa_b_mhz")) p.kappa_b = non_negative(j["kappa_b_mhz"], "kappa_b_mhz");
    if (has("gamma_m_mhz")) p.gamma_m = non_negative(j["gamma_m_mhz"], "gamma_m_mhz");
    if (has("frame_nu_mhz")) {
        if (j["frame_nu_mhz"].is_null()) p.frame_nu.reset();
        else p.frame_nu = non_negative(j["frame_nu_mhz"], "frame_nu_mhz");
    }

    EvolutionConfig& e = c.evolution;
    if (has("dt_us")) e.dt = positive(j["dt_us"], "dt_us");
    if (has("t_final_us")) e.t_final = positive(j["t_final_us"], "t_final_us");
    if (e.t_final < e.dt) throw ConfigError("t_final_us", "must be at least dt_us");
    if (has("record_stride")) {
        const auto v = integer(j["record_stride"], "record_stride");
        if (v < 1) throw ConfigError("record_stride", "must be >= 1");
        e.record_stride = static_cast<int>(v);
    }
    if (has("renormalize_trace")) e.renormalize_trace = boolean(j["renormalize_trace"], "renormalize_trace");
    if (has("hermitize")) e.hermitize = boolean(j["hermitize"], "hermitize");
    if (has("frame")) e.frame = boolean(j["frame"], "frame");
    if (has("record_coherence")) e.record_coherence = boolean(j["record_coherence"], "record_coherence");
    if (has("coherence_space")) {
        const std::string s = text_value(j["coherence_space"], "coherence_space");
        if (s == "product") e.coherence_space = CoherenceSpace::product;
        else if (s == "truncated") e.coherence_space = CoherenceSpace::truncated;
        else throw ConfigError("coherence_space", "expected 'product' or 'truncated'");
    }

    const bool any_sweep = has("sweep_variable") || has("sweep_min") || has("sweep_max") || has("sweep_steps");
    if (any_sweep) {
        const ScenarioInfo& info = scenario_info(name);
        SweepSpec s = c.sweep.value_or(SweepSpec{info.sweep_variable, 0.0, 0.0, 1});
        if (has("sweep_variable")) s.variable = text_value(j["sweep_variable"], "sweep_variable");
        if (s.variable.empty() || s.variable != info.sweep_variable)
            throw ConfigError("sweep_variable", "scenario " + name + " accepts " +
                                                    (info.sweep_variable.empty() ? std::string("no sweep")
                                                                                 : "only '" + info.sweep_variable + "'"));
        if (has("sweep_min")) s.min = number(j["sweep_min"], "sweep_min");
        if (has("sweep_max")) s.max = number(j["sweep_max"], "sweep_max");
        if (has("sweep_steps")) {
            const auto v = integer(j["sweep_steps"], "sweep_steps");
            if (v < 1 || v > 100000) throw ConfigError("sweep_steps", "must be in 1..100000");
            s.steps = static_cast<int>(v);
        }
        if (s.max < s.min) throw ConfigError("sweep_max", "must be >= sweep_min");
        c.sweep = s;
    }
    if (c.sweep) {
        if (c.sweep->variable == "p" && c.sweep->min < 0.0)
            throw ConfigError("sweep_min", "purity sweep must stay inside [0, 1]");
        if (c.sweep->variable == "p" && c.sweep->max > 1.0)
            throw ConfigError("sweep_max", "purity sweep must stay inside [0, 1]");
        if ((c.sweep->variable == "disorder" || c.sweep->variable == "gamma_ratio") && c.sweep->min < 0.0)
            throw ConfigError("sweep_min", "must be non-negative for " + c.sweep->variable);
        if (c.sweep->variable == "disorder" && c.sweep->max > 1.0)
            throw ConfigError("sweep_max", "disorder must not exceed 1");
    }

    if (has("rng_seed")) {
        const json& s = j["rng_seed"];
        if (s.is_number_unsigned()) c.rng_seed = s.get<std::uint64_t>();
        else if (s.is_number_integer() && s.get<long long>() >= 0) c.rng_seed = static_cast<std::uint64_t>(s.get<long long>());
        else throw ConfigError("rng_seed", "expected a non-negative integer");
    }
    if (has("samples")) {
        const auto v = integer(j["samples"], "samples");
        if (v < 1) throw ConfigError("samples", "must be >= 1");
        c.samples = static_cast<int>(v);
    }
    if (has("output_dir")) c.output_dir = text_value(j["output_dir"], "output_dir");
    if (has("weights")) {
        if (!j["weights"].is_array()) throw ConfigError("weights", "expected an array of numbers");
        c.weights.clear();
        for (const auto& w : j["weights"]) c.weights.push_back(non_negative(w, "weights"));
        double sum = 0.0;
        for (double w : c.weights) sum += w;
        if (!c.weights.empty() && std::abs(sum - 1.0) > 1e-10) throw ConfigError("weights", "must sum to 1");
    }

    try {
        p.validate();
    } catch (const DomainError& err) {
        throw ConfigError("", err.what());
    }
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const ScenarioConfig& c, int indent) {
    json j;
    j["scenario"] = c.scenario;
    j["cutoff"] = c.cutoff;
    const ModelParams& p = c.params;
    j["nu_a_mhz"] = p.nu_a;
    j["nu_b_mhz"] = p.nu_b;
    j["nu_c_mhz"] = p.nu_c;
    j["g_mhz"] = p.g;
    j["r_mhz"] = p.r;
    j["phi_rad"] = p.phi;
    j["theta_rad"] = p.theta;
    j["kappa_a_mhz"] = p.kappa_a;
    j["kappa_b_mhz"] = p.kappa_b;
    j["gamma_m_mhz"] = p.gamma_m;
    j["frame_nu_mhz"] = p.frame_nu ? json(*p.frame_nu) : json(nullptr);
    const EvolutionConfig& e = c.evolution;
    j["dt_us"] = e.dt;
    j["t_final_us"] = e.t_final;
    j["record_stride"] = e.record_stride;
    j["renormalize_trace"] = e.renormalize_trace;
    j["hermitize"] = e.hermitize;
    j["frame"] = e.frame;
    j["record_coherence"] = e.record_coherence;
    j["coherence_space"] = e.coherence_space == CoherenceSpace::product ? "product" : "truncated";
    if (c.sweep) {
        j["sweep_variable"] = c.sweep->variable;
        j["sweep_min"] = c.sweep->min;
        j["sweep_max"] = c.sweep->max;
        j["sweep_steps"] = c.sweep->steps;
    }
    j["rng_seed"] = c.rng_seed;
    j["samples"] = c.samples;
    j["output_dir"] = c.output_dir;
    j["weights"] = c.weights;
    return j.dump(indent);
}

}  // namespace ptmag
