#include "ptmag/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"

#include "ptmag/error.hpp"
#include "ptmag/metrics.hpp"
#include "ptmag/parallel.hpp"

namespace ptmag {

namespace fs = std::filesystem;

const std::vector<ScenarioInfo>& scenario_registry() {
    static const std::vector<ScenarioInfo> registry = {
        {"spectrum2", "single-excitation eigenvalue surfaces over (g, delta) and exceptional points", "delta"},
        {"populations3", "N=1 population dynamics from |001> toward phi1", ""},
        {"coherence4", "fidelity and coherence, PT-broken (a) vs PT-symmetric nu_a=nu_b=nu_c (b)", ""},
        {"populations5", "N=2 (a) and N=3 (b) population dynamics from |00N>", ""},
        {"lossy6", "lossless vs lossy (kappa = 0.1 g unless set) runs for phi1..phi3", ""},
        {"epscan7", "final fidelity and coherence of phi3 across the detuning delta", "delta"},
        {"nscaling8", "coherence growth for |00N>, N = 1..cutoff", ""},
        {"decay9", "infidelity of phi3 vs gamma/g_eff for g_eff = 212, 42.4, 21.2, 4.2 MHz", "gamma_ratio"},
        {"initials10", "phi3 fidelity/coherence from several N=3 initial states", ""},
        {"purity11", "mixed initial states: p sweep (a) and number-state mixture (b)", "p"},
        {"disorder12", "phi3 fidelity/coherence averaged over random coupling disorder", "disorder"},
    };
    return registry;
}

const ScenarioInfo& scenario_info(const std::string& name) {
    for (const auto& info : scenario_registry())
        if (info.name == name) return info;
    throw ConfigError("scenario", "unknown scenario '" + name + "'");
}

double time_to_fidelity(const Trajectory& traj, std::size_t index, double level) {
    for (std::size_t k = 0; k < traj.records.size(); ++k) {
        const double f = traj.records[k].fidelity.at(index);
        if (f < level) continue;
        if (k == 0) return traj.times[0];
        const double f0 = traj.records[k - 1].fidelity[index];
        const double t0 = traj.times[k - 1], t1 = traj.times[k];
        return t0 + (t1 - t0) * (level - f0) / (f - f0);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double fidelity_std(const Trajectory& traj, std::size_t index, double t0, double t1) {
    double sum = 0.0, sum2 = 0.0;
    int n = 0;
    for (std::size_t k = 0; k < traj.records.size(); ++k) {
        if (traj.times[k] < t0 - 1e-12 || traj.times[k] > t1 + 1e-12) continue;
        const double f = traj.records[k].fidelity.at(index);
        sum += f;
        sum2 += f * f;
        ++n;
    }
    if (n == 0) throw DomainError("fidelity_std: no records in window");
    const double mean = sum / n;
    return std::sqrt(std::max(0.0, sum2 / n - mean * mean));
}

namespace {

class Writer {
public:
    Writer(const ScenarioConfig& cfg, ScenarioReport& report) : dir_(cfg.output_dir), report_(report) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw ConfigError("output_dir", "cannot create '" + dir_.string() + "': " + ec.message());
    }

    void csv(const std::string& name, const std::function<void(std::ostream&)>& body) {
        const fs::path path = dir_ / name;
        std::ofstream out(path);
        if (!out) throw ConfigError("output_dir", "cannot write '" + path.string() + "'");
        out << std::setprecision(12);
        body(out);
        if (!out) throw ConfigError("output_dir", "write failed for '" + path.string() + "'");
        report_.outputs.push_back(path.string());
    }

    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    ScenarioReport& report_;
};

std::string fmt(double x, int digits = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << x;
    return os.str();
}

void require_cutoff(const ScenarioConfig& cfg, int n) {
    if (cfg.cutoff < n)
        throw ConfigError("cutoff", cfg.scenario + " needs cutoff >= " + std::to_string(n));
}

NamedTarget phi(const BasisPtr& basis, int n, double theta) {
    return {"phi" + std::to_string(n), target_state(basis, n, theta)};
}

DensityMatrix fock(const BasisPtr& basis, int na, int nb, int nc) {
    return DensityMatrix::basis_state(basis, {na, nb, nc});
}

KetState fock_ket(const BasisPtr& basis, const Occupation& occ) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(basis->size()));
    v[static_cast<Eigen::Index>(basis->index_of(occ))] = 1.0;
    return KetState(basis, std::move(v));
}

std::vector<Occupation> sector_states(const FockBasis& b, int n) {
    std::vector<Occupation> out;
    for (std::size_t i = b.block_offset(n); i < b.block_offset(n) + b.block_size(n); ++i) out.push_back(b.state(i));
    return out;
}

const ObservableRecord& last(const Trajectory& t) { return t.records.back(); }

EvolutionConfig final_only(EvolutionConfig e) {
    e.record_stride = static_cast<int>(std::max(1L, e.steps()));
    return e;
}

double final_coherence(const Trajectory& t, const EvolutionConfig& e) {
    const double c = last(t).coherence;
    return std::isfinite(c) ? c : collective_coherence(t.final_rho, e.coherence_space);
}

// --- scenarios -----------------------------------------------------------

void run_spectrum2(const ScenarioConfig& cfg, Writer& w, ScenarioReport& rep) {
    const SweepSpec& s = *cfg.sweep;
    const PhaseDiagram d = sweep_phase_diagram(cfg.params, 1.0, 100.0, 100, s.min, s.max, s.steps);
    w.csv("phase_diagram.csv", [&](std::ostream& os) { write_phase_diagram_csv(os, d); });

    std::vector<double> gs = {cfg.params.g, 70.0, 25.0, 10.0};
    std::sort(gs.begin(), gs.end(), std::greater<>());
    gs.erase(std::unique(gs.begin(), gs.end()), gs.end());
    for (double g : gs) {
        if (!(g > 0.0)) continue;
        ModelParams p = cfg.params;
        p.g = g;
        const auto eps = find_exceptional_points(p, s.min, s.max, 0.01);
        rep.exceptional_points.insert(rep.exceptional_points.end(), eps.begin(), eps.end());
        rep.summary["ep_count_g" + fmt(g, 1)] = static_cast<double>(eps.size());
    }
    w.csv("exceptional_points.csv", [&](std::ostream& os) {
        os << "g_over_2pi_MHz,delta_star,bracket_width\n";
        for (const auto& ep : rep.exceptional_points) os << ep.g << ',' << ep.delta_star << ',' << ep.bracket_width << '\n';
    });
    std::size_t broken = 0;
    for (const auto& pt : d.points) broken += pt.phase == Phase::pt_broken;
    rep.summary["broken_fraction"] = static_cast<double>(broken) / static_cast<double>(d.points.size());
}

void run_populations3(const ScenarioConfig& cfg, Writer& w, ScenarioReport& rep) {
    const BasisPtr basis = make_basis(cfg.cutoff);
    const auto traj = evolve(fock(basis, 0, 0, 1), cfg.params, cfg.evolution, {phi(basis, 1, cfg.params.theta)});
    const std::vector<Occupation> pops = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    w.csv("populations3.csv", [&](std::ostream& os) { write_trajectory_csv(os, traj, pops); });
    rep.summary["final_fidelity_phi1"] = last(traj).fidelity[0];
    rep.summary["final_coherence"] = final_coherence(traj, cfg.evolution);
    for (const auto& occ : pops) rep.summary["final_pop_" + occ.label()] = traj.final_rho.population(occ);
}

void run_coherence4(const ScenarioConfig& cfg, Writer& w, ScenarioReport& rep) {
    const BasisPtr basis = make_basis(cfg.cutoff);
    const std::vector<NamedTarget> targets = {phi(basis, 1, cfg.params.theta)};
    const double t1 = cfg.evolution.t_final, t0 = 0.75 * t1;

    const auto a = evolve(fock(basis, 0, 0, 1), cfg.params, cfg.evolution, targets);
    w.csv("coherence4a.csv", [&](std::ostream& os) { write_trajectory_csv(os, a, sector_states(*basis, 1)); });
    rep.summary["a_final_fidelity_phi1"] = last(a).fidelity[0];
    rep.summary["a_final_coherence"] = final_coherence(a, cfg.evolution);
    rep.summary["a_late_fidelity_std"] = fidelity_std(a, 0, t0, t1);

    ModelParams sym = cfg.params;
    sym.nu_a = sym.nu_b = sym.nu_c;
    const auto b = evolve(fock(basis, 0, 0, 1), sym, cfg.evolution, targets);
    w.csv("coherence4b.csv", [&](std::ostream& os) { write_trajectory_csv(os, b, sector_states(*basis, 1)); });
    rep.summary["b_final_fidelity_phi1"] = last(b).fidelity[0];
    rep.summary["b_final_coherence"] = final_coherence(b, cfg.evolution);
    rep.summary["b_late_fidelity_std"] = fidelity_std(b, 0, t0, t1);
}

void run_populations5(const ScenarioConfig& cfg, Writer& w, ScenarioReport& rep) {
    require_cutoff(cfg, 3);
    const BasisPtr basis = make_basis(cfg.cutoff);
    for (int n : {2, 3}) {
        const auto traj = evolve(fock(basis, 0, 0, n), cfg.params, cfg.evolution, {phi(basis, n, cfg.params.theta)});
        const std::string panel = n == 2 ? "a" : "b";
        w.csv("populations5" + panel + ".csv",
              [&](std::ostream& os) { write_trajectory_csv(os, traj, sector_states(*basis, n)); });
        rep.summary[panel + "_final_fidelity_phi" + std::to_string(n)] = last(traj).fidelity[0];
        rep.summary[panel + "_final_coherence"] = final_coherence(traj, cfg.evolution);
    }
}

void run_lossy6(const ScenarioConfig& cfg, Writer& w, ScenarioReport& rep) {
    require_cutoff(cfg, 3);
    const BasisPtr basis = make_basis(cfg.cutoff);
    ModelParams lossless = cfg.params;
    lossless.kappa_a = lossless.kappa_b = lossless.gamma_m = 0.0;
    ModelParams lossy = cfg.params;
    if (!lossy.lossy()) lossy.kappa_a = lossy.kappa_b = lossy.gamma_m = 0.1 * lossy.g;
    rep.summary["kappa_a_mhz"] = lossy.kappa_a;

    struct Job {
        int n;
        bool with_loss;
    };
    std::vector<Job> jobs;
    for (int n = 1; n <= 3; ++n) jobs.push_back({n, false}), jobs.push_back({n, true});
    std::vector<std::optional<Trajectory>> out(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t i) {
        const Job& j = jobs[i];
        out[i] = evolve(fock(basis, 0, 0, j.n), j.with_loss ? lossy : lossless, cfg.evolution,
                        {phi(basis, j.n, cfg.params.theta)});
    });
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const std::string tag = std::string(jobs[i].with_loss ? "lossy" : "lossless") + "_n" + std::to_string(jobs[i].n);
        const Trajectory& t = *out[i];
        w.csv("lossy6_" + tag + ".csv", [&](std::ostream& os) { write_trajectory_csv(os, t, sector_states(*basis, jobs[i].n)); });
        rep.summary[tag + "_final_fidelity"] = last(t).fidelity[0];
        rep.summary[tag + "_final_coherence"] = final_coherence(t, cfg.evolution);
    }
}

void run_epscan7(const ScenarioConfig& cfg, Writer& w, ScenarioReport& rep) {
    const int n = std::min(3, cfg.cutoff);
    const BasisPtr basis = make_basis(cfg.cutoff);
    const std::vector<double> deltas = cfg.sweep->values();
    const EvolutionConfig evo = final_only(cfg.evolution);
    struct Row {
        double nu_c, f, c, im;
        Phase phase;
    };
    std::vector<Row> rows(deltas.size());
    const NamedTarget target = phi(basis, n, cfg.params.theta);
    parallel_for(deltas.size(), [&](std::size_t i) {
        ModelParams p = cfg.params;
        p.set_delta(deltas[i]);
        const auto t = evolve(fock_ket(basis, {0, 0, n}), p, evo, {target});
        const EigenTriple e = analytic_eigenvalues(p);
        const PhasePoint pt = classify_phase(e, default_epsilon_im(p));
        rows[i] = {p.nu_c, last(t).fidelity[0], final_coherence(t, evo), pt.max_abs_im, pt.phase};
    });
    w.csv("epscan7.csv", [&](std::ostream& os) {
        os << "delta,nu_c_mhz,fidelity_phi" << n << ",coherence,max_abs_im,phase\n";
        for (std::size_t i = 0; i < rows.size(); ++i)
            os << deltas[i] << ',' << rows[i].nu_c << ',' << rows[i].f << ',' << rows[i].c << ',' << rows[i].im << ','
               << phase_name(rows[i].phase) << '\n';
    });
    rep.exceptional_points = find_exceptional_points(cfg.params, cfg.sweep->min, cfg.sweep->max, 0.01);
    w.csv("exceptional_points.csv", [&](std::ostream& os) {
        os << "g_over_2pi_MHz,delta_star,bracket_width\n";
        for (const auto& ep : rep.exceptional_points) os << ep.g << ',' << ep.delta_star << ',' << ep.bracket_width << '\n';
    });
    double best = 0.0, c_broken_min = 1e300, c_broken_max = -1e300;
    for (const auto& r : rows) {
        best = std::max(best, r.f);
        if (r.phase == Phase::pt_broken) c_broken_min = std::min(c_broken_min, r.c), c_broken_max = std::max(c_broken_max, r.c);
    }
    rep.summary["max_fidelity"] = best;
    if (c_broken_max >= c_broken_min) {
        rep.summary["broken_coherence_min"] = c_broken_min;
        rep.summary["broken_coherence_max"] = c_broken_max;
    }
}

void run_nscaling8(const ScenarioConfig& cfg, Writer& w, ScenarioReport& rep) {
    const BasisPtr basis = make_basis(cfg.cutoff);
    const int top = cfg.cutoff;
    std::vector<std::optional<Trajectory>> runs(static_cast<std::size_t>(top));
    parallel_for(runs.size(), [&](std::size_t i) {
        const int n = static_cast<int>(i) + 1;
        std::vector<NamedTarget> targets = {{"gain", gain_mode_state(cfg.params, basis, n)}};
        runs[i] = evolve(fock_ket(basis, {0, 0, n}), cfg.params, cfg.evolution, targets);
    });
    w.csv("nscaling8.csv", [&](std::ostream& os) {
        os << "t_us";
        for (int n = 1; n <= top; ++n) os << ",coherence_N" << n;
        for (int n = 1; n <= top; ++n) os << ",fidelity_gain_N" << n;
        os << '\n';
        for (std::size_t k = 0; k < runs[0]->times.size(); ++k) {
            os << runs[0]->times[k];
            for (const auto& r : runs) os << ',' << r->records[k].coherence;
            for (const auto& r : runs) os << ',' << r->records[k].fidelity[0];
            os << '\n';
        }
    });
    for (int n = 1; n <= top; ++n) {
        const Trajectory& t = *runs[static_cast<std::size_t>(n - 1)];
        rep.summary["coherence_N" + std::to_string(n)] = final_coherence(t, cfg.evolution);
        rep.summary["fidelity_gain_N" + std::to_string(n)] = last(t).fidelity[0];
    }
}

void run_decay9(const ScenarioConfig& cfg, Writer& w, ScenarioReport& rep) {
    const int n = std::min(3, cfg.cutoff);
    const BasisPtr basis = make_basis(cfg.cutoff);
    const std::vector<double> g_effs = {212.0, 42.4, 21.2, 4.2};
    const std::vector<double> ratios = cfg.sweep->values();
    const EvolutionConfig evo = final_only(cfg.evolution);
    const NamedTarget target = phi(basis, n, cfg.params.theta);
    struct Row {
        double f = 0.0, c = 0.0;
    };
    std::vector<Row> rows(g_effs.size() * ratios.size());
    parallel_for(rows.size(), [&](std::size_t i) {
        const double g_eff = g_effs[i / ratios.size()];
        const double ratio = ratios[i % ratios.size()];
        ModelParams p = cfg.params;
        p.g = std::sqrt(2.0) * g_eff;
        p.kappa_a = p.kappa_b = p.gamma_m = ratio * g_eff;
        const auto t = evolve(fock(basis, 0, 0, n), p, evo, {target});
        rows[i] = {last(t).fidelity[0], final_coherence(t, evo)};
    });
    w.csv("decay9.csv", [&](std::ostream& os) {
        os << "g_eff_MHz,gamma_over_g_eff,gamma_MHz,fidelity,infidelity,coherence\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double g_eff = g_effs[i / ratios.size()], ratio = ratios[i % ratios.size()];
            os << g_eff << ',' << ratio << ',' << ratio * g_eff << ',' << rows[i].f << ',' << 1.0 - rows[i].f << ','
               << rows[i].c << '\n';
        }
    });
    for (std::size_t gi = 0; gi < g_effs.size(); ++gi) {
        const std::string tag = "g_eff" + fmt(g_effs[gi], 1);
        double worst = 1.0;
        for (std::size_t ri = 0; ri < ratios.size(); ++ri) {
            const double f = rows[gi * ratios.size() + ri].f;
            if (ratios[ri] == 0.0) rep.summary[tag + "_infidelity_lossless"] = 1.0 - f;
            if (ratios[ri] < 0.1) worst = std::min(worst, f);
        }
        rep.summary[tag + "_min_fidelity_below_0.1"] = worst;
    }
}

void run_initials10(const ScenarioConfig& cfg, Writer& w, ScenarioReport& rep) {
    require_cutoff(cfg, 3);
    const BasisPtr basis = make_basis(cfg.cutoff);
    const double theta = cfg.params.theta;
    std::vector<std::pair<std::string, KetState>> presets;
    for (Occupation occ : {Occupation{0, 0, 3}, Occupation{1, 1, 1}, Occupation{1, 0, 2}, Occupation{0, 1, 2},
                           Occupation{2, 0, 1}, Occupation{3, 0, 0}})
        presets.emplace_back(occ.label(), fock_ket(basis, occ));
    presets.emplace_back("A1_30", nonlocal_product_state(basis, 3, 0, theta));

    const NamedTarget target = phi(basis, 3, theta);
    std::vector<std::optional<Trajectory>> runs(presets.size());
    parallel_for(presets.size(), [&](std::size_t i) {
        runs[i] = evolve(presets[i].second, cfg.params, cfg.evolution, {target});
    });
    w.csv("initials10.csv", [&](std::ostream& os) {
        os << "t_us";
        for (const auto& p : presets) os << ",fidelity_" << p.first;
        for (const auto& p : presets) os << ",coherence_" << p.first;
        os << '\n';
        for (std::size_t k = 0; k < runs[0]->times.size(); ++k) {
            os << runs[0]->times[k];
            for (const auto& r : runs) os << ',' << r->records[k].fidelity[0];
            for (const auto& r : runs) os << ',' << r->records[k].coherence;
            os << '\n';
        }
    });
    double spread = 0.0, worst = 1.0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const double ci = final_coherence(*runs[i], cfg.evolution);
        rep.summary["final_fidelity_" + presets[i].first] = last(*runs[i]).fidelity[0];
        rep.summary["final_coherence_" + presets[i].first] = ci;
        worst = std::min(worst, last(*runs[i]).fidelity[0]);
        for (std::size_t j = 0; j < i; ++j) spread = std::max(spread, std::abs(ci - final_coherence(*runs[j], cfg.evolution)));
    }
    rep.summary["min_final_fidelity"] = worst;
    rep.summary["max_coherence_spread"] = spread;
}

void run_purity11(const ScenarioConfig& cfg, Writer& w, ScenarioReport& rep) {
    require_cutoff(cfg, 3);
    const BasisPtr basis = make_basis(cfg.cutoff);
    const double theta = cfg.params.theta;
    const KetState a03 = nonlocal_product_state(basis, 0, 3, theta);
    const KetState a30 = nonlocal_product_state(basis, 3, 0, theta);
    const NamedTarget target = phi(basis, 3, theta);

    const std::vector<double> ps = cfg.sweep->values();
    std::vector<std::optional<Trajectory>> runs(ps.size());
    parallel_for(ps.size(), [&](std::size_t i) {
        const double p = ps[i];
        std::vector<std::pair<KetState, double>> mix;
        if (p > 0.0) mix.emplace_back(a03, p);
        if (p < 1.0) mix.emplace_back(a30, 1.0 - p);
        runs[i] = evolve(mixed_initial_state(basis, mix), cfg.params, cfg.evolution, {target});
    });
    w.csv("purity11a.csv", [&](std::ostream& os) {
        os << "p,t_us,fidelity_phi3\n";
        for (std::size_t i = 0; i < ps.size(); ++i)
            for (std::size_t k = 0; k < runs[i]->times.size(); ++k)
                os << ps[i] << ',' << runs[i]->times[k] << ',' << runs[i]->records[k].fidelity[0] << '\n';
    });
    w.csv("purity11a_threshold.csv", [&](std::ostream& os) {
        os << "p,time_to_fidelity_0.99_us\n";
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const double t = time_to_fidelity(*runs[i], 0, 0.99);
            os << ps[i] << ',';
            if (std::isfinite(t)) os << t;
            os << '\n';
            rep.summary["t099_p" + fmt(ps[i], 3)] = t;
        }
    });

    std::vector<double> weights = cfg.weights;
    if (weights.empty()) weights.assign(4, 0.25);
    if (static_cast<int>(weights.size()) > cfg.cutoff + 1)
        throw ConfigError("weights", "more weights than number sectors below the cutoff");
    std::vector<std::pair<KetState, double>> mix;
    for (std::size_t n = 0; n < weights.size(); ++n)
        if (weights[n] > 0.0) mix.emplace_back(nonlocal_product_state(basis, 0, static_cast<int>(n), theta), weights[n]);
    const auto b = evolve(mixed_initial_state(basis, mix), cfg.params, cfg.evolution, {target});
    w.csv("purity11b.csv", [&](std::ostream& os) { write_trajectory_csv(os, b, sector_states(*basis, 3)); });
    rep.summary["b_final_fidelity_phi3"] = last(b).fidelity[0];
    rep.summary["b_final_mean_N"] = last(b).mean_N;
}

void run_disorder12(const ScenarioConfig& cfg, Writer& w, ScenarioReport& rep) {
    const std::vector<double> deltas = cfg.sweep->values();
    std::vector<DisorderResult> results;
    for (double d : deltas) results.push_back(disorder_sample(cfg, d));
    w.csv("disorder12.csv", [&](std::ostream& os) {
        os << "delta,mean_fidelity,mean_coherence\n";
        for (std::size_t i = 0; i < deltas.size(); ++i)
            os << deltas[i] << ',' << results[i].mean_fidelity << ',' << results[i].mean_coherence << '\n';
    });
    w.csv("disorder12_samples.csv", [&](std::ostream& os) {
        os << "delta,sample,u,fidelity,coherence\n";
        for (std::size_t i = 0; i < deltas.size(); ++i)
            for (std::size_t s = 0; s < results[i].u.size(); ++s)
                os << deltas[i] << ',' << s << ',' << results[i].u[s] << ',' << results[i].fidelity[s] << ','
                   << results[i].coherence[s] << '\n';
    });
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        rep.summary["mean_fidelity_d" + fmt(deltas[i], 3)] = results[i].mean_fidelity;
        rep.summary["mean_coherence_d" + fmt(deltas[i], 3)] = results[i].mean_coherence;
    }
}

void write_report(const ScenarioReport& rep, Writer& w) {
    nlohmann::json j;
    j["scenario"] = rep.scenario;
    j["config"] = nlohmann::json::parse(rep.config_echo);
    j["outputs"] = rep.outputs;
    nlohmann::json summary = nlohmann::json::object();
    for (const auto& [k, v] : rep.summary) summary[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
    j["summary"] = summary;
    j["exceptional_points"] = nlohmann::json::array();
    for (const auto& ep : rep.exceptional_points)
        j["exceptional_points"].push_back({{"g_over_2pi_MHz", ep.g}, {"delta_star", ep.delta_star}, {"bracket_width", ep.bracket_width}});
    j["runtime_s"] = rep.runtime_s;
    const fs::path path = w.dir() / "report.json";
    std::ofstream out(path);
    if (!out) throw ConfigError("output_dir", "cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

}  // namespace

DisorderResult disorder_sample(const ScenarioConfig& cfg, double delta) {
    if (!(delta >= 0.0 && delta <= 1.0)) throw DomainError("disorder delta must lie in [0, 1]");
    if (cfg.samples < 1) throw DomainError("disorder_sample: samples must be >= 1");
    const int n = std::min(3, cfg.cutoff);
    const BasisPtr basis = make_basis(cfg.cutoff);
    const NamedTarget target = phi(basis, n, cfg.params.theta);
    EvolutionConfig evo = final_only(cfg.evolution);
    evo.record_coherence = false;

    std::mt19937_64 rng(cfg.rng_seed);
    DisorderResult r;
    for (int i = 0; i < cfg.samples; ++i) {
        const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
        r.u.push_back(delta * (2.0 * unit - 1.0));
    }
    r.fidelity.resize(r.u.size());
    r.coherence.resize(r.u.size());
    parallel_for(r.u.size(), [&](std::size_t i) {
        ModelParams p = cfg.params;
        p.g = cfg.params.g * (1.0 + r.u[i]);
        const auto t = evolve(fock_ket(basis, {0, 0, n}), p, evo, {target});
        r.fidelity[i] = last(t).fidelity[0];
        r.coherence[i] = collective_coherence(t.final_rho, evo.coherence_space);
    });
    for (std::size_t i = 0; i < r.u.size(); ++i) {
        r.mean_fidelity += r.fidelity[i];
        r.mean_coherence += r.coherence[i];
    }
    r.mean_fidelity /= static_cast<double>(r.u.size());
    r.mean_coherence /= static_cast<double>(r.u.size());
    return r;
}

ScenarioReport run_scenario(const ScenarioConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    const ScenarioInfo& info = scenario_info(cfg.scenario);
    if (!info.sweep_variable.empty() && (!cfg.sweep || cfg.sweep->variable != info.sweep_variable))
        throw ConfigError("sweep_variable", cfg.scenario + " requires a '" + info.sweep_variable + "' sweep");
    if (info.sweep_variable.empty() && cfg.sweep) throw ConfigError("sweep_variable", cfg.scenario + " takes no sweep");
    try {
        cfg.params.validate();
        cfg.evolution.validate();
    } catch (const DomainError& e) {
        throw ConfigError("", e.what());
    }

    ScenarioReport rep;
    rep.scenario = cfg.scenario;
    rep.config_echo = config_to_json(cfg);
    Writer w(cfg, rep);

    static const std::map<std::string, void (*)(const ScenarioConfig&, Writer&, ScenarioReport&)> table = {
        {"spectrum2", run_spectrum2},   {"populations3", run_populations3}, {"coherence4", run_coherence4},
        {"populations5", run_populations5}, {"lossy6", run_lossy6},     {"epscan7", run_epscan7},
        {"nscaling8", run_nscaling8},   {"decay9", run_decay9},           {"initials10", run_initials10},
        {"purity11", run_purity11},     {"disorder12", run_disorder12},
    };
    table.at(cfg.scenario)(cfg, w, rep);

    rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rep.outputs.push_back((w.dir() / "report.json").string());
    write_report(rep, w);
    return rep;
}

}  // namespace ptmag
