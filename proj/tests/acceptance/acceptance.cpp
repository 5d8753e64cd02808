// Acceptance checks: one named criterion per invocation, one PASS/FAIL line
// each. Exit status is 0 on PASS, 1 on FAIL, 2 on an unexpected exception.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ptmag/config.hpp"
#include "ptmag/dynamics.hpp"
#include "ptmag/metrics.hpp"
#include "ptmag/model.hpp"
#include "ptmag/parallel.hpp"
#include "ptmag/scenarios.hpp"
#include "ptmag/spectrum.hpp"

using namespace ptmag;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    // Records one measured quantity; the criterion passes only if all do.
    void expect(bool ok, const std::string& what) {
        pass = pass && ok;
        detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [x]");
    }
};

std::string num(double x, int digits = 4) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << x;
    return os.str();
}

std::string sci(double x) {
    std::ostringstream os;
    os.precision(2);
    os << std::scientific << x;
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

KetState fock_ket(const BasisPtr& basis, const Occupation& occ) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(basis->size()));
    v[static_cast<Eigen::Index>(basis->index_of(occ))] = 1.0;
    return KetState(basis, v);
}

NamedTarget phi(const BasisPtr& basis, int n, double theta) {
    return {"phi" + std::to_string(n), target_state(basis, n, theta)};
}

EvolutionConfig final_only(EvolutionConfig e) {
    e.record_stride = static_cast<int>(e.steps());
    e.record_coherence = false;
    return e;
}

double relative_match(const EigenTriple& a, const EigenTriple& b) {
    std::array<bool, 3> used{};
    double worst = 0.0;
    for (const Complex& x : a.omega) {
        int best = -1;
        for (int k = 0; k < 3; ++k)
            if (!used[k] && (best < 0 || std::abs(b.omega[k] - x) < std::abs(b.omega[best] - x))) best = k;
        used[best] = true;
        worst = std::max(worst, std::abs(b.omega[best] - x) / std::abs(x));
    }
    return worst;
}

// Each expected location must have exactly one found EP within tol, and no
// EP may be left unmatched.
void match_eps(Outcome& out, double g, const std::vector<double>& expected, double tol, double runtime_limit) {
    ModelParams p = canonical_params();
    p.g = g;
    const auto t0 = std::chrono::steady_clock::now();
    const auto eps = find_exceptional_points(p, -5.0, 5.0, 0.001);
    const double elapsed = seconds_since(t0);
    std::vector<double> found;
    for (const auto& e : eps) found.push_back(e.delta_star);
    std::string list;
    for (double d : found) list += (list.empty() ? "" : ", ") + num(d, 3);
    std::string want;
    for (double d : expected) want += (want.empty() ? "" : ", ") + num(d, 2);
    bool ok = found.size() == expected.size();
    for (double d : expected) {
        int hits = 0;
        for (double f : found) hits += std::abs(f - d) <= tol;
        ok = ok && hits == 1;
    }
    out.expect(ok, "g=" + num(g, 0) + ": found {" + list + "} vs {" + want + "} +/- " + num(tol, 2));
    if (runtime_limit > 0.0) out.expect(elapsed < runtime_limit, "runtime " + num(elapsed, 2) + " s < " + num(runtime_limit, 0) + " s");
}

// --- criteria ---------------------------------------------------------------

void eigen_oracle(Outcome& out) {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> nu(5800.0, 6200.0), coupling(0.0, 150.0), angle(0.0, 2.0 * pi);
    double worst = 0.0, worst_trace = 0.0;
    for (int i = 0; i < 200; ++i) {
        ModelParams p;
        p.nu_a = nu(rng);
        p.nu_b = nu(rng);
        p.nu_c = nu(rng);
        p.g = coupling(rng);
        p.r = coupling(rng);
        p.phi = angle(rng);
        p.theta = angle(rng);
        const EigenTriple an = analytic_eigenvalues(p);
        worst = std::max(worst, relative_match(an, numeric_eigenvalues(single_excitation_matrix(p))));
        const Complex sum = an.omega[0] + an.omega[1] + an.omega[2];
        const double trace = p.omega_a() + p.omega_b() + p.omega_c();
        worst_trace = std::max(worst_trace, std::abs(sum - trace) / trace);
    }
    out.expect(worst < 1e-9, "200 draws: max relative root error " + sci(worst) + " < 1e-9");
    out.expect(worst_trace < 1e-8, "trace identity " + sci(worst_trace) + " < 1e-8");
}

void ep_locations(Outcome& out) {
    match_eps(out, 70.0, {-1.03, 1.03}, 0.05, 10.0);
    match_eps(out, 25.0, {-1.38, 0.0, 1.38}, 0.05, 10.0);
    match_eps(out, 10.0, {-2.24, -0.88, 0.88, 2.24}, 0.05, 10.0);
}

void ep_weak_coupling(Outcome& out) { match_eps(out, 6.0, {-3.1, -1.9, 1.9, 3.1}, 0.1, 0.0); }

// Largest relative distance after pairing each root in `a` with the closest
// unused root in `b`.
double multiset_distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    std::vector<bool> used(b.size(), false);
    double worst = 0.0;
    for (const Complex& x : a) {
        std::size_t best = b.size();
        for (std::size_t k = 0; k < b.size(); ++k)
            if (!used[k] && (best == b.size() || std::abs(b[k] - x) < std::abs(b[best] - x))) best = k;
        used[best] = true;
        worst = std::max(worst, std::abs(b[best] - x) / std::abs(x));
    }
    return worst;
}

void theta_invariance(Outcome& out) {
    // Single-excitation roots and the number-sector spectra of H up to N=3.
    ModelParams p = canonical_params();
    const auto basis = make_basis(3);
    auto spectra = [&](double theta) {
        p.theta = theta;
        std::vector<std::vector<Complex>> all;
        const EigenTriple single = analytic_eigenvalues(p);
        all.emplace_back(single.omega.begin(), single.omega.end());
        const Matrix h = build_hamiltonian(p, basis, false).elements;
        for (int n = 1; n <= 3; ++n) {
            const auto off = static_cast<Eigen::Index>(basis->block_offset(n));
            const auto dim = static_cast<Eigen::Index>(basis->block_size(n));
            Eigen::ComplexEigenSolver<Matrix> es(h.block(off, off, dim, dim), false);
            all.emplace_back(es.eigenvalues().data(), es.eigenvalues().data() + dim);
        }
        return all;
    };
    const auto ref = spectra(0.0);
    double worst = 0.0;
    for (double theta : {0.3 * pi, 1.1 * pi}) {
        const auto w = spectra(theta);
        for (std::size_t i = 0; i < w.size(); ++i) worst = std::max(worst, multiset_distance(w[i], ref[i]));
    }
    out.expect(worst < 1e-9, "max relative eigenvalue change over theta in {0, 0.3pi, 1.1pi} " + sci(worst) + " < 1e-9");
}

void single_excitation_steady_state(Outcome& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const ScenarioConfig cfg = default_config("populations3");
    const auto basis = make_basis(cfg.cutoff);
    const auto traj = evolve(DensityMatrix::basis_state(basis, {0, 0, 1}), cfg.params, final_only(cfg.evolution),
                             {phi(basis, 1, cfg.params.theta)});
    const double f = traj.records.back().fidelity[0];
    const double c = collective_coherence(traj.final_rho);
    const double elapsed = seconds_since(t0);
    out.expect(f >= 0.999, "F(phi1) " + num(f) + " >= 0.999");
    out.expect(std::abs(c - 0.806) <= 0.01, "C " + num(c) + " = 0.806 +/- 0.01");
    const std::vector<std::pair<Occupation, double>> pops = {{{1, 0, 0}, 0.25}, {{0, 1, 0}, 0.25}, {{0, 0, 1}, 0.5}};
    for (const auto& [occ, want] : pops) {
        const double got = traj.final_rho.population(occ);
        out.expect(std::abs(got - want) <= 0.01, "P" + occ.label() + " " + num(got) + " = " + num(want, 2) + " +/- 0.01");
    }
    out.expect(elapsed < 5.0, "runtime " + num(elapsed, 2) + " s < 5 s");
}

void coherence_ladder(Outcome& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<double> want = {0.902, 0.937, 0.955, 0.965, 0.972};
    std::vector<double> got(want.size());
    const ModelParams p = canonical_params();
    parallel_for(want.size(), [&](std::size_t i) {
        const int n = static_cast<int>(i) + 2;
        const auto basis = make_basis(n);
        const auto traj = evolve(fock_ket(basis, {0, 0, n}), p, final_only(EvolutionConfig{}), {});
        got[i] = collective_coherence(traj.final_rho);
    });
    const double elapsed = seconds_since(t0);
    for (std::size_t i = 0; i < want.size(); ++i)
        out.expect(std::abs(got[i] - want[i]) <= 0.01,
                   "N=" + std::to_string(i + 2) + " C " + num(got[i]) + " = " + num(want[i], 3) + " +/- 0.01");
    out.expect(elapsed < 60.0, "runtime " + num(elapsed, 2) + " s < 60 s");
}

void maximal_states(Outcome& out) {
    const std::vector<double> want = {0.941, 0.970, 0.983, 0.989, 0.993};
    for (std::size_t i = 0; i < want.size(); ++i) {
        const int n = static_cast<int>(i) + 2;
        const auto basis = make_basis(3 * n);
        Vector v = Vector::Zero(static_cast<Eigen::Index>(basis->size()));
        for (int k = 0; k <= n; ++k) v[static_cast<Eigen::Index>(basis->index_of({k, k, k}))] = 1.0;
        const double c = collective_coherence(DensityMatrix::pure(KetState(basis, v)));
        out.expect(std::abs(c - want[i]) <= 0.005, "N=" + std::to_string(n) + " C " + num(c) + " = " + num(want[i], 3) + " +/- 0.005");
    }
}

void lossy_endpoints(Outcome& out) {
    const ScenarioConfig cfg = default_config("lossy6");
    ModelParams p = cfg.params;
    p.kappa_a = p.kappa_b = p.gamma_m = 0.1 * p.g;
    const auto basis = make_basis(cfg.cutoff);
    const std::vector<double> want_f = {0.926, 0.856, 0.793}, want_c = {0.678, 0.794, 0.848};
    std::vector<double> f(3), c(3);
    parallel_for(3, [&](std::size_t i) {
        const int n = static_cast<int>(i) + 1;
        const auto t = evolve(DensityMatrix::basis_state(basis, {0, 0, n}), p, final_only(cfg.evolution),
                              {phi(basis, n, p.theta)});
        f[i] = t.records.back().fidelity[0];
        c[i] = collective_coherence(t.final_rho);
    });
    for (std::size_t i = 0; i < 3; ++i) {
        const std::string tag = "phi" + std::to_string(i + 1);
        out.expect(std::abs(f[i] - want_f[i]) <= 0.02, tag + " F " + num(f[i]) + " = " + num(want_f[i], 3) + " +/- 0.02");
        out.expect(std::abs(c[i] - want_c[i]) <= 0.02, tag + " C " + num(c[i]) + " = " + num(want_c[i], 3) + " +/- 0.02");
    }
}

void pt_symmetric_oscillation(Outcome& out) {
    const ScenarioConfig cfg = default_config("coherence4");
    ModelParams p = cfg.params;
    p.nu_a = p.nu_b = p.nu_c;
    const auto basis = make_basis(cfg.cutoff);
    EvolutionConfig evo = cfg.evolution;
    evo.record_coherence = true;
    const auto t = evolve(DensityMatrix::basis_state(basis, {0, 0, 1}), p, evo, {phi(basis, 1, p.theta)});
    const double sd = fidelity_std(t, 0, 0.15, 0.2);
    double c_min = 1.0, c_max = 0.0;
    for (std::size_t k = 0; k < t.records.size(); ++k)
        if (t.times[k] >= 0.15 - 1e-12) c_min = std::min(c_min, t.records[k].coherence), c_max = std::max(c_max, t.records[k].coherence);
    out.expect(sd > 0.05, "late-window std(F) " + num(sd) + " > 0.05");
    out.detail << " (coherence range over the window " << num(c_min) << ".." << num(c_max) << ")";
}

void decay_sweep(Outcome& out) {
    const ScenarioConfig cfg = default_config("decay9");
    const auto basis = make_basis(3);
    const NamedTarget target = phi(basis, 3, cfg.params.theta);
    const EvolutionConfig evo = final_only(cfg.evolution);
    struct Job {
        double g_eff, ratio, f = 0.0;
    };
    std::vector<Job> jobs{{212.0, 0.0}};
    for (double g_eff : {4.2, 21.2, 42.4})
        for (double ratio : cfg.sweep->values())
            if (ratio < 0.1) jobs.push_back({g_eff, ratio});
    parallel_for(jobs.size(), [&](std::size_t i) {
        ModelParams p = cfg.params;
        p.g = std::sqrt(2.0) * jobs[i].g_eff;
        p.kappa_a = p.kappa_b = p.gamma_m = jobs[i].ratio * jobs[i].g_eff;
        jobs[i].f = evolve(DensityMatrix::basis_state(basis, {0, 0, 3}), p, evo, {target}).records.back().fidelity[0];
    });
    for (double g_eff : {4.2, 21.2, 42.4}) {
        double worst = 1.0, at = 0.0;
        for (const auto& j : jobs)
            if (j.g_eff == g_eff && j.f < worst) worst = j.f, at = j.ratio;
        out.expect(worst > 0.9, "g_eff=" + num(g_eff, 1) + ": min F(phi3) " + num(worst) + " (at gamma/g_eff=" + num(at, 2) +
                                    ") > 0.90");
    }
    const double infid = 1.0 - jobs[0].f;
    out.expect(std::abs(infid - 0.37) <= 0.05, "g_eff=212 lossless infidelity " + num(infid) + " = 0.37 +/- 0.05");
}

void disorder_sweep(Outcome& out) {
    ScenarioConfig cfg = default_config("disorder12");
    cfg.samples = 51;
    std::vector<double> deltas = cfg.sweep->values();
    std::vector<DisorderResult> res;
    for (double d : deltas) res.push_back(disorder_sample(cfg, d));
    double worst_low = 1.0, c_min = 1.0, c_max = 0.0;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (deltas[i] <= 0.5 + 1e-12) worst_low = std::min(worst_low, res[i].mean_fidelity);
        c_min = std::min(c_min, res[i].mean_coherence);
        c_max = std::max(c_max, res[i].mean_coherence);
    }
    const double f1 = res.back().mean_fidelity;
    out.expect(worst_low >= 0.995, "min mean F for delta<=0.5 " + num(worst_low) + " >= 0.995");
    out.expect(f1 >= 0.945 && f1 <= 0.992, "mean F at delta=1 " + num(f1) + " in [0.945, 0.992]");
    out.expect(c_max - c_min <= 0.01, "mean C spread " + num(c_max - c_min) + " (" + num(c_min) + ".." + num(c_max) + ") <= 0.01");
}

void purity_sweep(Outcome& out) {
    const ScenarioConfig cfg = default_config("purity11");
    const auto basis = make_basis(cfg.cutoff);
    const double theta = cfg.params.theta;
    const KetState a03 = nonlocal_product_state(basis, 0, 3, theta);
    const KetState a30 = nonlocal_product_state(basis, 3, 0, theta);
    EvolutionConfig evo = cfg.evolution;
    evo.record_coherence = false;
    const std::vector<std::pair<double, double>> cases = {{1.0, 0.06}, {0.2, 0.08}};
    std::vector<double> got(cases.size());
    parallel_for(cases.size(), [&](std::size_t i) {
        const double p = cases[i].first;
        std::vector<std::pair<KetState, double>> mix{{a03, p}};
        if (p < 1.0) mix.emplace_back(a30, 1.0 - p);
        const auto t = evolve(mixed_initial_state(basis, mix), cfg.params, evo, {phi(basis, 3, theta)});
        got[i] = time_to_fidelity(t, 0, 0.99);
    });
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const double want = cases[i].second;
        out.expect(std::abs(got[i] - want) <= 0.2 * want,
                   "p=" + num(cases[i].first, 1) + ": t(F=0.99) " + num(got[i]) + " us = " + num(want, 2) + " +/- 20%");
    }
}

void conservation(Outcome& out) {
    const ModelParams p = canonical_params();
    ModelParams lossy = p;
    lossy.kappa_a = lossy.kappa_b = lossy.gamma_m = 0.1 * p.g;
    const auto basis = make_basis(3);
    EvolutionConfig raw;
    raw.renormalize_trace = false;

    // Trace drift and sector leakage, lossless; positivity, lossy.
    double drift = 0.0, leak = 0.0, min_eig = 1.0;
    {
        DensityPropagator prop(DensityMatrix::basis_state(basis, {0, 0, 3}), p, raw);
        const auto off = static_cast<Eigen::Index>(basis->block_offset(3));
        for (long k = 0; k < raw.steps(); ++k) {
            prop.step();
            drift = std::max(drift, std::abs(prop.raw_trace() - 1.0));
            if (k % 1000 == 999) {
                const Matrix m = prop.matrix();
                const auto d = m.rows();
                double outside = m.topRows(off).cwiseAbs().maxCoeff();
                outside = std::max(outside, m.block(off, 0, d - off, off).cwiseAbs().maxCoeff());
                leak = std::max(leak, outside);
            }
        }
    }
    {
        DensityPropagator prop(DensityMatrix::basis_state(basis, {0, 0, 3}), lossy, raw);
        for (long k = 0; k < raw.steps(); ++k) {
            prop.step();
            drift = std::max(drift, std::abs(prop.raw_trace() - 1.0));
            if (k % 1000 == 999) {
                const Matrix m = prop.matrix();
                min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly)
                                                .eigenvalues()
                                                .minCoeff());
            }
        }
    }
    out.expect(drift < 1e-6, "trace drift without renormalization " + sci(drift) + " < 1e-6");
    out.expect(leak < 1e-10, "N-sector leakage " + sci(leak) + " < 1e-10");
    out.expect(min_eig >= -1e-7, "min eigenvalue " + sci(min_eig) + " >= -1e-7");

    const std::vector<NamedTarget> targets{phi(basis, 3, p.theta)};
    EvolutionConfig coarse = final_only(EvolutionConfig{});
    EvolutionConfig fine = coarse;
    fine.dt *= 0.5;
    fine.record_stride *= 2;
    const double f1 = evolve(DensityMatrix::basis_state(basis, {0, 0, 3}), lossy, coarse, targets).records.back().fidelity[0];
    const double f2 = evolve(DensityMatrix::basis_state(basis, {0, 0, 3}), lossy, fine, targets).records.back().fidelity[0];
    out.expect(std::abs(f1 - f2) < 1e-8, "dt-halving |dF| " + sci(std::abs(f1 - f2)) + " < 1e-8");
}

void initial_state_independence(Outcome& out) {
    const ScenarioConfig cfg = default_config("initials10");
    const auto basis = make_basis(cfg.cutoff);
    const double theta = cfg.params.theta;
    std::vector<std::pair<std::string, KetState>> presets;
    for (Occupation occ : {Occupation{0, 0, 3}, Occupation{1, 1, 1}, Occupation{1, 0, 2}, Occupation{0, 1, 2},
                           Occupation{2, 0, 1}, Occupation{3, 0, 0}})
        presets.emplace_back(occ.label(), fock_ket(basis, occ));
    presets.emplace_back("A1_30", nonlocal_product_state(basis, 3, 0, theta));
    std::vector<double> f(presets.size()), c(presets.size());
    parallel_for(presets.size(), [&](std::size_t i) {
        const auto t = evolve(presets[i].second, cfg.params, final_only(cfg.evolution), {phi(basis, 3, theta)});
        f[i] = t.records.back().fidelity[0];
        c[i] = collective_coherence(t.final_rho);
    });
    std::string worst_label;
    double worst = 1.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f[i] < worst) worst = f[i], worst_label = presets[i].first;
    const double spread = *std::max_element(c.begin(), c.end()) - *std::min_element(c.begin(), c.end());
    out.expect(worst >= 0.99, "min F(phi3) " + num(worst) + " (" + worst_label + ") >= 0.99 over " +
                                  std::to_string(presets.size()) + " presets");
    out.expect(spread <= 0.02, "max pairwise C difference " + num(spread) + " <= 0.02");
}

struct Criterion {
    std::string name;
    std::function<void(Outcome&)> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list = {
        {"eigen_oracle", eigen_oracle},
        {"ep_locations", ep_locations},
        {"ep_weak_coupling", ep_weak_coupling},
        {"theta_invariance", theta_invariance},
        {"single_excitation_steady_state", single_excitation_steady_state},
        {"coherence_ladder", coherence_ladder},
        {"maximal_states", maximal_states},
        {"lossy_endpoints", lossy_endpoints},
        {"pt_symmetric_oscillation", pt_symmetric_oscillation},
        {"decay_sweep", decay_sweep},
        {"disorder_sweep", disorder_sweep},
        {"purity_sweep", purity_sweep},
        {"conservation", conservation},
        {"initial_state_independence", initial_state_independence},
    };
    return list;
}

int run_one(const Criterion& c) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        c.run(out);
    } catch (const std::exception& e) {
        std::cout << "FAIL " << c.name << ": exception: " << e.what() << std::endl;
        return 2;
    }
    std::cout << (out.pass ? "PASS " : "FAIL ") << c.name << ": " << out.detail.str() << " [" << num(seconds_since(t0), 1)
              << " s]" << std::endl;
    return out.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string which = argc > 1 ? argv[1] : "all";
    if (which == "--list") {
        for (const auto& c : criteria()) std::cout << c.name << '\n';
        return 0;
    }
    int status = 0;
    bool found = false;
    for (const auto& c : criteria()) {
        if (which != "all" && which != c.name) continue;
        found = true;
        status = std::max(status, run_one(c));
    }
    if (!found) {
        std::cerr << "unknown criterion '" << which << "' (try --list)\n";
        return 2;
    }
    return status;
}
