#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ptmag/fock.hpp"
#include "ptmag/metrics.hpp"
#include "ptmag/model.hpp"

namespace ptmag {

struct EvolutionConfig {
    double dt = 1e-5;       // us
    double t_final = 0.2;   // us
    int record_stride = 100;
    bool renormalize_trace = true;
    bool hermitize = true;
    /// Integrate in the frame rotating at params.frame_omega().
    bool frame = true;
    bool record_coherence = true;
    CoherenceSpace coherence_space = CoherenceSpace::product;
    /// Divergence tolerance: abort with NumericalError when, after a step, |tr rho - 1|
    /// or the excess of any |rho_ij| over tr rho exceeds it (density path), or the
    /// ket norm moves by more than the gain allows plus this (ket path).
    double max_trace_drift = 1e-3;

    /// Throws DomainError unless 0 < dt <= t_final and record_stride >= 1.
    void validate() const;
    long steps() const;

    bool operator==(const EvolutionConfig&) const = default;
};

struct NamedTarget {
    std::string label;
    KetState state;
};

struct ObservableRecord {
    double t = 0.0;
    /// Raw trace before any renormalization at this step.
    double trace = 1.0;
    double mean_N = 0.0;
    std::vector<double> fidelity;  // one per target
    double coherence = 0.0;        // NaN when not recorded
    double purity = 1.0;
    std::vector<double> populations;  // basis order
};

struct Trajectory {
    std::vector<std::string> target_labels;
    std::vector<double> times;
    std::vector<ObservableRecord> records;
    DensityMatrix final_rho;
};

/// -i[H1, rho] - i{H2, rho} + 2i tr(rho H2) rho, plus sum_k rate_k D[a_k] rho
/// when `loss` is given. Rates are the Lindblad coefficients themselves.
Matrix rho_derivative(const Matrix& rho, const DenseOperator& H1, const DenseOperator& H2,
                      const std::optional<LossRates>& loss = std::nullopt);

/// Fixed-step RK4 on the nonlinear master equation, exploiting that H is
/// block diagonal in total number: only the (N, M) blocks reachable from rho0
/// (including by loss) are stored and propagated.
class DensityPropagator {
public:
    DensityPropagator(const DensityMatrix& rho0, const ModelParams& params, const EvolutionConfig& cfg);

    /// One RK4 step followed by the optional hermitize/renormalize. Throws
    /// NumericalError when the step diverges.
    void step();

    long step_count() const { return steps_; }
    double time() const { return static_cast<double>(steps_) * dt_; }
    /// Trace measured after the last step, before renormalization.
    double raw_trace() const { return raw_trace_; }
    /// Full density matrix in the basis (exactly as integrated).
    Matrix matrix() const;
    /// Hermitized, trace-normalized copy.
    DensityMatrix state() const;

private:
    struct Block {
        int n, m;
        Matrix rho;
    };
    struct Sector {
        Matrix h_eff;      // H_N - (i/2) sum_k rate_k n_k
        Matrix h_eff_dag;
        Matrix h2;         // anti-Hermitian part of H_N
        std::vector<Matrix> lower;  // a_k : sector N+1 -> N, weighted by sqrt(rate_k)
    };

    std::vector<Matrix> derivative(const std::vector<Matrix>& rho) const;
    void finish_step();

    BasisPtr basis_;
    double dt_;
    bool hermitize_, renormalize_;
    double max_drift_;
    bool lossy_;
    std::vector<Block> blocks_;
    std::vector<int> partner_;    // index of (m, n) for block (n, m)
    std::vector<int> feeder_;     // index of (n+1, m+1) or -1
    std::vector<Sector> sectors_;
    long steps_ = 0;
    double raw_trace_ = 1.0;
};

/// Density-matrix evolution under the nonlinear master equation, with Lindblad
/// terms when lossy.
Trajectory evolve(const DensityMatrix& rho0, const ModelParams& params, const EvolutionConfig& cfg,
                  const std::vector<NamedTarget>& targets);

/// Pure lossless start: integrates psi' = -iH psi and renormalizes, which is
/// the exact solution of the nonlinear equation for rho = |psi><psi|. Falls
/// back to the density path when params are lossy.
Trajectory evolve(const KetState& psi0, const ModelParams& params, const EvolutionConfig& cfg,
                  const std::vector<NamedTarget>& targets);

struct SteadyStateResult {
    DensityMatrix rho;
    /// Start of the first window over which rho changed by < tolerance, or
    /// the final time when unconverged.
    double converged_at = 0.0;
    bool converged = false;
};

/// Integrates until max|rho(t + window) - rho(t)| < tolerance, or t_final.
/// Lossless parameters only.
SteadyStateResult steady_state(const DensityMatrix& rho0, const ModelParams& params, const EvolutionConfig& cfg,
                               double window = 0.01, double tolerance = 1e-8);

/// sum_k w_k |psi_k><psi_k|; weights non-negative and summing to 1 (1e-10).
DensityMatrix mixed_initial_state(const BasisPtr& basis, const std::vector<std::pair<KetState, double>>& components);

/// Trajectory CSV: t_us,trace,mean_N,fidelity_<label>...,coherence,purity,pop_<nanbnc>...
/// `population_states` selects the pop columns (all basis states when empty).
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<Occupation>& population_states = {});

}  // namespace ptmag
