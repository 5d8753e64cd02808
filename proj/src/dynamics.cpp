#include "ptmag/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "ptmag/error.hpp"

namespace ptmag {

void EvolutionConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
    if (!(t_final >= dt) || !std::isfinite(t_final)) throw DomainError("t_final must be >= dt");
    if (record_stride < 1) throw DomainError("record_stride must be >= 1");
    if (!(max_trace_drift > 0.0)) throw DomainError("max_trace_drift must be positive");
}

long EvolutionConfig::steps() const { return std::lround(t_final / dt); }

Matrix rho_derivative(const Matrix& rho, const DenseOperator& H1, const DenseOperator& H2,
                      const std::optional<LossRates>& loss) {
    const Matrix& h1 = H1.elements;
    const Matrix& h2 = H2.elements;
    if (rho.rows() != h1.rows() || rho.rows() != h2.rows()) throw DomainError("rho_derivative: shape mismatch");
    const Complex expect_h2 = (rho * h2).trace();
    Matrix d = -kI * (h1 * rho - rho * h1) - kI * (h2 * rho + rho * h2) + 2.0 * kI * expect_h2 * rho;
    if (loss && loss->any()) {
        const double rates[3] = {loss->a, loss->b, loss->c};
        for (Mode m : kAllModes) {
            const double k = rates[static_cast<int>(m)];
            if (k == 0.0) continue;
            const Matrix a = mode_annihilator(H1.basis, m).elements;
            const Matrix n = a.adjoint() * a;
            d += k * (a * rho * a.adjoint() - 0.5 * (n * rho + rho * n));
        }
    }
    return d;
}

namespace {

Eigen::Index sector_offset(const FockBasis& b, int n) { return static_cast<Eigen::Index>(b.block_offset(n)); }
Eigen::Index sector_size(const FockBasis& b, int n) { return static_cast<Eigen::Index>(b.block_size(n)); }

}  // namespace

DensityPropagator::DensityPropagator(const DensityMatrix& rho0, const ModelParams& params, const EvolutionConfig& cfg)
    : basis_(rho0.basis()),
      dt_(cfg.dt),
      hermitize_(cfg.hermitize),
      renormalize_(cfg.renormalize_trace),
      max_drift_(cfg.max_trace_drift),
      lossy_(params.lossy()) {
    cfg.validate();
    const FockBasis& b = *basis_;
    const int top = b.cutoff();
    const DenseOperator h = build_hamiltonian(params, basis_, cfg.frame);
    const Matrix h2_full = 0.5 * (h.elements - h.elements.adjoint());
    const LossRates rates = lindblad_rates(params);
    const double rate[3] = {rates.a, rates.b, rates.c};

    std::array<Matrix, 3> lowering;
    for (Mode m : kAllModes) lowering[static_cast<int>(m)] = mode_annihilator(basis_, m).elements;

    sectors_.resize(static_cast<std::size_t>(top + 1));
    for (int n = 0; n <= top; ++n) {
        const Eigen::Index off = sector_offset(b, n), dim = sector_size(b, n);
        Sector& s = sectors_[static_cast<std::size_t>(n)];
        s.h_eff = h.elements.block(off, off, dim, dim);
        s.h2 = h2_full.block(off, off, dim, dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            const Occupation& occ = b.state(static_cast<std::size_t>(off + i));
            s.h_eff(i, i) -= 0.5 * kI * (rate[0] * occ.a + rate[1] * occ.b + rate[2] * occ.c);
        }
        s.h_eff_dag = s.h_eff.adjoint();
        if (lossy_ && n < top) {
            const Eigen::Index up = sector_offset(b, n + 1), up_dim = sector_size(b, n + 1);
            for (int k = 0; k < 3; ++k) {
                if (rate[k] == 0.0) continue;
                s.lower.push_back(std::sqrt(rate[k]) * lowering[k].block(off, up, dim, up_dim));
            }
        }
    }

    // Active (n, m) blocks: nonzero in rho0, closed under simultaneous loss.
    const Matrix& r = rho0.elements();
    std::map<std::pair<int, int>, int> index;
    auto add = [&](int n, int m) {
        if (index.count({n, m})) return;
        index[{n, m}] = static_cast<int>(blocks_.size());
        blocks_.push_back({n, m, r.block(sector_offset(b, n), sector_offset(b, m), sector_size(b, n), sector_size(b, m))});
    };
    for (int n = 0; n <= top; ++n)
        for (int m = 0; m <= top; ++m) {
            const auto blk = r.block(sector_offset(b, n), sector_offset(b, m), sector_size(b, n), sector_size(b, m));
            if (blk.cwiseAbs().maxCoeff() == 0.0) continue;
            add(n, m);
            if (lossy_)
                for (int k = 1; k <= std::min(n, m); ++k) add(n - k, m - k);
        }

    partner_.resize(blocks_.size());
    feeder_.resize(blocks_.size());
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        const auto [n, m] = std::pair{blocks_[i].n, blocks_[i].m};
        partner_[i] = index.at({m, n});
        const auto it = index.find({n + 1, m + 1});
        feeder_[i] = (lossy_ && it != index.end()) ? it->second : -1;
    }
}

std::vector<Matrix> DensityPropagator::derivative(const std::vector<Matrix>& rho) const {
    Complex h2{0.0, 0.0};
    for (std::size_t i = 0; i < blocks_.size(); ++i)
        if (blocks_[i].n == blocks_[i].m) h2 += (rho[i] * sectors_[static_cast<std::size_t>(blocks_[i].n)].h2).trace();
    const Complex nonlinear = 2.0 * kI * h2;

    std::vector<Matrix> d(blocks_.size());
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        const Sector& sn = sectors_[static_cast<std::size_t>(blocks_[i].n)];
        const Sector& sm = sectors_[static_cast<std::size_t>(blocks_[i].m)];
        d[i].noalias() = -kI * (sn.h_eff * rho[i]);
        d[i].noalias() += kI * (rho[i] * sm.h_eff_dag);
        d[i] += nonlinear * rho[i];
        if (feeder_[i] >= 0) {
            const Matrix& src = rho[static_cast<std::size_t>(feeder_[i])];
            for (std::size_t k = 0; k < sn.lower.size(); ++k) d[i].noalias() += sn.lower[k] * src * sm.lower[k].adjoint();
        }
    }
    return d;
}

void DensityPropagator::step() {
    const std::size_t nb = blocks_.size();
    std::vector<Matrix> y(nb), tmp(nb);
    for (std::size_t i = 0; i < nb; ++i) y[i] = blocks_[i].rho;

    const auto k1 = derivative(y);
    for (std::size_t i = 0; i < nb; ++i) tmp[i] = y[i] + 0.5 * dt_ * k1[i];
    const auto k2 = derivative(tmp);
    for (std::size_t i = 0; i < nb; ++i) tmp[i] = y[i] + 0.5 * dt_ * k2[i];
    const auto k3 = derivative(tmp);
    for (std::size_t i = 0; i < nb; ++i) tmp[i] = y[i] + dt_ * k3[i];
    const auto k4 = derivative(tmp);
    for (std::size_t i = 0; i < nb; ++i) blocks_[i].rho += (dt_ / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    ++steps_;
    finish_step();
}

void DensityPropagator::finish_step() {
    double tr = 0.0;
    for (const auto& blk : blocks_)
        if (blk.n == blk.m) tr += blk.rho.trace().real();
    raw_trace_ = tr;
    // RK4 keeps the trace exactly, so an unstable step shows up as runaway
    // elements instead; no density matrix has |rho_ij| > 1.
    double largest = 0.0;
    for (const auto& blk : blocks_) largest = std::max(largest, blk.rho.cwiseAbs().maxCoeff());
    if (!std::isfinite(tr) || std::abs(tr - 1.0) > max_drift_ || !(largest <= tr + max_drift_)) {
        std::ostringstream os;
        os << "integration diverged at t = " << time() << " us (trace " << tr << ", largest element " << largest
           << "); reduce dt (currently " << dt_ << " us)";
        throw NumericalError(os.str());
    }
    if (hermitize_) {
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            const auto j = static_cast<std::size_t>(partner_[i]);
            if (j < i) continue;
            if (j == i) {
                blocks_[i].rho = 0.5 * (blocks_[i].rho + blocks_[i].rho.adjoint()).eval();
            } else {
                const Matrix avg = 0.5 * (blocks_[i].rho + blocks_[j].rho.adjoint());
                blocks_[i].rho = avg;
                blocks_[j].rho = avg.adjoint();
            }
        }
    }
    if (renormalize_)
        for (auto& blk : blocks_) blk.rho /= tr;
}

Matrix DensityPropagator::matrix() const {
    const FockBasis& b = *basis_;
    const auto d = static_cast<Eigen::Index>(b.size());
    Matrix out = Matrix::Zero(d, d);
    for (const auto& blk : blocks_)
        out.block(sector_offset(b, blk.n), sector_offset(b, blk.m), blk.rho.rows(), blk.rho.cols()) = blk.rho;
    return out;
}

namespace {

DensityMatrix normalized(const BasisPtr& basis, const Matrix& raw) {
    Matrix m = 0.5 * (raw + raw.adjoint());
    m /= m.trace().real();
    return DensityMatrix(basis, std::move(m));
}

ObservableRecord observe(double t, double raw_trace, const DensityMatrix& rho, const EvolutionConfig& cfg,
                         const std::vector<NamedTarget>& targets) {
    ObservableRecord rec;
    rec.t = t;
    rec.trace = raw_trace;
    rec.mean_N = mean_particle_number(rho);
    for (const auto& target : targets) rec.fidelity.push_back(fidelity(rho, target.state));
    rec.coherence = cfg.record_coherence ? collective_coherence(rho, cfg.coherence_space)
                                         : std::numeric_limits<double>::quiet_NaN();
    rec.purity = purity(rho);
    rec.populations = populations(rho);
    return rec;
}

std::vector<std::string> labels_of(const std::vector<NamedTarget>& targets) {
    std::vector<std::string> out;
    for (const auto& t : targets) out.push_back(t.label);
    return out;
}

void check_targets(const BasisPtr& basis, const std::vector<NamedTarget>& targets) {
    for (const auto& t : targets)
        if (t.state.basis()->size() != basis->size())
            throw DomainError("target '" + t.label + "' lives in a different basis");
}

bool record_due(long k, long steps, int stride) { return k % stride == 0 || k == steps; }

}  // namespace

DensityMatrix DensityPropagator::state() const { return normalized(basis_, matrix()); }

Trajectory evolve(const DensityMatrix& rho0, const ModelParams& params, const EvolutionConfig& cfg,
                  const std::vector<NamedTarget>& targets) {
    check_targets(rho0.basis(), targets);
    DensityPropagator prop(rho0, params, cfg);
    const long steps = cfg.steps();
    std::vector<double> times;
    std::vector<ObservableRecord> records;
    auto record = [&] {
        records.push_back(observe(prop.time(), prop.raw_trace(), prop.state(), cfg, targets));
        times.push_back(prop.time());
    };
    record();
    for (long k = 1; k <= steps; ++k) {
        prop.step();
        if (record_due(k, steps, cfg.record_stride)) record();
    }
    return Trajectory{labels_of(targets), std::move(times), std::move(records), prop.state()};
}

Trajectory evolve(const KetState& psi0, const ModelParams& params, const EvolutionConfig& cfg,
                  const std::vector<NamedTarget>& targets) {
    if (params.lossy()) return evolve(DensityMatrix::pure(psi0), params, cfg, targets);
    cfg.validate();
    const BasisPtr& basis = psi0.basis();
    check_targets(basis, targets);
    const FockBasis& b = *basis;
    const DenseOperator h = build_hamiltonian(params, basis, cfg.frame);

    struct Segment {
        Eigen::Index offset;
        Matrix h;
        Vector psi;
    };
    std::vector<Segment> segs;
    for (int n = 0; n <= b.cutoff(); ++n) {
        const Eigen::Index off = sector_offset(b, n), dim = sector_size(b, n);
        const Vector part = psi0.amplitudes().segment(off, dim);
        if (part.cwiseAbs().maxCoeff() == 0.0) continue;
        segs.push_back({off, h.elements.block(off, off, dim, dim), part});
    }
    // Largest physical norm change per step comes from the gain/loss part of H.
    double gain = 0.0;
    for (const auto& s : segs) {
        const Matrix h2 = 0.5 * (s.h - s.h.adjoint());
        gain = std::max(gain, Eigen::JacobiSVD<Matrix>(h2).singularValues()(0));
    }

    const double dt = cfg.dt;
    const long steps = cfg.steps();
    auto full = [&] {
        Vector v = Vector::Zero(static_cast<Eigen::Index>(b.size()));
        for (const auto& s : segs) v.segment(s.offset, s.psi.size()) = s.psi;
        return v;
    };

    std::vector<double> times;
    std::vector<ObservableRecord> records;
    auto record = [&](long k) {
        const double t = static_cast<double>(k) * dt;
        records.push_back(observe(t, 1.0, DensityMatrix::pure(KetState(basis, full())), cfg, targets));
        times.push_back(t);
    };
    record(0);
    for (long k = 1; k <= steps; ++k) {
        double norm2 = 0.0;
        for (auto& s : segs) {
            const Vector k1 = -kI * (s.h * s.psi);
            const Vector k2 = -kI * (s.h * (s.psi + 0.5 * dt * k1));
            const Vector k3 = -kI * (s.h * (s.psi + 0.5 * dt * k2));
            const Vector k4 = -kI * (s.h * (s.psi + dt * k3));
            s.psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            norm2 += s.psi.squaredNorm();
        }
        const double bound = std::exp(2.0 * gain * dt);
        if (!std::isfinite(norm2) || norm2 > bound * (1.0 + cfg.max_trace_drift) ||
            norm2 < (1.0 - cfg.max_trace_drift) / bound) {
            std::ostringstream os;
            os << "integration diverged at t = " << static_cast<double>(k) * dt << " us (norm^2 " << norm2
               << " after one step); reduce dt (currently " << dt << " us)";
            throw NumericalError(os.str());
        }
        const double scale = 1.0 / std::sqrt(norm2);
        for (auto& s : segs) s.psi *= scale;
        if (record_due(k, steps, cfg.record_stride)) record(k);
    }
    return Trajectory{labels_of(targets), std::move(times), std::move(records),
                      DensityMatrix::pure(KetState(basis, full()))};
}

SteadyStateResult steady_state(const DensityMatrix& rho0, const ModelParams& params, const EvolutionConfig& cfg,
                               double window, double tolerance) {
    if (params.lossy()) throw DomainError("steady_state requires lossless parameters");
    if (!(window > 0.0) || !(tolerance > 0.0)) throw DomainError("steady_state: window and tolerance must be positive");
    DensityPropagator prop(rho0, params, cfg);
    const long steps = cfg.steps();
    const long window_steps = std::max(1L, std::lround(window / cfg.dt));
    Matrix anchor = prop.matrix();
    double anchor_t = 0.0;
    for (long k = 1; k <= steps; ++k) {
        prop.step();
        if (k % window_steps != 0) continue;
        Matrix now = prop.matrix();
        if ((now - anchor).cwiseAbs().maxCoeff() < tolerance) return {prop.state(), anchor_t, true};
        anchor = std::move(now);
        anchor_t = prop.time();
    }
    return {prop.state(), prop.time(), false};
}

DensityMatrix mixed_initial_state(const BasisPtr& basis, const std::vector<std::pair<KetState, double>>& components) {
    if (components.empty()) throw DomainError("mixed_initial_state: no components");
    const auto d = static_cast<Eigen::Index>(basis->size());
    Matrix m = Matrix::Zero(d, d);
    double total = 0.0;
    for (const auto& [ket, w] : components) {
        if (ket.basis()->size() != basis->size()) throw DomainError("mixed_initial_state: basis mismatch");
        if (!(w >= 0.0)) throw DomainError("mixed_initial_state: weights must be non-negative");
        m += w * ket.amplitudes() * ket.amplitudes().adjoint();
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-10) {
        std::ostringstream os;
        os << "mixed_initial_state: weights sum to " << total << ", expected 1";
        throw DomainError(os.str());
    }
    m = 0.5 * (m + m.adjoint()).eval();
    m /= m.trace().real();
    return DensityMatrix(basis, std::move(m));
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const std::vector<Occupation>& population_states) {
    const FockBasis& b = *traj.final_rho.basis();
    std::vector<std::size_t> cols;
    if (population_states.empty()) {
        for (std::size_t i = 0; i < b.size(); ++i) cols.push_back(i);
    } else {
        for (const auto& occ : population_states) cols.push_back(b.index_of(occ));
    }
    os << "t_us,trace,mean_N";
    for (const auto& label : traj.target_labels) os << ",fidelity_" << label;
    os << ",coherence,purity";
    for (std::size_t i : cols) os << ",pop_" << b.state(i).label();
    os << '\n';
    const auto old_precision = os.precision(12);
    for (const auto& r : traj.records) {
        os << r.t << ',' << r.trace << ',' << r.mean_N;
        for (double f : r.fidelity) os << ',' << f;
        os << ',';
        if (std::isfinite(r.coherence)) os << r.coherence;
        os << ',' << r.purity;
        for (std::size_t i : cols) os << ',' << r.populations[i];
        os << '\n';
    }
    os.precision(old_precision);
}

}  // namespace ptmag
