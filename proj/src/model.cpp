#include "ptmag/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "ptmag/error.hpp"
#include "ptmag/log.hpp"

namespace ptmag {

double ModelParams::delta() const {
    if (g == 0.0) throw DomainError("detuning Delta is undefined for g = 0");
    return (nu_a - nu_c) / (2.0 * g);
}

void ModelParams::set_delta(double value) { nu_c = nu_a - 2.0 * g * value; }

void ModelParams::validate() const {
    const std::pair<const char*, double> fields[] = {
        {"nu_a", nu_a}, {"nu_b", nu_b}, {"nu_c", nu_c},       {"g", g},
        {"r", r},       {"kappa_a", kappa_a}, {"kappa_b", kappa_b}, {"gamma_m", gamma_m},
    };
    for (const auto& [name, value] : fields) {
        if (!std::isfinite(value)) throw DomainError(std::string(name) + " is not finite");
        if (value < 0.0) throw DomainError(std::string(name) + " must be non-negative");
    }
    if (!std::isfinite(phi) || !std::isfinite(theta)) throw DomainError("phases must be finite");
    if (frame_nu && (!std::isfinite(*frame_nu) || *frame_nu < 0.0))
        throw DomainError("frame_nu must be finite and non-negative");
}

ModelParams canonical_params() { return ModelParams{}; }

LossRates lindblad_rates(const ModelParams& p) {
    return {2.0 * angular(p.kappa_a), 2.0 * angular(p.kappa_b), 2.0 * angular(p.gamma_m)};
}

DenseOperator build_hamiltonian(const ModelParams& p, const BasisPtr& basis, bool frame) {
    p.validate();
    const Matrix a = mode_annihilator(basis, Mode::a).elements;
    const Matrix b = mode_annihilator(basis, Mode::b).elements;
    const Matrix c = mode_annihilator(basis, Mode::c).elements;
    const Matrix ad = a.adjoint();
    const Matrix bd = b.adjoint();
    const Matrix cd = c.adjoint();

    const auto d = static_cast<Eigen::Index>(basis->size());
    Matrix h = Matrix::Zero(d, d);
    const double shift = frame ? p.frame_omega() : 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        const Occupation& s = basis->state(static_cast<std::size_t>(i));
        h(i, i) = (p.omega_a() - shift) * s.a + (p.omega_b() - shift) * s.b + (p.omega_c() - shift) * s.c;
    }
    const double g = p.coupling_g();
    const double r = p.coupling_r();
    h += g * (std::polar(1.0, p.phi) * (cd * a) + ad * c);
    h += r * (std::polar(1.0, p.theta) * (bd * a) + std::polar(1.0, -p.theta) * (ad * b));
    return {basis, std::move(h)};
}

std::pair<DenseOperator, DenseOperator> split_hermitian(const DenseOperator& h) {
    if (h.elements.rows() != h.elements.cols()) throw DomainError("split_hermitian: operator is not square");
    const Matrix hd = h.elements.adjoint();
    return {DenseOperator{h.basis, 0.5 * (h.elements + hd)}, DenseOperator{h.basis, 0.5 * (h.elements - hd)}};
}

DenseOperator build_effective_hamiltonian(const ModelParams& p, const BasisPtr& basis) {
    p.validate();
    if (std::abs(p.nu_a - p.nu_b) > 1e-12 * std::max(1.0, std::abs(p.nu_a)))
        throw DomainError("effective Hamiltonian requires nu_a == nu_b");
    const double detuning = std::abs(p.nu_a - p.nu_c - p.r);
    if (detuning < 10.0 * p.g) {
        std::ostringstream os;
        os << "large-detuning condition is weak: |nu - nu_c - r| = " << detuning << " MHz < 10 g = " << 10.0 * p.g
           << " MHz";
        warn(os.str());
    }
    const Matrix a = mode_annihilator(basis, Mode::a).elements;
    const Matrix b = mode_annihilator(basis, Mode::b).elements;
    const Matrix c = mode_annihilator(basis, Mode::c).elements;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const Matrix A1 = inv_sqrt2 * (a + std::polar(1.0, -p.theta) * b);
    const Matrix A1d = A1.adjoint();
    const double g_eff = p.coupling_g() * inv_sqrt2;
    Matrix h = g_eff * (A1d * c + std::polar(1.0, p.phi) * (c.adjoint() * A1));
    return {basis, std::move(h)};
}

KetState target_state(const BasisPtr& basis, int n, double theta) {
    if (n < 1 || n > 3) throw DomainError("target_state supports n = 1, 2, 3 (got " + std::to_string(n) + ")");
    if (n > basis->cutoff()) throw DomainError("target_state: n exceeds the basis cutoff");
    auto t = [&](int photons, int magnons) { return nonlocal_amplitudes(*basis, photons, magnons, theta); };
    const double s2 = std::sqrt(2.0);
    const double s3 = std::sqrt(3.0);
    Vector v;
    switch (n) {
        case 1: v = (t(1, 0) + kI * t(0, 1)) / s2; break;
        case 2: v = 0.5 * t(2, 0) + (kI / s2) * t(1, 1) - 0.5 * t(0, 2); break;
        default: v = (s2 / 4.0) * (s3 * t(1, 2) - kI * s3 * t(2, 1) - t(3, 0) + kI * t(0, 3)); break;
    }
    return KetState(basis, std::move(v));
}

namespace {

Vector fix_global_phase(Vector v) {
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    const Complex ref = v[k];
    if (std::abs(ref) > 0.0) v *= std::conj(ref) / std::abs(ref);
    return v;
}

}  // namespace

KetState gain_mode_state(const ModelParams& p, const BasisPtr& basis, int n) {
    if (n < 1 || n > basis->cutoff()) throw DomainError("gain_mode_state: n outside 1..cutoff");
    const DenseOperator h = build_hamiltonian(p, basis, false);
    const auto off = static_cast<Eigen::Index>(basis->block_offset(n));
    const auto dim = static_cast<Eigen::Index>(basis->block_size(n));
    const Matrix block = h.elements.block(off, off, dim, dim);

    Eigen::ComplexEigenSolver<Matrix> solver(block, true);
    if (solver.info() != Eigen::Success) throw NumericalError("eigensolver failed on number sector");
    const Vector& values = solver.eigenvalues();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
    for (Eigen::Index i = 0; i < dim; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return values[x].imag() > values[y].imag(); });

    const double eps = 1e-4 * std::max(p.coupling_g(), 1e-9 * block.cwiseAbs().maxCoeff());
    const Complex top = values[order[0]];
    if (top.imag() < eps)
        throw NumericalError("number sector " + std::to_string(n) +
                             " has a real spectrum (PT-symmetric): no unique attractor");
    if (dim > 1 && top.imag() - values[order[1]].imag() < eps)
        throw NumericalError("gain eigenvalue of sector " + std::to_string(n) + " is degenerate");

    // Polish the Schur eigenvector with a few steps of inverse iteration.
    Vector x = solver.eigenvectors().col(order[0]).normalized();
    const double scale = std::max(1.0, std::abs(top));
    const Complex shift = top + Complex(1e-10 * scale, 1e-10 * scale);
    const Eigen::PartialPivLU<Matrix> lu(block - shift * Matrix::Identity(dim, dim));
    for (int it = 0; it < 3; ++it) {
        Vector y = lu.solve(x);
        const double norm = y.norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) break;
        x = y / norm;
    }

    Vector full = Vector::Zero(static_cast<Eigen::Index>(basis->size()));
    full.segment(off, dim) = fix_global_phase(x);
    return KetState(basis, std::move(full));
}

CircuitDerived params_from_circuit(const CircuitParams& c, const ModelParams& base) {
    const std::pair<const char*, double> fields[] = {
        {"L_a", c.L_a}, {"L_b", c.L_b}, {"L_m", c.L_m}, {"C_a", c.C_a}, {"C_b", c.C_b},
        {"C_m", c.C_m}, {"R_a", c.R_a}, {"R_b", c.R_b}, {"R_m", c.R_m}, {"C_coupling", c.C_coupling},
        {"Z0", c.Z0},
    };
    for (const auto& [name, value] : fields) {
        if (!(value > 0.0) || !std::isfinite(value))
            throw DomainError(std::string("circuit element ") + name + " must be strictly positive");
    }
    for (double host : {c.C_a, c.C_b}) {
        if (c.C_coupling / host > 0.1) {
            warn("inter-cavity capacitance is not much smaller than the cavity capacitance (ratio " +
                 std::to_string(c.C_coupling / host) + ")");
            break;
        }
    }

    CircuitDerived out{};
    out.omega_a = 1.0 / std::sqrt(c.L_a * c.C_a);
    out.omega_b = 1.0 / std::sqrt(c.L_b * c.C_b);
    out.omega_c = 1.0 / std::sqrt(c.L_m * c.C_m);
    out.gamma_a = c.R_a / (2.0 * c.L_a * out.omega_a);
    out.gamma_b = c.R_b / (2.0 * c.L_b * out.omega_b);
    out.gamma_m = c.R_m / (2.0 * c.L_m * out.omega_c);
    out.r = 2.0 * c.Z0 * c.C_coupling * out.omega_a * out.omega_b;

    constexpr double to_mhz = 1.0 / (kTwoPi * 1e6);
    out.params = base;
    out.params.nu_a = out.omega_a * to_mhz;
    out.params.nu_b = out.omega_b * to_mhz;
    out.params.nu_c = out.omega_c * to_mhz;
    out.params.r = out.r * to_mhz;
    out.params.kappa_a = out.gamma_a * out.omega_a * to_mhz;
    out.params.kappa_b = out.gamma_b * out.omega_b * to_mhz;
    out.params.gamma_m = out.gamma_m * out.omega_c * to_mhz;
    return out;
}

double coupling_capacitance_for(double r_mhz, double nu_a_mhz, double nu_b_mhz, double z0) {
    const double wa = kTwoPi * 1e6 * nu_a_mhz;
    const double wb = kTwoPi * 1e6 * nu_b_mhz;
    return kTwoPi * 1e6 * r_mhz / (2.0 * z0 * wa * wb);
}

double phase_from_reaction_field(double delta, double Phi) {
    return 2.0 * std::atan(-delta * std::sin(Phi) / (1.0 + delta * std::cos(Phi)));
}

}  // namespace ptmag
