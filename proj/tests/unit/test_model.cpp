#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "ptmag/error.hpp"
#include "ptmag/log.hpp"
#include "ptmag/model.hpp"

using namespace ptmag;

namespace {

constexpr double pi = std::numbers::pi;

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

std::vector<Complex> block_eigenvalues(const Matrix& h, const FockBasis& b, int n) {
    const auto off = static_cast<Eigen::Index>(b.block_offset(n));
    const auto dim = static_cast<Eigen::Index>(b.block_size(n));
    Eigen::ComplexEigenSolver<Matrix> es(h.block(off, off, dim, dim), false);
    return {es.eigenvalues().data(), es.eigenvalues().data() + dim};
}

// Largest relative distance after pairing each value of `a` with the closest
// unused value of `b` shifted by `shift`.
double multiset_distance(const std::vector<Complex>& a, const std::vector<Complex>& b, Complex shift = 0.0) {
    std::vector<bool> used(b.size(), false);
    double worst = 0.0;
    for (const Complex& x : a) {
        std::size_t best = b.size();
        for (std::size_t k = 0; k < b.size(); ++k)
            if (!used[k] && (best == b.size() || std::abs(b[k] + shift - x) < std::abs(b[best] + shift - x))) best = k;
        used[best] = true;
        worst = std::max(worst, std::abs(b[best] + shift - x) / std::abs(x));
    }
    return worst;
}

struct WarningCapture {
    std::vector<std::string> seen;
    WarningHandler previous;
    WarningCapture() {
        previous = set_warning_handler([this](const std::string& m) { seen.push_back(m); });
    }
    ~WarningCapture() { set_warning_handler(previous); }
};

}  // namespace

TEST_CASE("uncoupled Hamiltonian is diagonal") {
    ModelParams p;
    p.g = 0.0;
    p.r = 0.0;
    const auto basis = make_basis(3);
    const Matrix h = build_hamiltonian(p, basis, false).elements;
    for (std::size_t i = 0; i < basis->size(); ++i) {
        const Occupation& s = basis->state(i);
        const double expect = s.a * p.omega_a() + s.b * p.omega_b() + s.c * p.omega_c();
        CHECK(std::abs(h(i, i) - expect) < 1e-9);
    }
    CHECK(max_abs(h - Matrix(h.diagonal().asDiagonal())) == 0.0);
}

TEST_CASE("Hermitian exactly when phi is a multiple of 2 pi") {
    const auto basis = make_basis(3);
    for (double phi : {0.0, 2.0 * pi, -2.0 * pi}) {
        ModelParams p;
        p.phi = phi;
        const Matrix h = build_hamiltonian(p, basis, true).elements;
        CHECK(max_abs(h - h.adjoint()) < 1e-12);
    }
    for (double phi : {pi, 0.5 * pi, 0.1}) {
        ModelParams p;
        p.phi = phi;
        const Matrix h = build_hamiltonian(p, basis, true).elements;
        CHECK(max_abs(h - h.adjoint()) > 1e-3);
    }
}

TEST_CASE("H commutes with the total number") {
    const auto basis = make_basis(4);
    const Matrix n = total_number_operator(basis).elements;
    for (double phi : {0.0, pi, 1.3}) {
        ModelParams p;
        p.phi = phi;
        p.theta = 0.7;
        const Matrix h = build_hamiltonian(p, basis, false).elements;
        CHECK(max_abs(h * n - n * h) == 0.0);
    }
}

TEST_CASE("top sector is fully coupled") {
    // Normal ordering keeps the N = cutoff block intact.
    const auto basis = make_basis(2);
    const Matrix h = build_hamiltonian(canonical_params(), basis, true).elements;
    const Complex hop = h(basis->index_of({0, 1, 1}), basis->index_of({1, 0, 1}));
    CHECK(std::abs(hop) > 1.0);
    const Complex to_magnon = h(basis->index_of({0, 0, 2}), basis->index_of({1, 0, 1}));
    CHECK(std::abs(std::abs(to_magnon) - std::sqrt(2.0) * canonical_params().coupling_g()) < 1e-12);
}

TEST_CASE("split into Hermitian and anti-Hermitian parts") {
    const auto basis = make_basis(3);
    SUBCASE("generic") {
        const DenseOperator h = build_hamiltonian(canonical_params(), basis, true);
        const auto [h1, h2] = split_hermitian(h);
        CHECK(max_abs(h1.elements - h1.elements.adjoint()) == 0.0);
        CHECK(max_abs(h2.elements + h2.elements.adjoint()) == 0.0);
        CHECK(max_abs(h1.elements + h2.elements - h.elements) < 1e-12);
    }
    SUBCASE("Hermitian input") {
        ModelParams p;
        p.phi = 0.0;
        const auto [h1, h2] = split_hermitian(build_hamiltonian(p, basis, true));
        CHECK(max_abs(h2.elements) < 1e-12);
    }
    SUBCASE("phi = pi leaves only the magnon hop in H2") {
        const ModelParams p = canonical_params();
        const auto [h1, h2] = split_hermitian(build_hamiltonian(p, basis, true));
        const Matrix a = mode_annihilator(basis, Mode::a).elements;
        const Matrix c = mode_annihilator(basis, Mode::c).elements;
        const Matrix expect = p.coupling_g() * (a.adjoint() * c - c.adjoint() * a);
        CHECK(max_abs(h2.elements - expect) < 1e-12);
    }
}

TEST_CASE("spectrum is independent of theta") {
    const auto basis = make_basis(3);
    ModelParams p = canonical_params();
    std::vector<std::vector<Complex>> ref;
    for (double theta : {0.0, 0.3 * pi, 1.1 * pi}) {
        p.theta = theta;
        const Matrix h = build_hamiltonian(p, basis, false).elements;
        std::vector<std::vector<Complex>> w;
        for (int n = 1; n <= 3; ++n) w.push_back(block_eigenvalues(h, *basis, n));
        if (ref.empty()) {
            ref = w;
            continue;
        }
        for (std::size_t n = 0; n < w.size(); ++n) CHECK(multiset_distance(w[n], ref[n]) < 1e-9);
    }
}

TEST_CASE("frame shift moves each sector rigidly") {
    const auto basis = make_basis(3);
    const ModelParams p = canonical_params();
    const Matrix lab = build_hamiltonian(p, basis, false).elements;
    const Matrix rot = build_hamiltonian(p, basis, true).elements;
    for (int n = 1; n <= 3; ++n) {
        const auto wl = block_eigenvalues(lab, *basis, n);
        const auto wr = block_eigenvalues(rot, *basis, n);
        CHECK(multiset_distance(wl, wr, n * p.frame_omega()) < 1e-9);
    }
    // rotating-frame H differs from lab H by a multiple of the identity per
    // sector, so eigenvectors coincide.
    const Matrix diff = lab - rot - p.frame_omega() * total_number_operator(basis).elements;
    CHECK(max_abs(diff) < 1e-9);
}

TEST_CASE("effective Hamiltonian") {
    const auto basis = make_basis(3);
    const ModelParams p = canonical_params();
    const Matrix h = build_effective_hamiltonian(p, basis).elements;
    SUBCASE("N=1 matrix element is g/sqrt2") {
        const Vector k10 = nonlocal_amplitudes(*basis, 1, 0, p.theta);
        const Vector k01 = nonlocal_amplitudes(*basis, 0, 1, p.theta);
        const Complex elem = k10.dot(h * k01);
        CHECK(std::abs(elem - p.coupling_g() / std::sqrt(2.0)) < 1e-12);
    }
    SUBCASE("conserves N") {
        const Matrix n = total_number_operator(basis).elements;
        CHECK(max_abs(h * n - n * h) < 1e-12);
    }
    SUBCASE("vanishes for g = 0") {
        ModelParams q = p;
        q.g = 0.0;
        CHECK(max_abs(build_effective_hamiltonian(q, basis).elements) == 0.0);
    }
    SUBCASE("requires degenerate photons") {
        ModelParams q = p;
        q.nu_b += 1.0;
        CHECK_THROWS_AS(build_effective_hamiltonian(q, basis), DomainError);
    }
    SUBCASE("warns when the detuning is not large") {
        WarningCapture cap;
        build_effective_hamiltonian(p, basis);
        CHECK(cap.seen.empty());
        ModelParams q = p;
        q.g = 300.0;
        build_effective_hamiltonian(q, basis);
        CHECK(cap.seen.size() == 1);
    }
}

TEST_CASE("target states") {
    const double theta = 1.1 * pi;
    const auto basis = make_basis(3);
    SUBCASE("phi1 in the Fock basis") {
        const KetState t = target_state(basis, 1, theta);
        CHECK(std::abs(t.amplitude({1, 0, 0}) - 0.5) < 1e-15);
        CHECK(std::abs(t.amplitude({0, 1, 0}) - 0.5 * std::polar(1.0, theta)) < 1e-15);
        CHECK(std::abs(t.amplitude({0, 0, 1}) - kI / std::sqrt(2.0)) < 1e-15);
    }
    SUBCASE("phi3 in the nonlocal basis") {
        const KetState t = target_state(basis, 3, theta);
        auto c = [&](int n, int m) { return nonlocal_amplitudes(*basis, n, m, theta).dot(t.amplitudes()); };
        const double s = std::sqrt(2.0) / 4.0;
        CHECK(std::abs(c(1, 2) - s * std::sqrt(3.0)) < 1e-14);
        CHECK(std::abs(c(2, 1) + kI * s * std::sqrt(3.0)) < 1e-14);
        CHECK(std::abs(c(3, 0) + s) < 1e-14);
        CHECK(std::abs(c(0, 3) - kI * s) < 1e-14);
    }
    SUBCASE("phi2 components") {
        const KetState t = target_state(basis, 2, theta);
        auto c = [&](int n, int m) { return nonlocal_amplitudes(*basis, n, m, theta).dot(t.amplitudes()); };
        CHECK(std::abs(c(2, 0) - 0.5) < 1e-14);
        CHECK(std::abs(std::abs(c(1, 1)) - 1.0 / std::sqrt(2.0)) < 1e-14);
        CHECK(std::abs(c(0, 2) + 0.5) < 1e-14);
    }
    SUBCASE("unsupported n") {
        CHECK_THROWS_AS(target_state(basis, 4, theta), DomainError);
        CHECK_THROWS_AS(target_state(basis, 0, theta), DomainError);
        CHECK_THROWS_AS(target_state(make_basis(2), 3, theta), DomainError);
    }
}

TEST_CASE("gain mode agrees with the closed-form targets") {
    const auto basis = make_basis(3);
    const ModelParams p = canonical_params();
    for (int n = 1; n <= 3; ++n) {
        const KetState gain = gain_mode_state(p, basis, n);
        CHECK(gain.overlap(target_state(basis, n, p.theta)) >= 0.99);
    }
}

TEST_CASE("gain mode is undefined in the PT-symmetric phase") {
    ModelParams p = canonical_params();
    p.nu_a = p.nu_b = p.nu_c = 6000.0;
    CHECK_THROWS_AS(gain_mode_state(p, make_basis(1), 1), NumericalError);
    CHECK_THROWS_AS(gain_mode_state(canonical_params(), make_basis(1), 2), DomainError);
}

TEST_CASE("parameter validation") {
    ModelParams p;
    p.kappa_a = -1.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = ModelParams{};
    p.g = 0.0;
    CHECK_THROWS_AS((void)p.delta(), DomainError);
    p = canonical_params();
    p.set_delta(1.5);
    CHECK(std::abs(p.delta() - 1.5) < 1e-12);
    CHECK(p.nu_a == 5950.0);
}

TEST_CASE("circuit mapping") {
    SUBCASE("unit elements") {
        CircuitParams c{1, 1, 1, 1, 1, 1, 2, 2, 2, 0.05, 50};
        const CircuitDerived d = params_from_circuit(c);
        CHECK(std::abs(d.omega_a - 1.0) < 1e-15);
        CHECK(std::abs(d.gamma_a - 1.0) < 1e-15);
        CHECK(std::abs(d.gamma_m - 1.0) < 1e-15);
        CHECK(std::abs(d.params.kappa_a - 1.0 / (2.0 * pi * 1e6)) < 1e-18);
    }
    SUBCASE("inter-cavity capacitance round trip") {
        const double nu = 6000.0;
        const double cc = coupling_capacitance_for(50.0, nu, nu, 50.0);
        const double w = 2.0 * pi * nu * 1e6;
        CHECK(std::abs(cc - 2.0 * pi * 50e6 / (2.0 * 50.0 * w * w)) < 1e-30);
        // cavities resonating at 6 GHz with 1 pF
        const double C = 1e-12, L = 1.0 / (w * w * C);
        CircuitParams c{L, L, L, C, C, C, 0.1, 0.1, 0.1, cc, 50.0};
        const CircuitDerived d = params_from_circuit(c);
        CHECK(std::abs(d.params.nu_a - nu) < 1e-6);
        CHECK(std::abs(d.params.r - 50.0) < 1e-9);
    }
    SUBCASE("errors and warnings") {
        CircuitParams bad{1, 1, 1, 1, 1, 1, 0, 2, 2, 0.05, 50};
        CHECK_THROWS_AS(params_from_circuit(bad), DomainError);
        WarningCapture cap;
        CircuitParams big{1, 1, 1, 1, 1, 1, 2, 2, 2, 0.5, 50};
        params_from_circuit(big);
        CHECK(cap.seen.size() == 1);
    }
}

TEST_CASE("reaction-field phase helper") {
    CHECK(phase_from_reaction_field(0.0, 1.0) == 0.0);
    CHECK(std::abs(phase_from_reaction_field(1.0, pi / 2) - 2.0 * std::atan(-1.0)) < 1e-15);
}
