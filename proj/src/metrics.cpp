#include "ptmag/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "ptmag/error.hpp"

namespace ptmag {

namespace {

constexpr double kEigenFloor = 1e-12;

double entropy_of(const Eigen::VectorXd& eigenvalues, LogBase base) {
    double s = 0.0;
    for (double l : eigenvalues)
        if (l > kEigenFloor) s -= l * std::log(l);
    return base == LogBase::two ? s / std::log(2.0) : s;
}

double entropy_of_diagonal(const Matrix& m, LogBase base) {
    return entropy_of(m.diagonal().real(), base);
}

bool is_diagonal(const Matrix& m) {
    const double tol = 1e-14 * std::max(1.0, m.cwiseAbs().maxCoeff());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (i != j && std::abs(m(i, j)) > tol) return false;
    return true;
}

struct DisjointSets {
    std::vector<Eigen::Index> parent;
    explicit DisjointSets(Eigen::Index n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), Eigen::Index{0});
    }
    Eigen::Index find(Eigen::Index x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(Eigen::Index x, Eigen::Index y) { parent[find(x)] = find(y); }
};

// Entropy of a Hermitian matrix, diagonalizing each connected component of
// its sparsity pattern separately. States evolved under number-conserving
// dynamics are block diagonal, so this is much cheaper than one dense solve.
double block_entropy(const Matrix& m, LogBase base) {
    const Eigen::Index n = m.rows();
    const double tol = 1e-15 * std::max(1.0, m.cwiseAbs().maxCoeff());
    DisjointSets sets(n);
    std::vector<bool> active(static_cast<std::size_t>(n), false);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(m(i, j)) <= tol) continue;
            active[i] = active[j] = true;
            if (i != j) sets.unite(i, j);
        }
    }
    std::vector<std::vector<Eigen::Index>> groups(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        if (active[i]) groups[sets.find(i)].push_back(i);

    double s = 0.0;
    for (const auto& idx : groups) {
        if (idx.empty()) continue;
        const auto k = static_cast<Eigen::Index>(idx.size());
        if (k == 1) {
            Eigen::VectorXd l(1);
            l[0] = m(idx[0], idx[0]).real();
            s += entropy_of(l, base);
            continue;
        }
        Matrix sub(k, k);
        for (Eigen::Index a = 0; a < k; ++a)
            for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = m(idx[a], idx[b]);
        Eigen::SelfAdjointEigenSolver<Matrix> solver(sub, Eigen::EigenvaluesOnly);
        s += entropy_of(solver.eigenvalues(), base);
    }
    return s;
}

double marginal_entropy(const Matrix& m, LogBase base) {
    if (is_diagonal(m)) return entropy_of_diagonal(m, base);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    return entropy_of(solver.eigenvalues(), base);
}

}  // namespace

double fidelity(const DensityMatrix& rho, const KetState& target) {
    if (rho.basis()->size() != target.basis()->size()) throw DomainError("fidelity: basis mismatch");
    const Vector& phi = target.amplitudes();
    const double overlap = phi.dot(rho.elements() * phi).real();
    return std::clamp(std::sqrt(std::max(overlap, 0.0)), 0.0, 1.0);
}

double von_neumann_entropy(const Matrix& hermitian, LogBase base) { return block_entropy(hermitian, base); }

double von_neumann_entropy(const DensityMatrix& rho, LogBase base) {
    return block_entropy(rho.elements(), base);
}

CoherenceResult collective_coherence_detail(const DensityMatrix& rho, CoherenceSpace space, LogBase base) {
    const double s_rho = von_neumann_entropy(rho, base);
    CoherenceResult out;
    double inner = 0.0;

    if (space == CoherenceSpace::truncated) {
        const ProductOfMarginals prod = product_state_of_marginals(rho);
        const Matrix mix = 0.5 * (rho.elements() + prod.rho_pi.elements());
        inner = block_entropy(mix, base) - 0.5 * (s_rho + von_neumann_entropy(prod.rho_pi, base));
        out.discarded_weight = prod.discarded_weight();
        out.flagged = out.discarded_weight > 1e-6;
    } else {
        const FockBasis& basis = *rho.basis();
        const std::array<Matrix, 3> ms{marginal(rho, Mode::a), marginal(rho, Mode::b), marginal(rho, Mode::c)};
        // Levels a marginal never populates carry zero rows/columns (it is
        // positive semidefinite), so the product space is spanned by the
        // occupied levels of each mode alone.
        std::array<std::vector<int>, 3> levels;
        std::array<std::vector<Eigen::Index>, 3> slot;
        for (int k = 0; k < 3; ++k) {
            slot[k].assign(static_cast<std::size_t>(basis.cutoff() + 1), -1);
            for (int n = 0; n <= basis.cutoff(); ++n)
                if (ms[k](n, n).real() > 0.0) {
                    slot[k][n] = static_cast<Eigen::Index>(levels[k].size());
                    levels[k].push_back(n);
                }
        }
        const Eigen::Index sa = static_cast<Eigen::Index>(levels[0].size());
        const Eigen::Index sb = static_cast<Eigen::Index>(levels[1].size());
        const Eigen::Index sc = static_cast<Eigen::Index>(levels[2].size());
        auto flat = [&](Eigen::Index ia, Eigen::Index ib, Eigen::Index ic) { return (ia * sb + ib) * sc + ic; };

        Matrix mix(sa * sb * sc, sa * sb * sc);
        for (Eigen::Index ia = 0; ia < sa; ++ia)
            for (Eigen::Index ib = 0; ib < sb; ++ib)
                for (Eigen::Index ic = 0; ic < sc; ++ic) {
                    const Eigen::Index i = flat(ia, ib, ic);
                    for (Eigen::Index ja = 0; ja < sa; ++ja)
                        for (Eigen::Index jb = 0; jb < sb; ++jb)
                            for (Eigen::Index jc = 0; jc < sc; ++jc)
                                mix(i, flat(ja, jb, jc)) = 0.5 * ms[0](levels[0][ia], levels[0][ja]) *
                                                          ms[1](levels[1][ib], levels[1][jb]) *
                                                          ms[2](levels[2][ic], levels[2][jc]);
                }
        // Basis states outside the occupied levels have (numerically) zero rows in rho.
        const Matrix& r = rho.elements();
        std::vector<std::pair<Eigen::Index, Eigen::Index>> placed;  // (rho index, product index)
        for (std::size_t i = 0; i < basis.size(); ++i) {
            const Occupation& o = basis.state(i);
            const Eigen::Index a = slot[0][o.a], b = slot[1][o.b], c = slot[2][o.c];
            if (a >= 0 && b >= 0 && c >= 0) placed.emplace_back(static_cast<Eigen::Index>(i), flat(a, b, c));
        }
        for (const auto& [i, fi] : placed)
            for (const auto& [j, fj] : placed) mix(fi, fj) += 0.5 * r(i, j);
        double s_pi = 0.0;
        for (const auto& m : ms) s_pi += marginal_entropy(m, base);
        inner = block_entropy(mix, base) - 0.5 * (s_rho + s_pi);
    }
    out.value = std::sqrt(std::max(inner, 0.0));
    return out;
}

double collective_coherence(const DensityMatrix& rho, CoherenceSpace space, LogBase base) {
    return collective_coherence_detail(rho, space, base).value;
}

double mean_particle_number(const DensityMatrix& rho) {
    const FockBasis& basis = *rho.basis();
    double n = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i)
        n += basis.state(i).total() * rho.elements()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    return n;
}

double purity(const DensityMatrix& rho) {
    // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return rho.elements().squaredNorm();
}

std::vector<double> populations(const DensityMatrix& rho) {
    const Eigen::VectorXd d = rho.elements().diagonal().real();
    return {d.data(), d.data() + d.size()};
}

}  // namespace ptmag
