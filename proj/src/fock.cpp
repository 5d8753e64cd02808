#include "ptmag/fock.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ptmag/error.hpp"

namespace ptmag {

char mode_name(Mode m) {
    switch (m) {
        case Mode::a: return 'a';
        case Mode::b: return 'b';
        case Mode::c: return 'c';
    }
    return '?';
}

int Occupation::operator[](Mode m) const {
    switch (m) {
        case Mode::a: return a;
        case Mode::b: return b;
        case Mode::c: return c;
    }
    return 0;
}

int& Occupation::operator[](Mode m) {
    switch (m) {
        case Mode::a: return a;
        case Mode::b: return b;
        default: return c;
    }
}

std::string Occupation::label() const {
    std::ostringstream os;
    os << a << b << c;
    return os.str();
}

std::size_t basis_dimension(int cutoff) {
    const auto n = static_cast<std::size_t>(cutoff);
    return (n + 1) * (n + 2) * (n + 3) / 6;
}

FockBasis::FockBasis(int cutoff) : cutoff_(cutoff) {
    if (cutoff < 0) throw DomainError("Fock cutoff must be non-negative");
    const auto side = static_cast<std::size_t>(cutoff + 1);
    lookup_.assign(side * side * side, -1);
    states_.reserve(basis_dimension(cutoff));
    for (int total = 0; total <= cutoff; ++total) {
        block_offsets_.push_back(states_.size());
        for (int na = 0; na <= total; ++na) {
            for (int nb = 0; na + nb <= total; ++nb) {
                const Occupation occ{na, nb, total - na - nb};
                lookup_[(static_cast<std::size_t>(occ.a) * side + occ.b) * side + occ.c] =
                    static_cast<std::ptrdiff_t>(states_.size());
                states_.push_back(occ);
            }
        }
    }
    block_offsets_.push_back(states_.size());
}

std::optional<std::size_t> FockBasis::find(const Occupation& occ) const {
    if (occ.a < 0 || occ.b < 0 || occ.c < 0 || occ.total() > cutoff_) return std::nullopt;
    const auto side = static_cast<std::size_t>(cutoff_ + 1);
    const auto idx = lookup_[(static_cast<std::size_t>(occ.a) * side + occ.b) * side + occ.c];
    return static_cast<std::size_t>(idx);
}

std::size_t FockBasis::index_of(const Occupation& occ) const {
    if (auto idx = find(occ)) return *idx;
    throw DomainError("occupation |" + occ.label() + "> is outside the truncated basis (cutoff " +
                      std::to_string(cutoff_) + ")");
}

std::size_t FockBasis::block_offset(int total) const {
    if (total < 0 || total > cutoff_) throw DomainError("number sector outside cutoff");
    return block_offsets_[static_cast<std::size_t>(total)];
}

std::size_t FockBasis::block_size(int total) const {
    if (total < 0 || total > cutoff_) throw DomainError("number sector outside cutoff");
    const auto t = static_cast<std::size_t>(total);
    return block_offsets_[t + 1] - block_offsets_[t];
}

BasisPtr make_basis(int cutoff) { return std::make_shared<const FockBasis>(cutoff); }

KetState::KetState(BasisPtr basis, Vector amplitudes)
    : basis_(std::move(basis)), amplitudes_(std::move(amplitudes)) {
    if (!basis_) throw DomainError("ket needs a basis");
    if (static_cast<std::size_t>(amplitudes_.size()) != basis_->size())
        throw DomainError("ket dimension does not match basis");
    const double norm = amplitudes_.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw DomainError("ket has zero or non-finite norm");
    amplitudes_ /= norm;
}

Complex KetState::amplitude(const Occupation& occ) const {
    if (auto idx = basis_->find(occ)) return amplitudes_[static_cast<Eigen::Index>(*idx)];
    return {};
}

double KetState::overlap(const KetState& other) const {
    if (other.amplitudes_.size() != amplitudes_.size())
        throw DomainError("overlap between kets of different bases");
    return std::norm(amplitudes_.dot(other.amplitudes_));
}

DensityMatrix::DensityMatrix(BasisPtr basis, Matrix elements)
    : basis_(std::move(basis)), elements_(std::move(elements)) {
    if (!basis_) throw DomainError("density matrix needs a basis");
    const auto d = static_cast<Eigen::Index>(basis_->size());
    if (elements_.rows() != d || elements_.cols() != d)
        throw DomainError("density matrix dimension does not match basis");
    const double herm = (elements_ - elements_.adjoint()).cwiseAbs().maxCoeff();
    if (!(herm <= 1e-10)) throw DomainError("density matrix is not Hermitian");
    const double tr = elements_.trace().real();
    if (!(std::abs(tr - 1.0) <= 1e-8)) throw DomainError("density matrix trace is not one");
}

DensityMatrix DensityMatrix::pure(const KetState& ket) {
    const Vector& v = ket.amplitudes();
    return DensityMatrix(ket.basis(), v * v.adjoint());
}

DensityMatrix DensityMatrix::basis_state(BasisPtr basis, const Occupation& occ) {
    const auto i = static_cast<Eigen::Index>(basis->index_of(occ));
    const auto d = static_cast<Eigen::Index>(basis->size());
    Matrix m = Matrix::Zero(d, d);
    m(i, i) = 1.0;
    return DensityMatrix(std::move(basis), std::move(m));
}

double DensityMatrix::min_eigenvalue() const {
    const Matrix h = 0.5 * (elements_ + elements_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

double DensityMatrix::population(const Occupation& occ) const {
    if (auto idx = basis_->find(occ)) {
        const auto i = static_cast<Eigen::Index>(*idx);
        return elements_(i, i).real();
    }
    return 0.0;
}

DenseOperator mode_annihilator(const BasisPtr& basis, Mode mode) {
    const auto d = static_cast<Eigen::Index>(basis->size());
    Matrix m = Matrix::Zero(d, d);
    for (std::size_t j = 0; j < basis->size(); ++j) {
        Occupation occ = basis->state(j);
        const int n = occ[mode];
        if (n == 0) continue;
        occ[mode] = n - 1;
        const auto i = basis->index_of(occ);
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::sqrt(static_cast<double>(n));
    }
    return {basis, std::move(m)};
}

DenseOperator adjoint(const DenseOperator& op) { return {op.basis, op.elements.adjoint()}; }

DenseOperator mode_creator(const BasisPtr& basis, Mode mode) {
    return adjoint(mode_annihilator(basis, mode));
}

DenseOperator number_operator(const BasisPtr& basis, Mode mode) {
    const auto d = static_cast<Eigen::Index>(basis->size());
    Matrix m = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) m(i, i) = basis->state(static_cast<std::size_t>(i))[mode];
    return {basis, std::move(m)};
}

DenseOperator total_number_operator(const BasisPtr& basis) {
    const auto d = static_cast<Eigen::Index>(basis->size());
    Matrix m = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) m(i, i) = basis->state(static_cast<std::size_t>(i)).total();
    return {basis, std::move(m)};
}

namespace {

bool kept(const std::vector<Mode>& keep, Mode m) {
    return std::find(keep.begin(), keep.end(), m) != keep.end();
}

Occupation project(const Occupation& occ, const std::vector<Mode>& keep) {
    Occupation out;
    for (Mode m : keep) out[m] = occ[m];
    return out;
}

bool same_dropped(const Occupation& x, const Occupation& y, const std::vector<Mode>& keep) {
    for (Mode m : kAllModes) {
        if (!kept(keep, m) && x[m] != y[m]) return false;
    }
    return true;
}

}  // namespace

ReducedState partial_trace(const DensityMatrix& rho, std::vector<Mode> keep) {
    if (keep.empty()) throw DomainError("partial_trace: keep set is empty");
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());

    const FockBasis& basis = *rho.basis();
    ReducedState out;
    out.modes = keep;
    std::vector<std::ptrdiff_t> reduced_index(basis.size(), -1);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const Occupation& occ = basis.state(i);
        if (project(occ, keep) == occ) {
            reduced_index[i] = static_cast<std::ptrdiff_t>(out.states.size());
            out.states.push_back(occ);
        }
    }
    // Map every basis state to its projection's reduced index.
    std::vector<Eigen::Index> row_of(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto p = basis.index_of(project(basis.state(i), keep));
        row_of[i] = static_cast<Eigen::Index>(reduced_index[p]);
    }

    const auto dr = static_cast<Eigen::Index>(out.states.size());
    out.rho = Matrix::Zero(dr, dr);
    const Matrix& m = rho.elements();
    for (std::size_t i = 0; i < basis.size(); ++i) {
        for (std::size_t j = 0; j < basis.size(); ++j) {
            if (!same_dropped(basis.state(i), basis.state(j), keep)) continue;
            out.rho(row_of[i], row_of[j]) += m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return out;
}

Matrix marginal(const DensityMatrix& rho, Mode mode) {
    const FockBasis& basis = *rho.basis();
    const auto side = static_cast<Eigen::Index>(basis.cutoff() + 1);
    Matrix out = Matrix::Zero(side, side);
    const std::vector<Mode> keep{mode};
    const Matrix& m = rho.elements();
    for (std::size_t i = 0; i < basis.size(); ++i) {
        for (std::size_t j = 0; j < basis.size(); ++j) {
            const Occupation& si = basis.state(i);
            const Occupation& sj = basis.state(j);
            if (!same_dropped(si, sj, keep)) continue;
            out(si[mode], sj[mode]) += m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return out;
}

ProductOfMarginals product_state_of_marginals(const DensityMatrix& rho) {
    const FockBasis& basis = *rho.basis();
    std::array<Matrix, 3> ms{marginal(rho, Mode::a), marginal(rho, Mode::b), marginal(rho, Mode::c)};
    const auto d = static_cast<Eigen::Index>(basis.size());
    Matrix pi(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const Occupation& si = basis.state(static_cast<std::size_t>(i));
        for (Eigen::Index j = 0; j < d; ++j) {
            const Occupation& sj = basis.state(static_cast<std::size_t>(j));
            pi(i, j) = ms[0](si.a, sj.a) * ms[1](si.b, sj.b) * ms[2](si.c, sj.c);
        }
    }
    const double retained = pi.trace().real();
    if (!(retained > 1e-300)) throw NumericalError("product of marginals has no weight inside the cutoff");
    pi /= retained;
    pi = 0.5 * (pi + pi.adjoint()).eval();
    return {std::move(ms), DensityMatrix(rho.basis(), std::move(pi)), retained};
}

Vector nonlocal_amplitudes(const FockBasis& basis, int n, int magnons, double theta) {
    if (n < 0 || magnons < 0) throw DomainError("nonlocal state: negative occupation");
    if (n + magnons > basis.cutoff())
        throw DomainError("nonlocal state |" + std::to_string(n) + "~," + std::to_string(magnons) +
                          "> exceeds cutoff " + std::to_string(basis.cutoff()));
    Vector v = Vector::Zero(static_cast<Eigen::Index>(basis.size()));
    const double scale = std::pow(2.0, -0.5 * n);
    double binom = 1.0;  // C(n, k) built incrementally over k = n, n-1, ...
    for (int k = n; k >= 0; --k) {
        if (k < n) binom = binom * (k + 1) / (n - k);
        const auto idx = basis.index_of({k, n - k, magnons});
        v[static_cast<Eigen::Index>(idx)] = std::sqrt(binom) * scale * std::polar(1.0, theta * (n - k));
    }
    return v;
}

KetState nonlocal_product_state(const BasisPtr& basis, int n, int magnons, double theta) {
    return KetState(basis, nonlocal_amplitudes(*basis, n, magnons, theta));
}

KetState nonlocal_number_state(const BasisPtr& basis, int n, double theta) {
    return nonlocal_product_state(basis, n, 0, theta);
}

}  // namespace ptmag
