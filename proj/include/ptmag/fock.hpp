#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ptmag {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

/// Photon modes a, b and the magnon (Kittel) mode c.
enum class Mode { a = 0, b = 1, c = 2 };

inline constexpr std::array<Mode, 3> kAllModes{Mode::a, Mode::b, Mode::c};

char mode_name(Mode m);

/// Occupation numbers |n_a n_b n_c>.
struct Occupation {
    int a = 0;
    int b = 0;
    int c = 0;

    int total() const { return a + b + c; }
    int operator[](Mode m) const;
    int& operator[](Mode m);

    /// Compact label used in CSV headers, e.g. "102".
    std::string label() const;

    auto operator<=>(const Occupation&) const = default;
};

/// Three-mode Fock space truncated by total excitation number.
///
/// States are ordered by total number, then lexicographically by (n_a, n_b,
/// n_c). Every number sector therefore occupies a contiguous index range,
/// which the integrator exploits.
class FockBasis {
public:
    explicit FockBasis(int cutoff);

    int cutoff() const { return cutoff_; }
    std::size_t size() const { return states_.size(); }
    const std::vector<Occupation>& states() const { return states_; }
    const Occupation& state(std::size_t i) const { return states_.at(i); }

    std::optional<std::size_t> find(const Occupation& occ) const;
    /// Throws DomainError if `occ` lies outside the truncated space.
    std::size_t index_of(const Occupation& occ) const;

    std::size_t block_offset(int total) const;
    std::size_t block_size(int total) const;

private:
    int cutoff_;
    std::vector<Occupation> states_;
    std::vector<std::ptrdiff_t> lookup_;  // (cutoff+1)^3 grid, -1 when outside
    std::vector<std::size_t> block_offsets_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

BasisPtr make_basis(int cutoff);

/// C(cutoff + 3, 3): number of triples with sum <= cutoff.
std::size_t basis_dimension(int cutoff);

struct DenseOperator {
    BasisPtr basis;
    Matrix elements;
};

/// Normalized state vector. Construction normalizes and rejects zero vectors.
class KetState {
public:
    KetState(BasisPtr basis, Vector amplitudes);

    const BasisPtr& basis() const { return basis_; }
    const Vector& amplitudes() const { return amplitudes_; }
    Complex amplitude(const Occupation& occ) const;

    /// |<this|other>|^2
    double overlap(const KetState& other) const;

private:
    BasisPtr basis_;
    Vector amplitudes_;
};

/// Hermitian, trace-one density matrix. The constructor checks Hermiticity
/// (1e-10, max element) and trace (1e-8); positivity is checked on demand.
class DensityMatrix {
public:
    DensityMatrix(BasisPtr basis, Matrix elements);

    static DensityMatrix pure(const KetState& ket);
    static DensityMatrix basis_state(BasisPtr basis, const Occupation& occ);

    const BasisPtr& basis() const { return basis_; }
    const Matrix& elements() const { return elements_; }

    double min_eigenvalue() const;
    bool is_positive(double tolerance = 1e-8) const { return min_eigenvalue() >= -tolerance; }
    double population(const Occupation& occ) const;

private:
    BasisPtr basis_;
    Matrix elements_;
};

DenseOperator mode_annihilator(const BasisPtr& basis, Mode mode);
DenseOperator mode_creator(const BasisPtr& basis, Mode mode);
DenseOperator number_operator(const BasisPtr& basis, Mode mode);
DenseOperator total_number_operator(const BasisPtr& basis);
DenseOperator adjoint(const DenseOperator& op);

/// Reduced state of a subset of modes. `states` holds the occupation triples
/// of the kept modes (dropped modes read as zero), in FockBasis order.
struct ReducedState {
    std::vector<Mode> modes;
    std::vector<Occupation> states;
    Matrix rho;
};

/// Throws DomainError for an empty `keep` set.
ReducedState partial_trace(const DensityMatrix& rho, std::vector<Mode> keep);

/// Single-mode reduced density matrix, dimension cutoff+1 (index = occupation).
Matrix marginal(const DensityMatrix& rho, Mode mode);

struct ProductOfMarginals {
    std::array<Matrix, 3> marginals;
    /// rho_a (x) rho_b (x) rho_c restricted to the truncated basis, renormalized.
    DensityMatrix rho_pi;
    /// Trace of the product state inside the truncated basis before renormalization.
    double retained_weight;
    double discarded_weight() const { return 1.0 - retained_weight; }
};

ProductOfMarginals product_state_of_marginals(const DensityMatrix& rho);

/// (A1^dag)^n |00>_{ab} / sqrt(n!) with A1 = (a + b e^{-i theta}) / sqrt 2, magnon in vacuum.
KetState nonlocal_number_state(const BasisPtr& basis, int n, double theta);

/// |n~>_{A1} (x) |m>_c.
KetState nonlocal_product_state(const BasisPtr& basis, int n, int magnons, double theta);

/// Amplitude vector of |n~>_{A1}|m>_c; used to build superpositions.
Vector nonlocal_amplitudes(const FockBasis& basis, int n, int magnons, double theta);

}  // namespace ptmag
