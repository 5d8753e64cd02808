#pragma once

#include <vector>

#include "ptmag/fock.hpp"

namespace ptmag {

enum class LogBase { two, e };

/// sqrt(<phi|rho|phi>), clamped to [0, 1].
double fidelity(const DensityMatrix& rho, const KetState& target);

/// -sum l log l over eigenvalues above 1e-12.
double von_neumann_entropy(const DensityMatrix& rho, LogBase base = LogBase::two);
double von_neumann_entropy(const Matrix& hermitian, LogBase base = LogBase::two);

/// Where rho_pi = rho_a (x) rho_b (x) rho_c lives when evaluating
/// C = sqrt(S((rho + rho_pi)/2) - (S(rho) + S(rho_pi))/2).
///   product:   the full per-mode space of dimension (cutoff+1)^3; exact.
///   truncated: rho_pi cut to the total-number basis and renormalized.
enum class CoherenceSpace { product, truncated };

struct CoherenceResult {
    double value = 0.0;
    /// Weight of rho_pi dropped by truncation (always 0 in product space).
    double discarded_weight = 0.0;
    /// True when discarded_weight > 1e-6: the value is not trustworthy.
    bool flagged = false;
};

CoherenceResult collective_coherence_detail(const DensityMatrix& rho,
                                            CoherenceSpace space = CoherenceSpace::product,
                                            LogBase base = LogBase::two);

double collective_coherence(const DensityMatrix& rho, CoherenceSpace space = CoherenceSpace::product,
                            LogBase base = LogBase::two);

/// tr(rho N).
double mean_particle_number(const DensityMatrix& rho);

/// tr(rho^2).
double purity(const DensityMatrix& rho);

/// Diagonal of rho in basis order.
std::vector<double> populations(const DensityMatrix& rho);

}  // namespace ptmag
