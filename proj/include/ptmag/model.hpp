#pragma once

#include <numbers>
#include <optional>
#include <utility>

#include "ptmag/fock.hpp"

namespace ptmag {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Converts a frequency quoted as nu = omega / 2pi in MHz to rad/us.
constexpr double angular(double nu_mhz) { return kTwoPi * nu_mhz; }

/// Physical parameters of the three-mode hybrid system.
///
/// Frequencies, couplings and decay rates are given as value/2pi in MHz;
/// phases in radians. Internally everything is converted to rad/us, so times
/// are in microseconds.
///
/// Decay rates are amplitude (half-linewidth) rates: a mode with rate kappa
/// loses population at 2 kappa, i.e. the Lindblad coefficient multiplying
/// D[a] is 2 kappa (see `lindblad_rates`).
struct ModelParams {
    double nu_a = 5950.0;
    double nu_b = 5950.0;
    double nu_c = 6000.0;
    double g = 6.0;
    double r = 50.0;
    double phi = std::numbers::pi;
    double theta = 1.1 * std::numbers::pi;
    double kappa_a = 0.0;
    double kappa_b = 0.0;
    double gamma_m = 0.0;
    /// Rotating-frame reference; nu_a when unset.
    std::optional<double> frame_nu;

    double omega_a() const { return angular(nu_a); }
    double omega_b() const { return angular(nu_b); }
    double omega_c() const { return angular(nu_c); }
    double coupling_g() const { return angular(g); }
    double coupling_r() const { return angular(r); }
    double frame_omega() const { return angular(frame_nu.value_or(nu_a)); }

    /// (omega_a - omega_c) / 2g; throws DomainError when g == 0.
    double delta() const;
    /// Sets nu_c so that delta() == value, keeping nu_a and g.
    void set_delta(double value);

    bool lossy() const { return kappa_a > 0.0 || kappa_b > 0.0 || gamma_m > 0.0; }

    /// Throws DomainError on negative frequencies/rates or non-finite values.
    void validate() const;

    bool operator==(const ModelParams&) const = default;
};

/// Reference working point: nu_c = 6 GHz, nu_a = nu_b =
/// 5.95 GHz, g = 6 MHz, r = 50 MHz, phi = pi, theta = 1.1 pi, lossless.
ModelParams canonical_params();

/// Lindblad coefficients (rad/us) multiplying D[a], D[b], D[c].
struct LossRates {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    bool any() const { return a > 0.0 || b > 0.0 || c > 0.0; }
};

LossRates lindblad_rates(const ModelParams& p);

/// H = w_a a'a + w_b b'b + w_c c'c + g(e^{i phi} c'a + a'c) + r(e^{i theta} b'a + e^{-i theta} a'b)
///
/// The dissipative phase sits on the photon -> magnon hop, the same placement
/// as in the effective Hamiltonian g_eff(A1'c + e^{i phi} A1 c'). With
/// `frame` the generator frame_omega * N is subtracted. Products of distinct
/// modes are normal ordered so that the N = cutoff sector is represented
/// exactly.
DenseOperator build_hamiltonian(const ModelParams& p, const BasisPtr& basis, bool frame);

/// (H + H')/2 and (H - H')/2.
std::pair<DenseOperator, DenseOperator> split_hermitian(const DenseOperator& h);

/// g_eff (A1' c + e^{i phi} A1 c') with A1 = (a + b e^{-i theta})/sqrt 2 and
/// g_eff = g / sqrt 2. Requires nu_a == nu_b; warns when the large-detuning
/// condition |omega - omega_c - r| >> |g| holds by less than a factor 10.
DenseOperator build_effective_hamiltonian(const ModelParams& p, const BasisPtr& basis);

/// Closed-form steady entangled states for n = 1, 2, 3 excitations:
///   n=1: (|1~0> + i|0~1>)/sqrt2
///   n=2: |2~0>/2 + i|1~1>/sqrt2 - |0~2>/2
///   n=3: sqrt2/4 (sqrt3|1~2> - i sqrt3|2~1> - |3~0> + i|0~3>)
/// where |k~m> = |k>_{A1}|m>_c. Each is the gain eigenvector of the
/// effective Hamiltonian at phi = pi.
KetState target_state(const BasisPtr& basis, int n, double theta);

/// Eigenvector of H restricted to the n-excitation sector whose eigenvalue
/// has the largest imaginary part: the attractor of the nonlinear evolution.
/// Global phase fixed so that the largest component is real and positive.
/// Throws NumericalError when the sector spectrum is real (PT-symmetric) or
/// the gain eigenvalue is not unique.
KetState gain_mode_state(const ModelParams& p, const BasisPtr& basis, int n);

/// Equivalent-circuit description of the two cavities and the YIG sphere.
/// SI units: henry, farad, ohm.
struct CircuitParams {
    double L_a, L_b, L_m;
    double C_a, C_b, C_m;
    double R_a, R_b, R_m;
    double C_coupling;
    double Z0;
};

struct CircuitDerived {
    /// 1/sqrt(LC) in rad/s.
    double omega_a, omega_b, omega_c;
    /// R / (2 L omega): dimensionless damping (half inverse quality factor).
    double gamma_a, gamma_b, gamma_m;
    /// 2 Z0 C omega_a omega_b in rad/s.
    double r;
    /// nu, r and the amplitude decay rates gamma*omega/2pi converted to MHz;
    /// fields the circuit does not determine are copied from the template.
    ModelParams params;
};

CircuitDerived params_from_circuit(const CircuitParams& c, const ModelParams& base = canonical_params());

/// Inverse of the inter-cavity coupling formula: C = r / (2 Z0 omega_a omega_b).
/// Arguments in MHz (value/2pi) and ohm; returns farad.
double coupling_capacitance_for(double r_mhz, double nu_a_mhz, double nu_b_mhz, double z0);

/// phi = 2 atan[-delta sin(Phi) / (1 + delta cos(Phi))] for a reaction field of
/// relative amplitude delta and phase Phi.
double phase_from_reaction_field(double delta, double Phi);

}  // namespace ptmag
