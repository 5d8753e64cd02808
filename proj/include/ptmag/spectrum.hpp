#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ptmag/model.hpp"

namespace ptmag {

using Matrix3 = Eigen::Matrix3cd;

/// Three single-excitation eigenvalues in rad/us, sorted by real part
/// (ties within 1e-9 relative broken by imaginary part).
struct EigenTriple {
    std::array<Complex, 3> omega{};
    ModelParams params;
    /// Detuning (omega_a - omega_c) / 2g; NaN when unknown or g == 0.
    double delta = 0.0;

    double max_abs_im() const;
};

enum class Phase { pt_symmetric, pt_broken, exceptional_point };

std::string phase_name(Phase p);

struct PhasePoint {
    double delta = 0.0;
    double g = 0.0;  // MHz
    Phase phase = Phase::pt_symmetric;
    double max_abs_im = 0.0;  // rad/us
};

struct ExceptionalPoint {
    double delta_star = 0.0;
    double g = 0.0;  // MHz
    double bracket_width = 0.0;
};

/// H restricted to (|100>, |010>, |001>), rows are bras.
Matrix3 single_excitation_matrix(const ModelParams& p);

/// Roots of the characteristic cubic, solved in closed form (Cardano) about
/// the mean diagonal frequency and polished with one Newton step.
EigenTriple analytic_eigenvalues(const ModelParams& p);

/// Reference eigenvalues from a Schur decomposition. `params`/`delta` left
/// default (delta NaN).
EigenTriple numeric_eigenvalues(const Matrix3& m);

/// Default reality tolerance: 1e-4 of the coupling's angular scale.
double default_epsilon_im(const ModelParams& p);

PhasePoint classify_phase(const EigenTriple& t, double epsilon_im);

/// Scans delta (by moving nu_c at fixed nu_a, g) on a grid of the given step
/// and bisects every symmetric/broken boundary to a width <= 1e-4.
std::vector<ExceptionalPoint> find_exceptional_points(const ModelParams& tmpl, double delta_min,
                                                      double delta_max, double grid_step,
                                                      double epsilon_im = 0.0);

struct PhaseDiagram {
    std::vector<PhasePoint> points;
    std::vector<EigenTriple> eigen;  // parallel to points
};

/// Grid over g (MHz) x delta, row-major in g. `steps` counts points per axis.
PhaseDiagram sweep_phase_diagram(const ModelParams& tmpl, double g_min, double g_max, int g_steps,
                                 double delta_min, double delta_max, int delta_steps);

/// g_over_2pi_MHz,delta,re_w1,re_w2,re_w3,im_w1,im_w2,im_w3,phase
void write_phase_diagram_csv(std::ostream& os, const PhaseDiagram& d);

}  // namespace ptmag
