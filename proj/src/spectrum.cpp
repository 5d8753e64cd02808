#include "ptmag/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "ptmag/error.hpp"
#include "ptmag/parallel.hpp"

namespace ptmag {

namespace {

// Sorted by real part; real parts within tol of the previous root form a tie
// group ordered by imaginary part. Grouping first keeps the comparison a
// strict weak ordering.
void sort_eigenvalues(std::array<Complex, 3>& w) {
    double scale = 0.0;
    for (const auto& z : w) scale = std::max(scale, std::abs(z));
    const double tol = 1e-9 * std::max(scale, 1.0);
    std::sort(w.begin(), w.end(), [](const Complex& x, const Complex& y) { return x.real() < y.real(); });
    std::array<int, 3> group{};
    for (std::size_t k = 1; k < w.size(); ++k)
        group[k] = group[k - 1] + (w[k].real() - w[k - 1].real() > tol ? 1 : 0);
    std::array<std::pair<int, Complex>, 3> keyed;
    for (std::size_t k = 0; k < w.size(); ++k) keyed[k] = {group[k], w[k]};
    std::sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) {
        return x.first != y.first ? x.first < y.first : x.second.imag() < y.second.imag();
    });
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = keyed[k].second;
}

double safe_delta(const ModelParams& p) {
    return p.g == 0.0 ? std::numeric_limits<double>::quiet_NaN() : p.delta();
}

}  // namespace

double EigenTriple::max_abs_im() const {
    double m = 0.0;
    for (const auto& z : omega) m = std::max(m, std::abs(z.imag()));
    return m;
}

std::string phase_name(Phase p) {
    switch (p) {
        case Phase::pt_symmetric: return "PTSymmetric";
        case Phase::pt_broken: return "PTBroken";
        case Phase::exceptional_point: return "ExceptionalPoint";
    }
    return "unknown";
}

Matrix3 single_excitation_matrix(const ModelParams& p) {
    const double g = p.coupling_g();
    const double r = p.coupling_r();
    Matrix3 m = Matrix3::Zero();
    m(0, 0) = p.omega_a();
    m(1, 1) = p.omega_b();
    m(2, 2) = p.omega_c();
    m(1, 0) = r * std::polar(1.0, p.theta);
    m(0, 1) = r * std::polar(1.0, -p.theta);
    m(2, 0) = g * std::polar(1.0, p.phi);
    m(0, 2) = g;
    return m;
}

EigenTriple analytic_eigenvalues(const ModelParams& p) {
    // Work about s = A/3 so the coefficients stay O(g^2, r^2) instead of O(omega^3).
    const double s = (p.omega_a() + p.omega_b() + p.omega_c()) / 3.0;
    const double wa = p.omega_a() - s;
    const double wb = p.omega_b() - s;
    const double wc = p.omega_c() - s;
    const Complex g2 = p.coupling_g() * p.coupling_g() * std::polar(1.0, p.phi);
    const double r2 = p.coupling_r() * p.coupling_r();

    // lambda^3 - A lambda^2 - B lambda + C = 0
    const Complex A = wa + wb + wc;
    const Complex B = g2 + r2 - wc * wa - wc * wb - wa * wb;
    const Complex C = -wa * wb * wc + wc * r2 + g2 * wb;

    // Depressed form x^3 + P x + Q with lambda = x + A/3.
    const Complex a2 = -A, a1 = -B, a0 = C;
    const Complex P = a1 - a2 * a2 / 3.0;
    const Complex Q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    const Complex disc = std::sqrt(Q * Q / 4.0 + P * P * P / 27.0);
    Complex w = -Q / 2.0 + disc;
    if (std::abs(-Q / 2.0 - disc) > std::abs(w)) w = -Q / 2.0 - disc;

    const Complex unit(-0.5, std::sqrt(3.0) / 2.0);
    std::array<Complex, 3> x{};
    if (std::abs(w) == 0.0) {
        x.fill(Complex(0.0));
    } else {
        Complex u = std::pow(w, 1.0 / 3.0);
        for (auto& xi : x) {
            xi = u - P / (3.0 * u);
            u *= unit;
        }
    }

    auto poly = [&](Complex z) { return ((z - A) * z - B) * z + C; };
    auto dpoly = [&](Complex z) { return (3.0 * z - 2.0 * A) * z - B; };
    EigenTriple out;
    for (int k = 0; k < 3; ++k) {
        Complex z = x[k] + A / 3.0;
        const Complex d = dpoly(z);
        if (std::abs(d) > 0.0) {
            const Complex polished = z - poly(z) / d;
            if (std::abs(poly(polished)) < std::abs(poly(z))) z = polished;
        }
        out.omega[k] = z + s;
    }
    sort_eigenvalues(out.omega);
    out.params = p;
    out.delta = safe_delta(p);
    return out;
}

EigenTriple numeric_eigenvalues(const Matrix3& m) {
    Eigen::ComplexEigenSolver<Matrix3> solver(m, false);
    if (solver.info() != Eigen::Success) throw NumericalError("3x3 eigensolver did not converge");
    EigenTriple out;
    for (int k = 0; k < 3; ++k) out.omega[k] = solver.eigenvalues()[k];
    sort_eigenvalues(out.omega);
    out.delta = std::numeric_limits<double>::quiet_NaN();
    return out;
}

double default_epsilon_im(const ModelParams& p) {
    // Fall back to r when g vanishes so the tolerance never collapses to 0.
    const double scale = p.g > 0.0 ? p.coupling_g() : std::max(p.coupling_r(), 1.0);
    return 1e-4 * scale;
}

PhasePoint classify_phase(const EigenTriple& t, double epsilon_im) {
    if (!(epsilon_im > 0.0)) throw DomainError("classify_phase: epsilon_im must be positive");
    PhasePoint pt;
    pt.delta = t.delta;
    pt.g = t.params.g;
    pt.max_abs_im = t.max_abs_im();
    pt.phase = pt.max_abs_im < epsilon_im ? Phase::pt_symmetric : Phase::pt_broken;
    return pt;
}

std::vector<ExceptionalPoint> find_exceptional_points(const ModelParams& tmpl, double delta_min,
                                                      double delta_max, double grid_step,
                                                      double epsilon_im) {
    if (!(delta_max > delta_min)) throw DomainError("find_exceptional_points: empty delta range");
    if (!(grid_step > 0.0)) throw DomainError("find_exceptional_points: grid_step must be positive");
    if (!(tmpl.g > 0.0)) throw DomainError("find_exceptional_points: g must be positive");
    const double eps = epsilon_im > 0.0 ? epsilon_im : default_epsilon_im(tmpl);

    auto excess = [&](double delta) {
        ModelParams p = tmpl;
        p.set_delta(delta);
        return analytic_eigenvalues(p).max_abs_im() - eps;
    };

    const auto n = static_cast<std::size_t>(std::ceil((delta_max - delta_min) / grid_step - 1e-9)) + 1;
    std::vector<double> grid(n), f(n);
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = std::min(delta_min + static_cast<double>(i) * grid_step, delta_max);
        f[i] = excess(grid[i]);
    }

    std::vector<ExceptionalPoint> eps_found;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if ((f[i] < 0.0) == (f[i + 1] < 0.0)) continue;
        double lo = grid[i], hi = grid[i + 1];
        const bool lo_symmetric = f[i] < 0.0;
        while (hi - lo > 1e-6) {
            const double mid = 0.5 * (lo + hi);
            if ((excess(mid) < 0.0) == lo_symmetric) lo = mid;
            else hi = mid;
        }
        eps_found.push_back({0.5 * (lo + hi), tmpl.g, hi - lo});
    }
    return eps_found;
}

PhaseDiagram sweep_phase_diagram(const ModelParams& tmpl, double g_min, double g_max, int g_steps,
                                 double delta_min, double delta_max, int delta_steps) {
    if (g_steps < 1 || delta_steps < 1) throw DomainError("sweep_phase_diagram: steps must be positive");
    auto axis = [](double lo, double hi, int steps, int i) {
        return steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (steps - 1);
    };
    const auto total = static_cast<std::size_t>(g_steps) * static_cast<std::size_t>(delta_steps);
    PhaseDiagram d;
    d.points.resize(total);
    d.eigen.resize(total);
    parallel_for(total, [&](std::size_t k) {
        const int gi = static_cast<int>(k / static_cast<std::size_t>(delta_steps));
        const int di = static_cast<int>(k % static_cast<std::size_t>(delta_steps));
        ModelParams p = tmpl;
        p.g = axis(g_min, g_max, g_steps, gi);
        const double delta = axis(delta_min, delta_max, delta_steps, di);
        if (p.g > 0.0) p.set_delta(delta);
        EigenTriple t = analytic_eigenvalues(p);
        t.delta = delta;
        d.points[k] = classify_phase(t, default_epsilon_im(p));
        d.eigen[k] = t;
    });
    return d;
}

void write_phase_diagram_csv(std::ostream& os, const PhaseDiagram& d) {
    os << "g_over_2pi_MHz,delta,re_w1,re_w2,re_w3,im_w1,im_w2,im_w3,phase\n";
    const auto old_precision = os.precision(12);
    for (std::size_t k = 0; k < d.points.size(); ++k) {
        const auto& pt = d.points[k];
        const auto& w = d.eigen[k].omega;
        os << pt.g << ',' << pt.delta;
        for (const auto& z : w) os << ',' << z.real();
        for (const auto& z : w) os << ',' << z.imag();
        os << ',' << phase_name(pt.phase) << '\n';
    }
    os.precision(old_precision);
}

}  // namespace ptmag
