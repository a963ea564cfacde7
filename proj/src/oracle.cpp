#include "rsm/oracle.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace rsm::oracle {

namespace {

double gc_plus(double delta) {
    const double radicand = (1.0 - delta) / 2.0;
    if (radicand <= 0.0)
        throw std::domain_error("oracle: no critical point for this delta");
    return std::sqrt(radicand);
}

// left side of the implicit spectrum equation minus (2n+1)
double spectral_residual(double e, double delta, double g, int n) {
    const double a = -(delta / 2.0 + e);
    const double b = -(delta / 2.0 + e + 2.0 * g * g);
    return std::sqrt(a) * (e + 1.0 - delta / 2.0) / std::sqrt(b) - (2.0 * n + 1.0);
}

} // namespace

double solve_low_spectrum(double delta, double g, int n) {
    if (n < 0)
        throw std::invalid_argument("solve_low_spectrum: n must be >= 0");
    const double gc = gc_plus(delta);
    if (!(g > 0.0) || !(g < gc))
        throw std::domain_error("solve_low_spectrum: requires 0 < g < g_c (levels collapse at g_c)");

    const double e_lo = delta / 2.0 - 1.0;
    const double e_hi = -delta / 2.0 - 2.0 * g * g; // E_c^+
    const double width = e_hi - e_lo;
    // stay off the square-root singularities at the interval endpoints; the
    // offset must stay representable when the interval has nearly collapsed
    const double scale = std::max({1.0, std::abs(e_lo), std::abs(e_hi)});
    const double off = std::max(1e-13 * width, 8.0 * std::numeric_limits<double>::epsilon() * scale);
    double a = e_lo + off;
    double b = e_hi - off;
    if (!(b > a))
        throw std::domain_error("solve_low_spectrum: interval too narrow at this coupling");
    double fa = spectral_residual(a, delta, g, n);
    double fb = spectral_residual(b, delta, g, n);
    if (!(fa < 0.0) || !(fb > 0.0))
        throw std::domain_error("solve_low_spectrum: no sign change in the energy interval");
    for (int it = 0;
         it < 200 && (b - a) > 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(a));
         ++it) {
        const double m = 0.5 * (a + b);
        const double fm = spectral_residual(m, delta, g, n);
        if (fa * fm <= 0.0) {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    return 0.5 * (a + b);
}

OracleLevel oracle_level_data(double delta, double g, int n) {
    OracleLevel lvl;
    lvl.n = n;
    lvl.energy = solve_low_spectrum(delta, g, n);
    lvl.chi = g * g / (delta / 2.0 + lvl.energy);
    const double stab = 1.0 + 2.0 * lvl.chi;
    if (!(stab > 0.0))
        throw std::domain_error("oracle_level_data: oscillator instability, 1 + 2 chi <= 0");
    lvl.r = 0.25 * std::log(1.0 / stab);
    lvl.c_n = std::pow(stab, 0.25);
    lvl.d_n = lvl.chi / g;
    lvl.norm = std::sqrt(lvl.c_n * lvl.c_n + (2.0 * n + 1.0) * lvl.d_n * lvl.d_n);
    return lvl;
}

AnalyticObservables analytic_observables(double delta, double lambda, int n) {
    if (!(lambda > 0.0) || !(lambda < 1.0))
        throw std::domain_error("analytic_observables: lambda must lie in (0, 1)");
    if (n < 0)
        throw std::invalid_argument("analytic_observables: n must be >= 0");
    const double tn = 2.0 * n + 1.0;
    const double oned = 1.0 - delta;
    const double oml2 = 1.0 - lambda * lambda;
    AnalyticObservables out;
    out.mean_photon = (3.0 / 8.0) * (tn * tn + 1.0) / (oned * oml2) -
                      0.5 * (1.0 - oned * lambda * lambda);
    out.delta_x = std::sqrt(3.0 * (tn * tn + 1.0) / (4.0 * oned * oml2));
    out.chi_f_asymptotic = 1.5 * lambda * lambda / (oml2 * oml2);
    out.chi_f_full = oned * oned * (2.0 + std::pow(lambda, 4.0)) / oml2 +
                     out.chi_f_asymptotic + 4.0 * oned * oned * lambda * lambda;
    return out;
}

} // namespace rsm::oracle
