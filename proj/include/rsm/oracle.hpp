// oracle.hpp — closed-form solution of the Rabi-Stark model at U = 1
// (effective squeezed oscillator); the Delta -> -Delta mirror covers U = -1.
// Used as the independent verification oracle for the exact diagonalization.
#pragma once

#include <stdexcept>

namespace rsm::oracle {

/// Data of one implicit-spectrum level: energy plus the squeezed-oscillator
/// wavefunction coefficients.
struct OracleLevel {
    int n = 0;
    double energy = 0.0;
    double chi = 0.0;  // g^2 / (Delta/2 + E), negative in the valid region
    double r = 0.0;    // squeezing parameter, r = (1/4) ln(1/(1+2 chi))
    double c_n = 0.0;  // (1+2 chi)^{1/4}
    double d_n = 0.0;  // chi / g
    double norm = 0.0; // sqrt(c_n^2 + (2n+1) d_n^2)
};

/// Closed-form observables of the level-n state at reduced coupling
/// lambda = g/g_c in (0,1). chi_f values are susceptibilities with respect
/// to lambda; divide by g_c^2 to compare with d/dg-based numerics.
struct AnalyticObservables {
    double mean_photon = 0.0;
    double delta_x = 0.0;
    double chi_f_full = 0.0;
    double chi_f_asymptotic = 0.0;
};

/// Root E_n of  sqrt(-(D/2+E)) (E+1-D/2) / sqrt(-(D/2+E+2g^2)) = 2n+1
/// inside (D/2 - 1, E_c = -D/2 - 2g^2), by sign-scan plus bisection.
/// Requires 0 < g < g_c = sqrt((1-D)/2); units of omega = 1.
double solve_low_spectrum(double delta, double g, int n);

/// All OracleLevel fields from the solved energy.
OracleLevel oracle_level_data(double delta, double g, int n);

AnalyticObservables analytic_observables(double delta, double lambda, int n);

} // namespace rsm::oracle
