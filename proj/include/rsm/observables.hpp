// observables.hpp — ground-state observables: photon number, position
// variance, parity, fidelity, fidelity susceptibility.
#pragma once

#include <span>
#include <stdexcept>
#include <string>

#include "rsm/eigen_solve.hpp"
#include "rsm/model.hpp"

namespace rsm::observables {

/// Thrown when a fidelity-type quantity is requested at a (near-)degenerate
/// ground state, where the overlap gauge is undefined.
class GaugeError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// One evaluated observable with its provenance.
struct ObservableRecord {
    model::ModelParams params;
    int n_tr = 0;
    std::string name;
    double value = 0.0;
    bool converged = false;
};

/// nbar = sum_n n |psi_{n,s}|^2 for a unit-norm state on the 2(n_tr+1) basis.
double mean_photon_number(std::span<const double> state, const model::FockTruncation& trunc);

/// M = 1/nbar; +infinity when nbar = 0.
double order_parameter(std::span<const double> state, const model::FockTruncation& trunc);

/// Delta x with x = (a^dag + a)/sqrt(2); the x action keeps one extra photon
/// slot so the quadrature is evaluated in the untruncated sense.
double position_variance(std::span<const double> state, const model::FockTruncation& trunc);

/// <P> for P = sigma_z (-1)^{a^dag a}.
double parity_expectation(std::span<const double> state, const model::FockTruncation& trunc);

/// |<psi0(g - dg/2)|psi0(g + dg/2)>| at fixed truncation. dg = 0 returns 1
/// exactly. When g - dg/2 < 0 the window shifts to [g, g + dg].
double fidelity(const model::ModelParams& params, double g, double delta_g,
                const model::FockTruncation& trunc, const spectra::SolverOptions& opts = {});

enum class ChiFMethod { finite_difference, eigenstate_sum, derivative_form };

/// Fidelity susceptibility with respect to g. finite_difference uses an
/// adaptive symmetric step with two-point Richardson extrapolation;
/// eigenstate_sum evaluates sum_{n != 0} |<psi_n|(a^dag+a) sigma_x|psi_0>|^2
/// / (E_n - E_0)^2 over k_states pairs with a tail-decrease check;
/// derivative_form differentiates the gauge-fixed ground vector.
double fidelity_susceptibility(const model::ModelParams& params, double g, ChiFMethod method,
                               const model::FockTruncation& trunc, int k_states = 64,
                               const spectra::SolverOptions& opts = {});

} // namespace rsm::observables
