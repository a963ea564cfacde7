// spectra.hpp — low-lying spectra, truncation convergence, energy derivatives.
#pragma once

#include <string>
#include <vector>

#include "rsm/eigen_solve.hpp"
#include "rsm/model.hpp"

namespace rsm::spectra {

enum class ObservableId {
    ground_energy,
    gap,
    mean_photon,
    position_variance,
    fidelity_susceptibility,
};

ObservableId observable_from_name(const std::string& name);
std::string observable_name(ObservableId id);

struct ConvergencePolicy {
    double rel_tol = 1e-6;
    int n_tr_start = 64;
    double growth_factor = 2.0;
    int n_tr_cap = 32768;

    void validate() const;
};

class ConvergenceError : public std::runtime_error {
  public:
    ConvergenceError(const std::string& what, double last, double previous, int n_tr)
        : std::runtime_error(what), last(last), previous(previous), n_tr(n_tr) {}
    double last = 0.0;
    double previous = 0.0;
    int n_tr = 0;
};

struct ConvergedValue {
    double value = 0.0;
    int n_tr_used = 0;
};

/// One observable at a fixed truncation (no convergence ladder).
double evaluate_observable(const model::ModelParams& params, ObservableId id,
                           const model::FockTruncation& trunc, const SolverOptions& opts = {});

/// Truncation ladder n_tr, ceil(growth*n_tr), ... until two successive values
/// agree to rel_tol; throws ConvergenceError (with the last two values) at cap.
ConvergedValue converge_truncation(const model::ModelParams& params, ObservableId id,
                                   const ConvergencePolicy& policy = {},
                                   const SolverOptions& opts = {});

/// epsilon = E1 - E0 at fixed truncation.
double energy_gap(const model::ModelParams& params, const model::FockTruncation& trunc,
                  const SolverOptions& opts = {});

struct DerivativeCurve {
    std::vector<double> grid; // ascending, uniform spacing
    std::vector<double> e0;
    std::vector<double> d1; // NaN where the stencil does not reach
    std::vector<double> d2;
    double step = 0.0;
};

/// d1 by central difference, d2 by the 5-point stencil; NaN where the
/// stencil does not reach.
std::pair<std::vector<double>, std::vector<double>>
finite_difference_derivatives(const std::vector<double>& values, double step);

/// Ground-energy derivatives over a uniform coupling grid. Every point
/// converged per policy.
DerivativeCurve ground_energy_derivatives(const model::ModelParams& params,
                                          const std::vector<double>& g_grid,
                                          const ConvergencePolicy& policy = {},
                                          const SolverOptions& opts = {});

} // namespace rsm::spectra
