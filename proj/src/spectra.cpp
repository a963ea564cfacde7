#include "rsm/spectra.hpp"

#include <cmath>
#include <limits>

#include "rsm/observables.hpp"

namespace rsm::spectra {

ObservableId observable_from_name(const std::string& name) {
    if (name == "ground_energy")
        return ObservableId::ground_energy;
    if (name == "gap")
        return ObservableId::gap;
    if (name == "mean_photon")
        return ObservableId::mean_photon;
    if (name == "position_variance")
        return ObservableId::position_variance;
    if (name == "fidelity_susceptibility")
        return ObservableId::fidelity_susceptibility;
    throw std::invalid_argument("unknown observable: " + name);
}

std::string observable_name(ObservableId id) {
    switch (id) {
    case ObservableId::ground_energy: return "ground_energy";
    case ObservableId::gap: return "gap";
    case ObservableId::mean_photon: return "mean_photon";
    case ObservableId::position_variance: return "position_variance";
    case ObservableId::fidelity_susceptibility: return "fidelity_susceptibility";
    }
    throw std::logic_error("observable_name: bad id");
}

void ConvergencePolicy::validate() const {
    if (!(rel_tol > 0.0))
        throw std::invalid_argument("ConvergencePolicy: rel_tol must be positive");
    if (n_tr_start < 2)
        throw std::invalid_argument("ConvergencePolicy: n_tr_start must be >= 2");
    if (!(growth_factor > 1.0))
        throw std::invalid_argument("ConvergencePolicy: growth_factor must exceed 1");
    if (n_tr_cap < n_tr_start)
        throw std::invalid_argument("ConvergencePolicy: n_tr_cap below n_tr_start");
}

double evaluate_observable(const model::ModelParams& params, ObservableId id,
                           const model::FockTruncation& trunc, const SolverOptions& opts) {
    switch (id) {
    case ObservableId::ground_energy: {
        const auto h = model::build_hamiltonian(params, trunc);
        return lowest_eigenpairs(h, 1, opts).eigenvalues[0];
    }
    case ObservableId::gap:
        return energy_gap(params, trunc, opts);
    case ObservableId::mean_photon: {
        const auto h = model::build_hamiltonian(params, trunc);
        const auto sol = lowest_eigenpairs(h, 1, opts);
        return observables::mean_photon_number(sol.eigenvectors[0], trunc);
    }
    case ObservableId::position_variance: {
        const auto h = model::build_hamiltonian(params, trunc);
        const auto sol = lowest_eigenpairs(h, 1, opts);
        return observables::position_variance(sol.eigenvectors[0], trunc);
    }
    case ObservableId::fidelity_susceptibility:
        return observables::fidelity_susceptibility(params, params.coupling_g,
                                                    observables::ChiFMethod::finite_difference,
                                                    trunc, 64, opts);
    }
    throw std::logic_error("evaluate_observable: bad id");
}

ConvergedValue converge_truncation(const model::ModelParams& params, ObservableId id,
                                   const ConvergencePolicy& policy, const SolverOptions& opts) {
    policy.validate();
    int n = policy.n_tr_start;
    double prev2 = std::numeric_limits<double>::quiet_NaN();
    double prev = evaluate_observable(params, id, {n}, opts);
    while (true) {
        const int next = static_cast<int>(std::ceil(policy.growth_factor * n));
        if (next > policy.n_tr_cap)
            throw ConvergenceError("converge_truncation: cap reached without convergence for " +
                                       observable_name(id),
                                   prev, prev2, n);
        const double value = evaluate_observable(params, id, {next}, opts);
        const double scale = std::max({std::abs(value), std::abs(prev), 1e-300});
        if (std::abs(value - prev) <= policy.rel_tol * scale)
            return {value, next};
        prev2 = prev;
        prev = value;
        n = next;
    }
}

double energy_gap(const model::ModelParams& params, const model::FockTruncation& trunc,
                  const SolverOptions& opts) {
    const auto h = model::build_hamiltonian(params, trunc);
    const auto sol = lowest_eigenpairs(h, 2, opts);
    return sol.eigenvalues[1] - sol.eigenvalues[0];
}

std::pair<std::vector<double>, std::vector<double>>
finite_difference_derivatives(const std::vector<double>& values, double step) {
    const std::size_t n = values.size();
    if (n < 5)
        throw std::invalid_argument("finite_difference_derivatives: need at least 5 points");
    if (!(step > 0.0))
        throw std::invalid_argument("finite_difference_derivatives: step must be positive");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> d1(n, nan), d2(n, nan);
    for (std::size_t i = 1; i + 1 < n; ++i)
        d1[i] = (values[i + 1] - values[i - 1]) / (2.0 * step);
    for (std::size_t i = 2; i + 2 < n; ++i)
        d2[i] = (-values[i + 2] + 16.0 * values[i + 1] - 30.0 * values[i] +
                 16.0 * values[i - 1] - values[i - 2]) /
                (12.0 * step * step);
    return {std::move(d1), std::move(d2)};
}

DerivativeCurve ground_energy_derivatives(const model::ModelParams& params,
                                          const std::vector<double>& g_grid,
                                          const ConvergencePolicy& policy,
                                          const SolverOptions& opts) {
    const std::size_t n = g_grid.size();
    if (n < 5)
        throw std::invalid_argument("ground_energy_derivatives: need at least 5 grid points");
    const double h = g_grid[1] - g_grid[0];
    if (!(h > 0.0))
        throw std::invalid_argument("ground_energy_derivatives: grid must be ascending");
    for (std::size_t i = 1; i + 1 < n; ++i)
        if (std::abs((g_grid[i + 1] - g_grid[i]) - h) > 1e-9 * h)
            throw std::invalid_argument("ground_energy_derivatives: grid must be uniform");

    DerivativeCurve curve;
    curve.grid = g_grid;
    curve.step = h;
    curve.e0.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        model::ModelParams p = params;
        p.coupling_g = g_grid[i];
        curve.e0[i] = converge_truncation(p, ObservableId::ground_energy, policy, opts).value;
    }
    auto [d1, d2] = finite_difference_derivatives(curve.e0, h);
    curve.d1 = std::move(d1);
    curve.d2 = std::move(d2);
    return curve;
}

} // namespace rsm::spectra
