#include "rsm/observables.hpp"

#include <cmath>
#include <limits>

#include "rsm/kernels.hpp"

namespace rsm::observables {

namespace {

constexpr double kDegeneracyGap = 1e-10;

void check_state(std::span<const double> state, const model::FockTruncation& trunc) {
    if (static_cast<int>(state.size()) != trunc.dim())
        throw std::invalid_argument("observables: state length does not match truncation");
}

model::ModelParams with_g(const model::ModelParams& params, double g) {
    model::ModelParams p = params;
    p.coupling_g = g;
    return p;
}

spectra::EigenSolution ground_pair(const model::ModelParams& params,
                                   const model::FockTruncation& trunc,
                                   const spectra::SolverOptions& opts) {
    const auto h = model::build_hamiltonian(params, trunc);
    return spectra::lowest_eigenpairs(h, 2, opts);
}

const std::vector<double>& nondegenerate_ground(const spectra::EigenSolution& sol,
                                                const char* who) {
    if (sol.eigenvalues[1] - sol.eigenvalues[0] < kDegeneracyGap)
        throw GaugeError(std::string(who) + ": ground state degenerate, gauge undefined");
    return sol.eigenvectors[0];
}

double default_step(const model::ModelParams& params) {
    const auto crit = model::critical_point(params);
    return 1e-5 * crit.g_c;
}

} // namespace

double mean_photon_number(std::span<const double> state, const model::FockTruncation& trunc) {
    check_state(state, trunc);
    double acc = 0.0;
    for (int n = 0; n <= trunc.n_tr; ++n) {
        const double up = state[static_cast<std::size_t>(2 * n)];
        const double dn = state[static_cast<std::size_t>(2 * n + 1)];
        acc += n * (up * up + dn * dn);
    }
    return acc;
}

double order_parameter(std::span<const double> state, const model::FockTruncation& trunc) {
    const double nbar = mean_photon_number(state, trunc);
    if (nbar == 0.0)
        return std::numeric_limits<double>::infinity();
    return 1.0 / nbar;
}

double position_variance(std::span<const double> state, const model::FockTruncation& trunc) {
    check_state(state, trunc);
    const int n_tr = trunc.n_tr;
    // w = (a^dag + a) |state>, photon index extended by one slot per spin
    std::vector<double> w(static_cast<std::size_t>(2 * (n_tr + 2)), 0.0);
    for (int s = 0; s < 2; ++s) {
        for (int n = 0; n <= n_tr; ++n) {
            const double amp = state[static_cast<std::size_t>(2 * n + s)];
            if (amp == 0.0)
                continue;
            w[static_cast<std::size_t>(2 * (n + 1) + s)] +=
                std::sqrt(static_cast<double>(n + 1)) * amp; // a^dag
            if (n > 0)
                w[static_cast<std::size_t>(2 * (n - 1) + s)] +=
                    std::sqrt(static_cast<double>(n)) * amp; // a
        }
    }
    double x2 = 0.0;
    for (double v : w)
        x2 += v * v;
    x2 *= 0.5;
    double xm = 0.0; // <x> = <a^dag + a>/sqrt(2)
    for (int s = 0; s < 2; ++s)
        for (int n = 0; n < n_tr; ++n)
            xm += 2.0 * std::sqrt(static_cast<double>(n + 1)) *
                  state[static_cast<std::size_t>(2 * n + s)] *
                  state[static_cast<std::size_t>(2 * (n + 1) + s)];
    xm /= std::sqrt(2.0);
    double var = x2 - xm * xm;
    if (var < 0.0) {
        if (var < -1e-12)
            throw std::runtime_error("position_variance: negative variance beyond roundoff");
        var = 0.0; // roundoff clamp
    }
    return std::sqrt(var);
}

double parity_expectation(std::span<const double> state, const model::FockTruncation& trunc) {
    check_state(state, trunc);
    double acc = 0.0;
    for (int n = 0; n <= trunc.n_tr; ++n) {
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        const double up = state[static_cast<std::size_t>(2 * n)];
        const double dn = state[static_cast<std::size_t>(2 * n + 1)];
        acc += sign * (up * up - dn * dn);
    }
    return acc;
}

double fidelity(const model::ModelParams& params, double g, double delta_g,
                const model::FockTruncation& trunc, const spectra::SolverOptions& opts) {
    if (delta_g == 0.0)
        return 1.0;
    delta_g = std::abs(delta_g);
    double lo = g - delta_g / 2.0;
    double hi = g + delta_g / 2.0;
    if (lo < 0.0) { // keep couplings physical near g = 0
        lo = g;
        hi = g + delta_g;
    }
    const auto sa = ground_pair(with_g(params, lo), trunc, opts);
    const auto sb = ground_pair(with_g(params, hi), trunc, opts);
    const auto& va = nondegenerate_ground(sa, "fidelity");
    const auto& vb = nondegenerate_ground(sb, "fidelity");
    return std::abs(kernels::dot(va, vb));
}

namespace {

double chi_f_finite_difference(const model::ModelParams& params, double g,
                               const model::FockTruncation& trunc,
                               const spectra::SolverOptions& opts) {
    const double floor_dg = 1e-13 * std::max(1.0, g);
    const double cap_dg = 0.5 * model::critical_point(params).g_c; // quadratic-response window
    // keep 1 - F well above the log-roundoff floor and well below the
    // regime where higher orders of dg matter
    double dg = std::min(100.0 * default_step(with_g(params, g)), cap_dg);
    double f = 0.0;
    for (int it = 0;; ++it) {
        if (it >= 60 || dg < floor_dg)
            throw std::runtime_error("fidelity_susceptibility: step adaptation failed "
                                     "(dg reached the roundoff floor)");
        f = fidelity(params, g, dg, trunc, opts);
        const double omf = 1.0 - f;
        if (omf > 1e-3) {
            dg *= 0.25;
        } else if (omf < 1e-5 && dg < cap_dg) {
            dg = std::min(4.0 * dg, cap_dg);
        } else {
            break; // in range, or flat response at the largest sensible step
        }
    }
    // two Richardson stages remove the dg^2 and dg^4 discretization terms
    const double f2 = fidelity(params, g, dg / 2.0, trunc, opts);
    const double f4 = fidelity(params, g, dg / 4.0, trunc, opts);
    const double c1 = -2.0 * std::log(f) / (dg * dg);
    const double c2 = -2.0 * std::log(f2) / (dg * dg / 4.0);
    const double c3 = -2.0 * std::log(f4) / (dg * dg / 16.0);
    const double r1 = (4.0 * c2 - c1) / 3.0;
    const double r2 = (4.0 * c3 - c2) / 3.0;
    return (16.0 * r2 - r1) / 15.0;
}

// H_I = dH/dg = (a^dag + a) sigma_x applied within the truncated space
std::vector<double> apply_coupling_derivative(std::span<const double> v, int n_tr) {
    std::vector<double> w(v.size(), 0.0);
    for (int n = 0; n < n_tr; ++n) {
        const double amp = std::sqrt(static_cast<double>(n + 1));
        // |n,up> <-> |n+1,down>, |n,down> <-> |n+1,up>
        w[static_cast<std::size_t>(2 * n)] += amp * v[static_cast<std::size_t>(2 * (n + 1) + 1)];
        w[static_cast<std::size_t>(2 * (n + 1) + 1)] += amp * v[static_cast<std::size_t>(2 * n)];
        w[static_cast<std::size_t>(2 * n + 1)] += amp * v[static_cast<std::size_t>(2 * (n + 1))];
        w[static_cast<std::size_t>(2 * (n + 1))] += amp * v[static_cast<std::size_t>(2 * n + 1)];
    }
    return w;
}

double chi_f_eigenstate_sum(const model::ModelParams& params, double g,
                            const model::FockTruncation& trunc, int k_states,
                            const spectra::SolverOptions& opts) {
    if (k_states < 16)
        throw std::invalid_argument("fidelity_susceptibility: eigenstate_sum needs k_states >= 16");
    const auto h = model::build_hamiltonian(with_g(params, g), trunc);
    const int k = std::min(k_states + 1, h.dim);
    const auto sol = spectra::lowest_eigenpairs(h, k, opts);
    (void)nondegenerate_ground(sol, "fidelity_susceptibility");
    const auto hi_v0 = apply_coupling_derivative(sol.eigenvectors[0], trunc.n_tr);
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(k - 1));
    double sum = 0.0;
    for (int m = 1; m < k; ++m) {
        const double me = kernels::dot(sol.eigenvectors[static_cast<std::size_t>(m)], hi_v0);
        const double de = sol.eigenvalues[static_cast<std::size_t>(m)] - sol.eigenvalues[0];
        const double term = me * me / (de * de);
        terms.push_back(term);
        sum += term;
    }
    // the formally infinite sum must visibly decay inside the window we kept,
    // and the kept window must carry essentially all of the weight
    const std::size_t blk = 8;
    if (terms.size() >= 3 * blk && k < h.dim) {
        double tail = 0.0, prev = 0.0;
        for (std::size_t i = terms.size() - blk; i < terms.size(); ++i)
            tail += terms[i];
        for (std::size_t i = terms.size() - 2 * blk; i < terms.size() - blk; ++i)
            prev += terms[i];
        if ((tail > prev && tail > 1e-12 * sum) || tail > 2e-3 * sum)
            throw std::runtime_error(
                "fidelity_susceptibility: eigenstate_sum tail not decreasing, increase k_states");
    }
    return sum;
}

double chi_f_derivative_form(const model::ModelParams& params, double g,
                             const model::FockTruncation& trunc,
                             const spectra::SolverOptions& opts) {
    double dg = default_step(with_g(params, g));
    if (g - dg < 0.0)
        dg = g / 2.0;
    if (dg <= 0.0)
        throw std::runtime_error("fidelity_susceptibility: derivative_form needs g > 0");
    const auto sm = ground_pair(with_g(params, g - dg), trunc, opts);
    const auto s0 = ground_pair(with_g(params, g), trunc, opts);
    const auto sp = ground_pair(with_g(params, g + dg), trunc, opts);
    const auto& vm = nondegenerate_ground(sm, "fidelity_susceptibility");
    const auto& v0 = nondegenerate_ground(s0, "fidelity_susceptibility");
    const auto& vp = nondegenerate_ground(sp, "fidelity_susceptibility");
    std::vector<double> dpsi(v0.size());
    for (std::size_t i = 0; i < v0.size(); ++i)
        dpsi[i] = (vp[i] - vm[i]) / (2.0 * dg);
    const double dd = kernels::dot(dpsi, dpsi);
    const double pd = kernels::dot(v0, dpsi);
    return dd - pd * pd;
}

} // namespace

double fidelity_susceptibility(const model::ModelParams& params, double g, ChiFMethod method,
                               const model::FockTruncation& trunc, int k_states,
                               const spectra::SolverOptions& opts) {
    switch (method) {
    case ChiFMethod::finite_difference:
        return chi_f_finite_difference(params, g, trunc, opts);
    case ChiFMethod::eigenstate_sum:
        return chi_f_eigenstate_sum(params, g, trunc, k_states, opts);
    case ChiFMethod::derivative_form:
        return chi_f_derivative_form(params, g, trunc, opts);
    }
    throw std::logic_error("fidelity_susceptibility: unknown method");
}

} // namespace rsm::observables
