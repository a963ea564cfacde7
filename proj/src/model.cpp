#include "rsm/model.hpp"

#include <cmath>

namespace rsm::model {

void ModelParams::validate() const {
    if (!std::isfinite(delta) || !std::isfinite(omega) || !std::isfinite(stark_u) ||
        !std::isfinite(coupling_g))
        throw std::invalid_argument("ModelParams: non-finite parameter");
    if (omega <= 0.0)
        throw std::invalid_argument("ModelParams: omega must be positive");
    if (coupling_g < 0.0)
        throw std::invalid_argument("ModelParams: coupling_g must be nonnegative");
}

SparseOperator build_hamiltonian(const ModelParams& params, const FockTruncation& trunc) {
    params.validate();
    if (trunc.n_tr < 1)
        throw std::invalid_argument("build_hamiltonian: n_tr must be positive");

    const double u = (params.kind == ModelKind::QRM) ? 0.0 : params.stark_u;
    const int n_tr = trunc.n_tr;

    SparseOperator h;
    h.dim = trunc.dim();
    h.entries.reserve(static_cast<std::size_t>(6 * (n_tr + 1)));

    for (int n = 0; n <= n_tr; ++n) {
        const double qubit = params.delta / 2.0 + u * n;
        const double cavity = params.omega * n;
        h.entries.push_back({2 * n, 2 * n, qubit + cavity});      // |n,up>
        h.entries.push_back({2 * n + 1, 2 * n + 1, cavity - qubit}); // |n,down>
    }
    for (int n = 0; n < n_tr; ++n) {
        const double amp = params.coupling_g * std::sqrt(static_cast<double>(n + 1));
        if (amp == 0.0)
            continue;
        // sigma_x flips spin, a†+a shifts the photon number by one
        h.entries.push_back({2 * n, 2 * (n + 1) + 1, amp}); // |n,up> <-> |n+1,down>
        h.entries.push_back({2 * (n + 1) + 1, 2 * n, amp});
        h.entries.push_back({2 * n + 1, 2 * (n + 1), amp}); // |n,down> <-> |n+1,up>
        h.entries.push_back({2 * (n + 1), 2 * n + 1, amp});
    }
    return h;
}

SparseOperator build_parity_operator(const FockTruncation& trunc) {
    if (trunc.n_tr < 1)
        throw std::invalid_argument("build_parity_operator: n_tr must be >= 1");

    SparseOperator p;
    p.dim = trunc.dim();
    p.entries.reserve(static_cast<std::size_t>(p.dim));
    for (int n = 0; n <= trunc.n_tr; ++n) {
        const double photon_sign = (n % 2 == 0) ? 1.0 : -1.0;
        p.entries.push_back({2 * n, 2 * n, photon_sign});
        p.entries.push_back({2 * n + 1, 2 * n + 1, -photon_sign});
    }
    return p;
}

CriticalData critical_point(const ModelParams& params) {
    params.validate();
    CriticalData out;
    if (params.kind == ModelKind::QRM) {
        out.branch = Branch::plus;
        out.g_c = std::sqrt(params.omega * params.delta) / 2.0;
        out.e_c = -params.delta / 2.0 - 2.0 * params.coupling_g * params.coupling_g;
        if (!(out.g_c > 0.0))
            throw std::domain_error("critical_point: QRM requires delta > 0");
        return out;
    }
    out.branch = (params.stark_u >= 0.0) ? Branch::plus : Branch::minus;
    const double d = (out.branch == Branch::plus) ? params.delta : -params.delta;
    const double radicand = (1.0 - d / params.omega) / 2.0;
    if (radicand <= 0.0)
        throw std::domain_error("critical_point: no critical point, (1 -/+ delta)/2 <= 0");
    out.g_c = params.omega * std::sqrt(radicand);
    out.e_c = -d / 2.0 - 2.0 * params.coupling_g * params.coupling_g / params.omega;
    return out;
}

double effective_size(const ModelParams& params) {
    params.validate();
    if (params.kind == ModelKind::QRM)
        return params.delta / params.omega;
    const double u = params.stark_u;
    if (u == 1.0 || u == -1.0)
        throw std::domain_error("effective_size: |U| = 1 is the thermodynamic limit");
    return (u >= 0.0) ? 1.0 / (1.0 - u) : 1.0 / (1.0 + u);
}

} // namespace rsm::model
