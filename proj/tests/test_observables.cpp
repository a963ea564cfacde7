#include <doctest.h>

#include <cmath>

#include "rsm/eigen_solve.hpp"
#include "rsm/model.hpp"
#include "rsm/observables.hpp"

using namespace rsm;
using model::ModelKind;
using model::ModelParams;

namespace {

ModelParams rsm_params(double delta, double u, double g) {
    ModelParams p;
    p.delta = delta;
    p.stark_u = u;
    p.coupling_g = g;
    return p;
}

ModelParams qrm_params(double delta, double g) {
    ModelParams p;
    p.kind = ModelKind::QRM;
    p.delta = delta;
    p.coupling_g = g;
    return p;
}

std::vector<double> basis_state(const model::FockTruncation& trunc, int n, int s) {
    std::vector<double> v(static_cast<std::size_t>(trunc.dim()), 0.0);
    v[static_cast<std::size_t>(2 * n + s)] = 1.0;
    return v;
}

} // namespace

TEST_CASE("mean photon number and order parameter") {
    const model::FockTruncation trunc{8};
    const auto vac = basis_state(trunc, 0, 1);
    CHECK(observables::mean_photon_number(vac, trunc) == 0.0);
    CHECK(std::isinf(observables::order_parameter(vac, trunc)));
    const auto five = basis_state(trunc, 5, 1);
    CHECK(observables::mean_photon_number(five, trunc) == doctest::Approx(5.0).epsilon(1e-15));

    // QRM ground state at g = 0 is the spin-down vacuum
    const auto h = model::build_hamiltonian(qrm_params(0.5, 0.0), trunc);
    const auto sol = spectra::lowest_eigenpairs(h, 1);
    CHECK(observables::mean_photon_number(sol.eigenvectors[0], trunc) < 1e-12);
}

TEST_CASE("position variance on Fock states") {
    const model::FockTruncation trunc{16};
    CHECK(observables::position_variance(basis_state(trunc, 0, 0), trunc) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(observables::position_variance(basis_state(trunc, 1, 1), trunc) ==
          doctest::Approx(std::sqrt(1.5)).epsilon(1e-14));
    // <x^2> = n + 1/2 for any Fock level
    CHECK(observables::position_variance(basis_state(trunc, 4, 0), trunc) ==
          doctest::Approx(std::sqrt(4.5)).epsilon(1e-14));
}

TEST_CASE("parity expectation") {
    const model::FockTruncation trunc{8};
    CHECK(observables::parity_expectation(basis_state(trunc, 0, 0), trunc) == 1.0);
    CHECK(observables::parity_expectation(basis_state(trunc, 1, 0), trunc) == -1.0);
    std::vector<double> mix(static_cast<std::size_t>(trunc.dim()), 0.0);
    mix[0] = mix[2] = 1.0 / std::sqrt(2.0); // (|0,up> + |1,up>)/sqrt(2)
    CHECK(observables::parity_expectation(mix, trunc) == doctest::Approx(0.0).epsilon(1e-15));

    // parity-definite ground state below g_c; observed sign recorded here
    const auto h = model::build_hamiltonian(rsm_params(0.5, 1.0, 0.3), {256});
    const auto sol = spectra::lowest_eigenpairs(h, 1);
    const double pexp = observables::parity_expectation(sol.eigenvectors[0], {256});
    CHECK(std::abs(std::abs(pexp) - 1.0) < 1e-8);
    CHECK(pexp > 0.0); // fixture: + sign with P = sigma_z (-1)^n on this branch
}

TEST_CASE("fidelity basics") {
    const auto p = qrm_params(0.5, 0.1);
    CHECK(observables::fidelity(p, 0.1, 0.0, {64}) == 1.0);
    const double f = observables::fidelity(p, 0.1, 1e-3, {64});
    CHECK(f > 0.999);
    CHECK(f < 1.0);
    // absolute overlap symmetry: the same coupling pair in either order
    const double fa = observables::fidelity(p, 0.1, 2e-3, {64});
    const double fb = observables::fidelity(p, 0.1, -2e-3, {64});
    CHECK(fa == doctest::Approx(fb).epsilon(1e-14));
}

TEST_CASE("degenerate ground state refuses fidelity-type observables") {
    const auto p = rsm_params(0.5, 1.0, 0.0); // (n_tr+1)-fold degenerate manifold
    CHECK_THROWS_AS((void)observables::fidelity(p, 0.0, 1e-4, {24}), observables::GaugeError);
    CHECK_THROWS_AS((void)observables::fidelity_susceptibility(
                        p, 0.0, observables::ChiFMethod::eigenstate_sum, {24}, 16),
                    observables::GaugeError);
}

TEST_CASE("QRM chi_F at g = 0 equals the single-matrix-element value") {
    const auto p = qrm_params(0.5, 0.0);
    const double expected = 1.0 / (1.5 * 1.5); // 1/(omega+delta)^2
    const double fd = observables::fidelity_susceptibility(
        p, 0.0, observables::ChiFMethod::finite_difference, {64});
    const double sum = observables::fidelity_susceptibility(
        p, 0.0, observables::ChiFMethod::eigenstate_sum, {64}, 32);
    CHECK(fd == doctest::Approx(expected).epsilon(1e-8));
    CHECK(sum == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("1 - F matches (chi/2) dg^2 to first order") {
    const auto p = qrm_params(0.5, 0.1);
    const double chi = observables::fidelity_susceptibility(
        p, 0.1, observables::ChiFMethod::eigenstate_sum, {128}, 48);
    const double dg = 1e-4;
    const double f = observables::fidelity(p, 0.1, dg, {128});
    CHECK(1.0 - f == doctest::Approx(0.5 * chi * dg * dg).epsilon(0.01));
}

TEST_CASE("three chi_F routes agree pairwise within 0.5%") {
    spectra::SolverOptions opts;
    opts.tol = 1e-11;
    struct Point {
        ModelParams p;
        int n_tr;
        int k_states;
    };
    // near the collapsed tower the sum needs a wide spectral window
    const Point points[] = {{qrm_params(0.5, 0.1), 96, 64}, {rsm_params(0.5, 1.0, 0.3), 256, 320}};
    for (const auto& [p, n_tr, k_states] : points) {
        const double g = p.coupling_g;
        const double fd = observables::fidelity_susceptibility(
            p, g, observables::ChiFMethod::finite_difference, {n_tr}, k_states, opts);
        const double sum = observables::fidelity_susceptibility(
            p, g, observables::ChiFMethod::eigenstate_sum, {n_tr}, k_states, opts);
        const double der = observables::fidelity_susceptibility(
            p, g, observables::ChiFMethod::derivative_form, {n_tr}, k_states, opts);
        CHECK(std::abs(fd - sum) / sum < 0.005);
        CHECK(std::abs(fd - der) / der < 0.005);
        CHECK(std::abs(sum - der) / der < 0.005);
    }
}

TEST_CASE("eigenstate_sum validates k_states and flags heavy tails") {
    CHECK_THROWS_AS((void)observables::fidelity_susceptibility(
                        qrm_params(0.5, 0.1), 0.1, observables::ChiFMethod::eigenstate_sum, {64},
                        4),
                    std::invalid_argument);
    // the collapsed tower at U = 1 carries weight far beyond 64 states
    CHECK_THROWS_WITH_AS((void)observables::fidelity_susceptibility(
                             rsm_params(0.5, 1.0, 0.3), 0.3,
                             observables::ChiFMethod::eigenstate_sum, {256}, 64),
                         doctest::Contains("increase k_states"), std::runtime_error);
}

TEST_CASE("state length validation") {
    std::vector<double> tiny(4, 0.5);
    CHECK_THROWS_AS((void)observables::mean_photon_number(tiny, {8}), std::invalid_argument);
}
