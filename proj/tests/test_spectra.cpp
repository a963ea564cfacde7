#include <doctest.h>

#include <cmath>

#include "rsm/oracle.hpp"
#include "rsm/spectra.hpp"

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

} // namespace

TEST_CASE("energy gap values") {
    CHECK(std::abs(spectra::energy_gap(rsm_params(0.5, 1.0, 0.0), {12})) < 1e-12);
    ModelParams qrm;
    qrm.kind = ModelKind::QRM;
    qrm.delta = 0.5;
    CHECK(spectra::energy_gap(qrm, {12}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(spectra::energy_gap(rsm_params(0.5, 1.0, 0.3), {512}) ==
          doctest::Approx(0.016011899898).epsilon(1e-6));
}

TEST_CASE("finite-difference stencils are exact on low-order polynomials") {
    std::vector<double> grid, flat, quad;
    const double h = 0.01;
    for (int i = 0; i < 11; ++i) {
        grid.push_back(0.3 + h * i);
        flat.push_back(4.2);
        quad.push_back(grid.back() * grid.back());
    }
    const auto [d1f, d2f] = spectra::finite_difference_derivatives(flat, h);
    const auto [d1q, d2q] = spectra::finite_difference_derivatives(quad, h);
    for (std::size_t i = 2; i + 2 < grid.size(); ++i) {
        CHECK(std::abs(d1f[i]) < 1e-12);
        CHECK(std::abs(d2f[i]) < 1e-9);
        CHECK(d1q[i] == doctest::Approx(2.0 * grid[i]).epsilon(1e-10));
        CHECK(d2q[i] == doctest::Approx(2.0).epsilon(1e-8));
    }
    CHECK(std::isnan(d1q[0]));
    CHECK(std::isnan(d2q[1]));
}

TEST_CASE("derivative curve on the model validates its grid") {
    const std::vector<double> bad = {0.1, 0.2, 0.25};
    CHECK_THROWS_AS(spectra::ground_energy_derivatives(rsm_params(0.5, 0.9, 0.0), bad),
                    std::invalid_argument);
}

TEST_CASE("convergence at g = 0 is immediate") {
    ModelParams qrm;
    qrm.kind = ModelKind::QRM;
    qrm.delta = 0.5;
    spectra::ConvergencePolicy pol;
    pol.n_tr_start = 8;
    const auto before = spectra::eigensolve_count();
    const auto res = spectra::converge_truncation(qrm, spectra::ObservableId::ground_energy, pol);
    CHECK(res.value == doctest::Approx(-0.25).epsilon(1e-13));
    CHECK(res.n_tr_used <= 16); // first comparison already converged
    CHECK(spectra::eigensolve_count() - before == 2);
}

TEST_CASE("converged ground energy matches the oracle root") {
    spectra::ConvergencePolicy pol;
    pol.rel_tol = 1e-9;
    pol.n_tr_start = 32;
    const auto res =
        spectra::converge_truncation(rsm_params(0.5, 1.0, 0.1), spectra::ObservableId::ground_energy, pol);
    CHECK(res.value == doctest::Approx(oracle::solve_low_spectrum(0.5, 0.1, 0)).epsilon(1e-8));
    CHECK(res.n_tr_used <= 128);
}

TEST_CASE("ground energy is monotone non-increasing in the truncation") {
    const auto p = rsm_params(0.5, 1.0, 0.45);
    double prev = spectra::evaluate_observable(p, spectra::ObservableId::ground_energy, {64});
    for (int n : {128, 256, 512}) {
        const double cur = spectra::evaluate_observable(p, spectra::ObservableId::ground_energy, {n});
        CHECK(cur <= prev + 1e-12);
        prev = cur;
    }
}

TEST_CASE("cap reached carries the last two values") {
    spectra::ConvergencePolicy pol;
    pol.rel_tol = 1e-12;
    pol.n_tr_start = 8;
    pol.n_tr_cap = 32;
    try {
        (void)spectra::converge_truncation(rsm_params(0.5, 1.0, 0.45),
                                           spectra::ObservableId::mean_photon, pol);
        FAIL("expected ConvergenceError");
    } catch (const spectra::ConvergenceError& e) {
        CHECK(std::isfinite(e.last));
        CHECK(e.n_tr == 32);
    }
}

TEST_CASE("policy validation") {
    spectra::ConvergencePolicy pol;
    pol.growth_factor = 1.0;
    CHECK_THROWS_AS(pol.validate(), std::invalid_argument);
    pol = {};
    pol.n_tr_start = 1;
    CHECK_THROWS_AS(pol.validate(), std::invalid_argument);
    pol = {};
    pol.rel_tol = 0.0;
    CHECK_THROWS_AS(pol.validate(), std::invalid_argument);
}
