#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "rsm/eigen_solve.hpp"
#include "rsm/kernels.hpp"
#include "rsm/model.hpp"

using namespace rsm;
using model::ModelKind;
using model::ModelParams;

namespace {

double element(const model::SparseOperator& op, int row, int col) {
    double v = 0.0;
    for (const auto& e : op.entries)
        if (e.row == row && e.col == col)
            v += e.value;
    return v;
}

ModelParams rsm_params(double delta, double u, double g) {
    ModelParams p;
    p.kind = ModelKind::RSM;
    p.delta = delta;
    p.stark_u = u;
    p.coupling_g = g;
    return p;
}

} // namespace

TEST_CASE("hamiltonian matrix elements follow the model definition") {
    const auto h = model::build_hamiltonian(rsm_params(0.5, 1.0, 0.7), {8});
    CHECK(element(h, 2 * 3, 2 * 3) == doctest::Approx(6.25).epsilon(1e-15)); // <3,up|H|3,up>
    CHECK(element(h, 2 * 3 + 1, 2 * 3 + 1) == doctest::Approx(-0.25 - 3.0 + 3.0).epsilon(1e-15));

    const auto h2 = model::build_hamiltonian(rsm_params(0.5, 0.3, 0.4), {8});
    CHECK(element(h2, 1, 2) == doctest::Approx(0.4).epsilon(1e-15)); // <0,down|H|1,up> = g
    CHECK(element(h2, 0, 3) == doctest::Approx(0.4).epsilon(1e-15)); // <0,up|H|1,down>
    CHECK(element(h2, 2, 5) == doctest::Approx(0.4 * std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("decoupled spectra at g = 0") {
    ModelParams qrm;
    qrm.kind = ModelKind::QRM;
    qrm.delta = 0.5;
    qrm.coupling_g = 0.0;
    const auto vals = spectra::dense_spectrum(model::build_hamiltonian(qrm, {16}));
    CHECK(vals.front() == doctest::Approx(-0.25).epsilon(1e-14));

    // RSM at U = 1, g = 0: every |n,down> sits at -delta/2
    const auto vals2 = spectra::dense_spectrum(model::build_hamiltonian(rsm_params(0.5, 1.0, 0.0), {16}));
    int degeneracy = 0;
    for (double v : vals2)
        if (std::abs(v + 0.25) < 1e-12)
            ++degeneracy;
    CHECK(degeneracy == 17); // n_tr + 1
    CHECK(vals2.front() == doctest::Approx(-0.25).epsilon(1e-14));
}

TEST_CASE("every built hamiltonian is exactly symmetric") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (int trial = 0; trial < 8; ++trial) {
        ModelParams p;
        p.kind = (trial % 2 == 0) ? ModelKind::RSM : ModelKind::QRM;
        p.delta = 2.0 * dist(rng) - 0.5;
        p.stark_u = 2.0 * dist(rng) - 1.0;
        p.coupling_g = dist(rng);
        const auto h = model::build_hamiltonian(p, {5 + trial});
        std::map<std::pair<int, int>, double> m;
        for (const auto& e : h.entries)
            m[{e.row, e.col}] += e.value;
        for (const auto& [rc, v] : m)
            CHECK(m.at({rc.second, rc.first}) == v);
    }
}

TEST_CASE("parity operator and exact commutation with H") {
    const model::FockTruncation trunc{9};
    const auto p = model::build_parity_operator(trunc);
    CHECK(element(p, 0, 0) == 1.0);  // |0,up>
    CHECK(element(p, 2, 2) == -1.0); // |1,up>
    CHECK(element(p, 3, 3) == 1.0);  // |1,down>

    // P is diagonal, so [H,P]_{ij} = H_ij (P_jj - P_ii); H only connects
    // states of equal parity, hence the commutator vanishes identically.
    std::map<int, double> pd;
    for (const auto& e : p.entries)
        pd[e.row] = e.value;
    for (double u : {1.0, -1.0, 0.3}) {
        const auto h = model::build_hamiltonian(rsm_params(0.5, u, 0.8), trunc);
        for (const auto& e : h.entries)
            CHECK(pd.at(e.row) == pd.at(e.col));
    }
}

TEST_CASE("critical point data") {
    const auto c1 = model::critical_point(rsm_params(0.5, 1.0, 0.5));
    CHECK(c1.g_c == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(c1.e_c == doctest::Approx(-0.75).epsilon(1e-15));
    CHECK(c1.branch == model::Branch::plus);

    const auto c2 = model::critical_point(rsm_params(0.5, -1.0, 0.0));
    CHECK(c2.g_c == doctest::Approx(std::sqrt(0.75)).epsilon(1e-15));
    CHECK(c2.e_c == doctest::Approx(0.25).epsilon(1e-15));

    ModelParams qrm;
    qrm.kind = ModelKind::QRM;
    qrm.delta = 1e8;
    CHECK(model::critical_point(qrm).g_c == doctest::Approx(5000.0).epsilon(1e-12));

    CHECK_THROWS_AS(model::critical_point(rsm_params(1.5, 1.0, 0.0)), std::domain_error);
}

TEST_CASE("effective size") {
    CHECK(model::effective_size(rsm_params(0.5, 0.99, 0.0)) == doctest::Approx(100.0));
    CHECK(model::effective_size(rsm_params(0.5, -0.9, 0.0)) == doctest::Approx(10.0));
    ModelParams qrm;
    qrm.kind = ModelKind::QRM;
    qrm.delta = 1e8;
    CHECK(model::effective_size(qrm) == doctest::Approx(1e8));
    CHECK_THROWS_AS(model::effective_size(rsm_params(0.5, 1.0, 0.0)), std::domain_error);
    CHECK_THROWS_AS(model::effective_size(rsm_params(0.5, -1.0, 0.0)), std::domain_error);
}

TEST_CASE("U = 0 RSM equals the QRM matrix") {
    ModelParams rsm0 = rsm_params(0.7, 0.0, 0.4);
    ModelParams qrm = rsm0;
    qrm.kind = ModelKind::QRM;
    qrm.stark_u = 0.77; // must be ignored
    const auto ha = model::build_hamiltonian(rsm0, {12});
    const auto hb = model::build_hamiltonian(qrm, {12});
    REQUIRE(ha.entries.size() == hb.entries.size());
    for (std::size_t i = 0; i < ha.entries.size(); ++i) {
        CHECK(ha.entries[i].row == hb.entries[i].row);
        CHECK(ha.entries[i].col == hb.entries[i].col);
        CHECK(ha.entries[i].value == hb.entries[i].value);
    }
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(model::build_hamiltonian(rsm_params(0.5, 1.0, 0.3), {0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(model::build_hamiltonian(rsm_params(0.5, 1.0, -0.1), {4}),
                    std::invalid_argument);
    ModelParams bad = rsm_params(0.5, 1.0, 0.1);
    bad.delta = std::nan("");
    CHECK_THROWS_AS(model::build_hamiltonian(bad, {4}), std::invalid_argument);
    bad = rsm_params(0.5, 1.0, 0.1);
    bad.omega = 0.0;
    CHECK_THROWS_AS(model::build_hamiltonian(bad, {4}), std::invalid_argument);
    CHECK_THROWS_AS(model::build_parity_operator({0}), std::invalid_argument);
}
