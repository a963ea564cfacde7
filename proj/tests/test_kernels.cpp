#include <doctest.h>

#include <numeric>
#include <random>
#include <vector>

#include "rsm/kernels.hpp"
#include "rsm/model.hpp"

using namespace rsm;

namespace {

std::vector<double> random_vec(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v)
        x = dist(rng);
    return v;
}

} // namespace

TEST_CASE("omp kernels are bit-identical to the serial reference") {
    for (std::size_t n : {std::size_t(7), std::size_t(5000), std::size_t(64 * 1024 + 17)}) {
        const auto x = random_vec(n, 1);
        const auto y = random_vec(n, 2);
        kernels::set_parallel(true);
        CHECK(kernels::dot(x, y) == kernels::ref::dot(x, y));
        CHECK(kernels::nrm2(x) == kernels::ref::nrm2(x));

        auto a = x, b = x;
        kernels::axpy(0.37, y, a);
        kernels::ref::axpy(0.37, y, b);
        CHECK(a == b);
        kernels::scal(-1.7, a);
        kernels::ref::scal(-1.7, b);
        CHECK(a == b);
    }
}

TEST_CASE("dot agrees with a long-double reference sum") {
    const auto x = random_vec(10001, 3);
    const auto y = random_vec(10001, 4);
    long double acc = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i)
        acc += static_cast<long double>(x[i]) * y[i];
    CHECK(kernels::dot(x, y) == doctest::Approx(static_cast<double>(acc)).epsilon(1e-12));
    CHECK_THROWS_AS((void)kernels::dot(x, std::vector<double>(3)), std::invalid_argument);
}

TEST_CASE("csr assembly merges duplicates and validates indices") {
    model::SparseOperator op;
    op.dim = 3;
    op.entries = {{0, 1, 1.0}, {1, 0, 1.0}, {0, 1, 0.5}, {1, 0, 0.5}, {2, 2, 2.0}};
    const auto a = kernels::Csr::from_operator(op);
    std::vector<double> x = {1.0, 1.0, 1.0}, y(3);
    a.apply(x, y);
    CHECK(y[0] == doctest::Approx(1.5));
    CHECK(y[1] == doctest::Approx(1.5));
    CHECK(y[2] == doctest::Approx(2.0));

    op.entries.push_back({5, 0, 1.0});
    CHECK_THROWS_AS(kernels::Csr::from_operator(op), std::out_of_range);
}

TEST_CASE("spmv matches across variants on a physical matrix") {
    model::ModelParams p;
    p.stark_u = 1.0;
    p.coupling_g = 0.3;
    const auto h = model::build_hamiltonian(p, {2000});
    const auto a = kernels::Csr::from_operator(h);
    const auto x = random_vec(static_cast<std::size_t>(a.dim), 9);
    std::vector<double> y1(x.size()), y2(x.size());
    kernels::set_parallel(true);
    a.apply(x, y1);
    kernels::ref::spmv(a, x, y2);
    CHECK(y1 == y2);
}

TEST_CASE("projection kernels match their serial loops bitwise") {
    const std::size_t dim = 3000, count = 9;
    std::vector<double> basis;
    for (std::size_t j = 0; j < count; ++j) {
        auto v = random_vec(dim, static_cast<unsigned>(10 + j));
        basis.insert(basis.end(), v.begin(), v.end());
    }
    const auto w0 = random_vec(dim, 99);
    std::vector<double> c1(count), c2(count);
    kernels::set_parallel(true);
    kernels::project_coefficients(basis, dim, count, w0, c1);
    kernels::set_parallel(false);
    kernels::project_coefficients(basis, dim, count, w0, c2);
    kernels::set_parallel(true);
    CHECK(c1 == c2);

    auto wa = w0, wb = w0;
    kernels::set_parallel(true);
    kernels::subtract_projection(basis, dim, count, c1, wa);
    kernels::set_parallel(false);
    kernels::subtract_projection(basis, dim, count, c1, wb);
    kernels::set_parallel(true);
    CHECK(wa == wb);
}
