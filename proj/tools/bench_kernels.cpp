// bench_kernels.cpp — timing comparison of the serial reference kernels and
// their OpenMP variants, plus a full eigensolve with each.
#include <chrono>
#include <cstdio>
#include <vector>

#include <omp.h>

#include "rsm/eigen_solve.hpp"
#include "rsm/kernels.hpp"
#include "rsm/model.hpp"

using namespace rsm;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

std::vector<double> make_vec(std::size_t n, std::uint64_t seed) {
    std::vector<double> v(n);
    std::uint64_t s = seed;
    for (auto& x : v) {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        x = static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
    }
    return v;
}

template <typename F>
double time_best_of(int reps, const F& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now_ms();
        f();
        best = std::min(best, now_ms() - t0);
    }
    return best;
}

} // namespace

int main() {
    const std::size_t n = 1 << 22;
    const int reps = 7;
    std::printf("threads available: %d\n", omp_get_max_threads());

    const auto x = make_vec(n, 1);
    const auto y = make_vec(n, 2);

    kernels::set_parallel(false);
    volatile double sink = 0.0;
    const double t_dot_ref = time_best_of(reps, [&] { sink = kernels::ref::dot(x, y); });
    kernels::set_parallel(true);
    const double t_dot_omp = time_best_of(reps, [&] { sink = kernels::dot(x, y); });
    const double d_ref = kernels::ref::dot(x, y);
    const double d_omp = kernels::dot(x, y);
    std::printf("dot       n=%zu: ref %.3f ms, omp %.3f ms, speedup %.2fx, bit-identical %s\n", n,
                t_dot_ref, t_dot_omp, t_dot_ref / t_dot_omp, d_ref == d_omp ? "yes" : "NO");

    model::ModelParams p;
    p.kind = model::ModelKind::RSM;
    p.delta = 0.5;
    p.stark_u = 1.0;
    p.coupling_g = 0.45;
    const model::FockTruncation trunc{4096};
    const auto h = model::build_hamiltonian(p, trunc);
    const auto a = kernels::Csr::from_operator(h);
    std::vector<double> xin = make_vec(static_cast<std::size_t>(a.dim), 3);
    std::vector<double> out_ref(xin.size()), out_omp(xin.size());

    kernels::set_parallel(false);
    const double t_spmv_ref =
        time_best_of(reps, [&] { kernels::ref::spmv(a, xin, out_ref); });
    kernels::set_parallel(true);
    const double t_spmv_omp = time_best_of(reps, [&] { a.apply(xin, out_omp); });
    bool same = out_ref == out_omp;
    std::printf("spmv    dim=%d: ref %.3f ms, omp %.3f ms, speedup %.2fx, bit-identical %s\n",
                a.dim, t_spmv_ref, t_spmv_omp, t_spmv_ref / t_spmv_omp, same ? "yes" : "NO");

    spectra::SolverOptions opts;
    kernels::set_parallel(false);
    const double t0 = now_ms();
    const auto sol_ref = spectra::lowest_eigenpairs(h, 2, opts);
    const double t_eig_ref = now_ms() - t0;
    kernels::set_parallel(true);
    const double t1 = now_ms();
    const auto sol_omp = spectra::lowest_eigenpairs(h, 2, opts);
    const double t_eig_omp = now_ms() - t1;
    same = sol_ref.eigenvalues == sol_omp.eigenvalues;
    std::printf("eigensolve dim=%d k=2: serial kernels %.1f ms, omp kernels %.1f ms, "
                "speedup %.2fx, identical eigenvalues %s\n",
                h.dim, t_eig_ref, t_eig_omp, t_eig_ref / t_eig_omp, same ? "yes" : "NO");
    std::printf("E0 = %.12f, E1 = %.12f\n", sol_omp.eigenvalues[0], sol_omp.eigenvalues[1]);
    (void)sink;
    return 0;
}
