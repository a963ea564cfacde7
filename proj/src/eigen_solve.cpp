#include "rsm/eigen_solve.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "rsm/kernels.hpp"

namespace rsm::spectra {

namespace {

std::atomic<std::uint64_t> g_solves{0};

// splitmix64: deterministic start vectors, no global RNG state
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<double> seeded_vector(int dim, std::uint64_t seed) {
    std::vector<double> v(static_cast<std::size_t>(dim));
    std::uint64_t s = seed;
    for (double& x : v) {
        const std::uint64_t r = splitmix64(s);
        x = 2.0 * (static_cast<double>(r >> 11) * 0x1.0p-53) - 1.0;
    }
    return v;
}

void gauge_fix(std::vector<double>& v) {
    std::size_t imax = 0;
    double amax = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > amax) {
            amax = a;
            imax = i;
        }
    }
    if (v[imax] < 0.0)
        for (double& x : v)
            x = -x;
}

struct RitzPair {
    double lambda;
    std::vector<double> vec;
    double residual;
};

// Lanczos with full reorthogonalization on a generic operator action.
// Returns the tridiagonal coefficients and the stored basis.
struct LanczosRun {
    std::vector<double> alpha;
    std::vector<double> beta; // beta[j] connects v_j and v_{j+1}
    std::vector<double> basis; // column-major, dim * steps
    int steps = 0;
};

template <typename Op>
LanczosRun run_lanczos(const Op& apply, int dim, int max_steps, std::uint64_t seed,
                       const std::vector<std::vector<double>>& deflate) {
    LanczosRun run;
    run.basis.reserve(static_cast<std::size_t>(dim) * static_cast<std::size_t>(max_steps));

    auto orth_against_deflated = [&](std::span<double> w) {
        for (const auto& d : deflate)
            kernels::axpy(-kernels::dot(d, w), d, w);
    };

    std::vector<double> v = seeded_vector(dim, seed);
    orth_against_deflated(v);
    double nv = kernels::nrm2(v);
    std::uint64_t reseed = seed;
    while (nv < 1e-8) { // start vector swallowed by deflation space
        reseed += 0x9E3779B9ULL;
        v = seeded_vector(dim, reseed);
        orth_against_deflated(v);
        nv = kernels::nrm2(v);
    }
    kernels::scal(1.0 / nv, v);

    std::vector<double> w(static_cast<std::size_t>(dim));
    std::vector<double> coeffs;
    for (int j = 0; j < max_steps; ++j) {
        run.basis.insert(run.basis.end(), v.begin(), v.end());
        run.steps = j + 1;
        apply(v, w);
        orth_against_deflated(w);
        const double a = kernels::dot(v, w);
        run.alpha.push_back(a);
        // two passes of classical Gram-Schmidt against the whole basis
        const std::size_t cnt = static_cast<std::size_t>(run.steps);
        coeffs.resize(cnt);
        for (int pass = 0; pass < 2; ++pass) {
            kernels::project_coefficients(run.basis, static_cast<std::size_t>(dim), cnt, w,
                                          coeffs);
            kernels::subtract_projection(run.basis, static_cast<std::size_t>(dim), cnt, coeffs,
                                         w);
            orth_against_deflated(w);
        }
        const double b = kernels::nrm2(w);
        if (j + 1 >= max_steps || b < 1e-13 * std::max(1.0, std::abs(a))) {
            run.beta.push_back(b);
            break;
        }
        run.beta.push_back(b);
        v = w;
        kernels::scal(1.0 / b, v);
    }
    return run;
}

// Selected Ritz pairs of the tridiagonal projection, assembled in the
// original space. keep_theta decides which transformed eigenvalues matter.
template <typename Keep>
std::vector<std::pair<double, std::vector<double>>> ritz_pairs(const LanczosRun& run, int dim,
                                                               const Keep& keep_theta) {
    const int m = run.steps;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        t(i, i) = run.alpha[static_cast<std::size_t>(i)];
        if (i + 1 < m) {
            t(i, i + 1) = run.beta[static_cast<std::size_t>(i)];
            t(i + 1, i) = run.beta[static_cast<std::size_t>(i)];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    std::vector<std::pair<double, std::vector<double>>> out;
    for (int i = 0; i < m; ++i) {
        if (!keep_theta(es.eigenvalues()(i), i, m))
            continue;
        std::vector<double> y(static_cast<std::size_t>(dim), 0.0);
        for (int j = 0; j < m; ++j) {
            const double c = es.eigenvectors()(j, i);
            kernels::ref::axpy(c, {run.basis.data() + static_cast<std::size_t>(j) * dim,
                                   static_cast<std::size_t>(dim)},
                               y);
        }
        const double ny = kernels::nrm2(y);
        if (ny > 0.0)
            kernels::scal(1.0 / ny, y);
        out.emplace_back(es.eigenvalues()(i), std::move(y));
    }
    return out;
}

EigenSolution dense_path(const kernels::Csr& a, int k, const SolverOptions& opts) {
    const int dim = a.dim;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int p = a.row_ptr[static_cast<std::size_t>(r)];
             p < a.row_ptr[static_cast<std::size_t>(r) + 1]; ++p)
            m(r, a.col[static_cast<std::size_t>(p)]) = a.val[static_cast<std::size_t>(p)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success)
        throw SolverError("dense eigensolver failed", std::numeric_limits<double>::infinity());
    EigenSolution sol;
    sol.n_tr_used = dim / 2 - 1;
    std::vector<double> hv(static_cast<std::size_t>(dim));
    for (int i = 0; i < k; ++i) {
        std::vector<double> v(static_cast<std::size_t>(dim));
        Eigen::VectorXd::Map(v.data(), dim) = es.eigenvectors().col(i);
        gauge_fix(v);
        const double lambda = es.eigenvalues()(i);
        a.apply(v, hv);
        kernels::axpy(-lambda, v, hv);
        sol.eigenvalues.push_back(lambda);
        sol.residuals.push_back(kernels::nrm2(hv));
        sol.eigenvectors.push_back(std::move(v));
    }
    return sol;
}

} // namespace

std::uint64_t eigensolve_count() { return g_solves.load(std::memory_order_relaxed); }

std::vector<double> dense_spectrum(const model::SparseOperator& h) {
    const auto a = kernels::Csr::from_operator(h);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.dim, a.dim);
    for (int r = 0; r < a.dim; ++r)
        for (int p = a.row_ptr[static_cast<std::size_t>(r)];
             p < a.row_ptr[static_cast<std::size_t>(r) + 1]; ++p)
            m(r, a.col[static_cast<std::size_t>(p)]) = a.val[static_cast<std::size_t>(p)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return {es.eigenvalues().data(), es.eigenvalues().data() + a.dim};
}

EigenSolution lowest_eigenpairs(const model::SparseOperator& h, int k, const SolverOptions& opts) {
    if (h.dim <= 0)
        throw std::invalid_argument("lowest_eigenpairs: empty operator");
    if (k < 1 || k > h.dim)
        throw std::invalid_argument("lowest_eigenpairs: need 1 <= k <= dim");
    if (!(opts.tol > 0.0))
        throw std::invalid_argument("lowest_eigenpairs: tol must be positive");
    g_solves.fetch_add(1, std::memory_order_relaxed);

    const auto a = kernels::Csr::from_operator(h);
    const int dim = a.dim;
    if (dim <= opts.dense_threshold || 3 * k > dim)
        return dense_path(a, k, opts);

    auto apply_a = [&](std::span<const double> x, std::span<double> y) { a.apply(x, y); };

    // pilot run on H itself: bounds for the shift heuristic
    const int pilot_steps = std::min(dim, std::max(80, 2 * k + 40));
    LanczosRun pilot = run_lanczos(apply_a, dim, pilot_steps, opts.seed, {});
    double theta_min = std::numeric_limits<double>::infinity();
    double theta_max = -std::numeric_limits<double>::infinity();
    {
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(pilot.steps, pilot.steps);
        for (int i = 0; i < pilot.steps; ++i) {
            t(i, i) = pilot.alpha[static_cast<std::size_t>(i)];
            if (i + 1 < pilot.steps) {
                t(i, i + 1) = pilot.beta[static_cast<std::size_t>(i)];
                t(i + 1, i) = pilot.beta[static_cast<std::size_t>(i)];
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
        theta_min = es.eigenvalues().minCoeff();
        theta_max = es.eigenvalues().maxCoeff();
    }
    const double spread = std::max(theta_max - theta_min, 1.0);
    const double scale0 = std::max(1.0, std::abs(theta_min));

    Eigen::SparseMatrix<double> hs(dim, dim);
    {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(h.entries.size() + static_cast<std::size_t>(dim));
        for (const auto& e : h.entries)
            trip.emplace_back(e.row, e.col, e.value);
        hs.setFromTriplets(trip.begin(), trip.end());
    }

    std::vector<RitzPair> accepted;
    std::vector<std::vector<double>> deflate;
    double sigma = theta_min - std::max(1e-2 * spread, 1e-6 * scale0);
    double best_residual = std::numeric_limits<double>::infinity();
    std::uint64_t seed = opts.seed;
    const int max_basis =
        opts.max_basis > 0 ? opts.max_basis : std::min(dim, std::max(160, 3 * k + 80));

    for (int pass = 0; pass < opts.max_passes && static_cast<int>(accepted.size()) < k; ++pass) {
        Eigen::SparseMatrix<double> shifted = hs;
        for (int i = 0; i < dim; ++i)
            shifted.coeffRef(i, i) -= sigma;
        shifted.makeCompressed();
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(shifted);
        if (lu.info() != Eigen::Success) {
            sigma -= std::max(1e-8 * scale0, 1e-3 * std::abs(sigma));
            continue;
        }
        Eigen::VectorXd xin(dim), xout(dim);
        auto apply_inv = [&](std::span<const double> x, std::span<double> y) {
            for (int i = 0; i < dim; ++i)
                xin(i) = x[static_cast<std::size_t>(i)];
            xout = lu.solve(xin);
            for (int i = 0; i < dim; ++i)
                y[static_cast<std::size_t>(i)] = xout(i);
        };

        LanczosRun run = run_lanczos(apply_inv, dim, max_basis, seed, deflate);
        seed += 0x9E3779B97F4A7C15ULL;
        const int want = k - static_cast<int>(accepted.size());
        // keep every theta < 0 (eigenvalues below the shift) plus the largest
        // positive ones; those map to the smallest eigenvalues of H
        auto keep = [&](double theta, int idx, int m) {
            if (theta < 0.0)
                return true;
            return idx >= m - (2 * want + 12);
        };
        auto pairs = ritz_pairs(run, dim, keep);

        std::vector<RitzPair> cand;
        std::vector<double> hv(static_cast<std::size_t>(dim));
        for (auto& [theta, vec] : pairs) {
            if (std::abs(theta) * spread < 1e3 * std::numeric_limits<double>::epsilon())
                continue;
            const double lambda = sigma + 1.0 / theta;
            a.apply(vec, hv);
            kernels::axpy(-lambda, vec, hv);
            const double res = kernels::nrm2(hv);
            cand.push_back({lambda, std::move(vec), res});
        }
        std::sort(cand.begin(), cand.end(),
                  [](const RitzPair& x, const RitzPair& y) { return x.lambda < y.lambda; });
        // accept ascending; stop at the first unconverged pair so the result
        // is always the k algebraically smallest
        for (auto& c : cand) {
            if (static_cast<int>(accepted.size()) >= k)
                break;
            best_residual = std::min(best_residual, c.residual);
            if (c.residual > opts.tol * std::max(1.0, std::abs(c.lambda)))
                break;
            bool dup = false;
            for (const auto& acc : accepted)
                if (std::abs(kernels::dot(acc.vec, c.vec)) > 0.5) {
                    dup = true;
                    break;
                }
            if (!dup)
                accepted.push_back(std::move(c));
        }
        std::sort(accepted.begin(), accepted.end(),
                  [](const RitzPair& x, const RitzPair& y) { return x.lambda < y.lambda; });

        if (static_cast<int>(accepted.size()) >= k)
            break;

        deflate.clear();
        for (const auto& acc : accepted)
            deflate.push_back(acc.vec);
        if (!accepted.empty()) {
            // refine the shift toward the cluster actually found
            const double lo = accepted.front().lambda;
            const double width = std::max(accepted.back().lambda - lo, 1e-10 * scale0);
            sigma = lo - width;
        } else if (!cand.empty()) {
            const double lo = cand.front().lambda;
            const std::size_t top = std::min<std::size_t>(cand.size() - 1,
                                                          static_cast<std::size_t>(k - 1));
            const double width = std::max(cand[top].lambda - lo, 1e-8 * scale0);
            sigma = lo - width;
        } else {
            sigma -= 0.01 * spread;
        }
    }

    if (static_cast<int>(accepted.size()) < k)
        throw SolverError("lowest_eigenpairs: no convergence for " + std::to_string(k) +
                              " pairs after iteration cap",
                          best_residual);

    accepted.resize(static_cast<std::size_t>(k));
    EigenSolution sol;
    sol.n_tr_used = dim / 2 - 1;
    for (auto& accRef : accepted) {
        gauge_fix(accRef.vec);
        sol.eigenvalues.push_back(accRef.lambda);
        sol.residuals.push_back(accRef.residual);
        sol.eigenvectors.push_back(std::move(accRef.vec));
    }
    return sol;
}

} // namespace rsm::spectra
