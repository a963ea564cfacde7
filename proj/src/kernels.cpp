#include "rsm/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <omp.h>

namespace rsm::kernels {

namespace {

std::atomic<bool> g_parallel{true};

inline double block_sum_dot(std::span<const double> x, std::span<const double> y,
                            std::size_t block) {
    double s = 0.0;
    const std::size_t lo = block * kBlock;
    const std::size_t hi = std::min(lo + kBlock, x.size());
    for (std::size_t i = lo; i < hi; ++i)
        s += x[i] * y[i];
    return s;
}

inline std::size_t block_count(std::size_t n) { return (n + kBlock - 1) / kBlock; }

} // namespace

void set_parallel(bool enabled) { g_parallel.store(enabled, std::memory_order_relaxed); }

bool parallel_enabled() {
    return g_parallel.load(std::memory_order_relaxed) && omp_in_parallel() == 0;
}

namespace ref {

double dot(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("dot: size mismatch");
    const std::size_t nb = block_count(x.size());
    double s = 0.0;
    for (std::size_t b = 0; b < nb; ++b)
        s += block_sum_dot(x, y, b);
    return s;
}

double nrm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("axpy: size mismatch");
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] += a * x[i];
}

void scal(double a, std::span<double> x) {
    for (double& v : x)
        v *= a;
}

void spmv(const Csr& a, std::span<const double> x, std::span<double> y) {
    for (int r = 0; r < a.dim; ++r) {
        double s = 0.0;
        for (int p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p)
            s += a.val[p] * x[static_cast<std::size_t>(a.col[p])];
        y[static_cast<std::size_t>(r)] = s;
    }
}

} // namespace ref

double dot(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("dot: size mismatch");
    if (!parallel_enabled() || x.size() < 4 * kBlock)
        return ref::dot(x, y);
    const std::size_t nb = block_count(x.size());
    std::vector<double> partial(nb);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b)
        partial[static_cast<std::size_t>(b)] = block_sum_dot(x, y, static_cast<std::size_t>(b));
    double s = 0.0;
    for (double p : partial)
        s += p;
    return s;
}

double nrm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("axpy: size mismatch");
    if (!parallel_enabled() || x.size() < 8 * kBlock) {
        ref::axpy(a, x, y);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(x.size()); ++i)
        y[static_cast<std::size_t>(i)] += a * x[static_cast<std::size_t>(i)];
}

void scal(double a, std::span<double> x) {
    if (!parallel_enabled() || x.size() < 8 * kBlock) {
        ref::scal(a, x);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(x.size()); ++i)
        x[static_cast<std::size_t>(i)] *= a;
}

Csr Csr::from_operator(const model::SparseOperator& op) {
    if (op.dim <= 0)
        throw std::invalid_argument("Csr: operator dimension must be positive");
    Csr a;
    a.dim = op.dim;
    std::vector<int> counts(static_cast<std::size_t>(op.dim) + 1, 0);
    for (const auto& e : op.entries) {
        if (e.row < 0 || e.row >= op.dim || e.col < 0 || e.col >= op.dim)
            throw std::out_of_range("Csr: entry index outside [0, dim)");
        ++counts[static_cast<std::size_t>(e.row) + 1];
    }
    a.row_ptr.assign(counts.begin(), counts.end());
    for (std::size_t r = 1; r < a.row_ptr.size(); ++r)
        a.row_ptr[r] += a.row_ptr[r - 1];
    std::vector<int> cursor(a.row_ptr.begin(), a.row_ptr.end() - 1);
    a.col.resize(op.entries.size());
    a.val.resize(op.entries.size());
    for (const auto& e : op.entries) {
        const int p = cursor[static_cast<std::size_t>(e.row)]++;
        a.col[static_cast<std::size_t>(p)] = e.col;
        a.val[static_cast<std::size_t>(p)] = e.value;
    }
    // merge duplicates row by row (insertion sort; rows are short)
    std::vector<int> new_ptr(a.row_ptr.size());
    int write = 0;
    for (int r = 0; r < a.dim; ++r) {
        new_ptr[static_cast<std::size_t>(r)] = write;
        const int lo = a.row_ptr[static_cast<std::size_t>(r)];
        const int hi = a.row_ptr[static_cast<std::size_t>(r) + 1];
        for (int p = lo; p < hi; ++p) {
            int c = a.col[static_cast<std::size_t>(p)];
            double v = a.val[static_cast<std::size_t>(p)];
            int q = write;
            while (q > new_ptr[static_cast<std::size_t>(r)] &&
                   a.col[static_cast<std::size_t>(q - 1)] > c)
                --q;
            if (q > new_ptr[static_cast<std::size_t>(r)] &&
                a.col[static_cast<std::size_t>(q - 1)] == c) {
                a.val[static_cast<std::size_t>(q - 1)] += v;
                continue;
            }
            for (int m = write; m > q; --m) {
                a.col[static_cast<std::size_t>(m)] = a.col[static_cast<std::size_t>(m - 1)];
                a.val[static_cast<std::size_t>(m)] = a.val[static_cast<std::size_t>(m - 1)];
            }
            a.col[static_cast<std::size_t>(q)] = c;
            a.val[static_cast<std::size_t>(q)] = v;
            ++write;
        }
    }
    new_ptr.back() = write;
    a.col.resize(static_cast<std::size_t>(write));
    a.val.resize(static_cast<std::size_t>(write));
    a.row_ptr = std::move(new_ptr);
    return a;
}

void Csr::apply(std::span<const double> x, std::span<double> y) const {
    if (static_cast<int>(x.size()) != dim || static_cast<int>(y.size()) != dim)
        throw std::invalid_argument("Csr::apply: size mismatch");
    if (!parallel_enabled() || dim < 2048) {
        ref::spmv(*this, x, y);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int r = 0; r < dim; ++r) {
        double s = 0.0;
        for (int p = row_ptr[r]; p < row_ptr[r + 1]; ++p)
            s += val[p] * x[static_cast<std::size_t>(col[p])];
        y[static_cast<std::size_t>(r)] = s;
    }
}

void project_coefficients(const std::vector<double>& basis, std::size_t dim, std::size_t count,
                          std::span<const double> w, std::span<double> coeffs) {
    if (basis.size() < dim * count || w.size() != dim || coeffs.size() < count)
        throw std::invalid_argument("project_coefficients: size mismatch");
    if (!parallel_enabled() || count * dim < 16 * kBlock) {
        for (std::size_t j = 0; j < count; ++j)
            coeffs[j] = ref::dot({basis.data() + j * dim, dim}, w);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(count); ++j)
        coeffs[static_cast<std::size_t>(j)] =
            ref::dot({basis.data() + static_cast<std::size_t>(j) * dim, dim}, w);
}

void subtract_projection(const std::vector<double>& basis, std::size_t dim, std::size_t count,
                         std::span<const double> coeffs, std::span<double> w) {
    if (basis.size() < dim * count || w.size() != dim || coeffs.size() < count)
        throw std::invalid_argument("subtract_projection: size mismatch");
    if (!parallel_enabled() || count * dim < 16 * kBlock) {
        for (std::size_t j = 0; j < count; ++j)
            ref::axpy(-coeffs[j], {basis.data() + j * dim, dim}, w);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(dim); ++i) {
        double acc = w[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < count; ++j)
            acc -= coeffs[j] * basis[j * dim + static_cast<std::size_t>(i)];
        w[static_cast<std::size_t>(i)] = acc;
    }
}

} // namespace rsm::kernels
