// kernels.hpp — dense/sparse vector kernels with OpenMP variants.
//
// Reductions use a fixed block decomposition (partial sums per block, then a
// serial sum over blocks), so the serial reference and the OpenMP path return
// bit-identical results for any thread count.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rsm/model.hpp"

namespace rsm::kernels {

inline constexpr std::size_t kBlock = 1024;

/// Process-wide switch for the OpenMP kernel variants. Kernels fall back to
/// the serial path automatically when already inside a parallel region.
void set_parallel(bool enabled);
bool parallel_enabled();

double dot(std::span<const double> x, std::span<const double> y);
double nrm2(std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);
void scal(double a, std::span<double> x);

/// Compressed sparse rows; duplicate coordinate entries are summed.
struct Csr {
    int dim = 0;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> val;

    static Csr from_operator(const model::SparseOperator& op);
    void apply(std::span<const double> x, std::span<double> y) const;
};

namespace ref {
double dot(std::span<const double> x, std::span<const double> y);
double nrm2(std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);
void scal(double a, std::span<double> x);
void spmv(const Csr& a, std::span<const double> x, std::span<double> y);
} // namespace ref

/// coeffs[j] = dot(basis_j, w) for the first `count` columns of a dim-major basis.
void project_coefficients(const std::vector<double>& basis, std::size_t dim, std::size_t count,
                          std::span<const double> w, std::span<double> coeffs);

/// w -= sum_j coeffs[j] * basis_j.
void subtract_projection(const std::vector<double>& basis, std::size_t dim, std::size_t count,
                         std::span<const double> coeffs, std::span<double> w);

} // namespace rsm::kernels
