// eigen_solve.hpp — lowest eigenpairs of real symmetric sparse operators.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rsm/model.hpp"

namespace rsm::spectra {

/// Lowest eigenpairs, ascending. Eigenvector global phase is fixed by making
/// the largest-magnitude component positive (first such index on ties).
struct EigenSolution {
    std::vector<double> eigenvalues;
    std::vector<std::vector<double>> eigenvectors;
    std::vector<double> residuals; // per pair, ||H v - lambda v||
    int n_tr_used = 0;
};

struct SolverOptions {
    double tol = 1e-10;   // accept pair when residual <= tol * max(1, |lambda|)
    std::uint64_t seed = 0x2545F4914F6CDD1DULL; // start-vector seed
    int dense_threshold = 256;
    int max_basis = 0;    // Lanczos basis cap per pass; 0 = automatic
    int max_passes = 6;
};

class SolverError : public std::runtime_error {
  public:
    SolverError(const std::string& what, double best_residual)
        : std::runtime_error(what), best_residual(best_residual) {}
    double best_residual = 0.0;
};

/// k algebraically smallest eigenpairs of a symmetric operator. Deterministic
/// for a fixed seed. Dense fallback below dense_threshold; otherwise
/// shift-invert Lanczos with full reorthogonalization and deflated restarts.
EigenSolution lowest_eigenpairs(const model::SparseOperator& h, int k,
                                const SolverOptions& opts = {});

/// Full spectrum by dense diagonalization (test oracle; dim is expected small).
std::vector<double> dense_spectrum(const model::SparseOperator& h);

/// Number of iterative/dense eigensolves performed by this process.
std::uint64_t eigensolve_count();

} // namespace rsm::spectra
