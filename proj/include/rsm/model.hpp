// model.hpp — Rabi-Stark / quantum Rabi model parameters and truncated-Fock-space operators
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsm::model {

enum class ModelKind { RSM, QRM };
enum class Branch { plus, minus };

/// Physical configuration of every computation. Units of omega unless stated.
struct ModelParams {
    ModelKind kind = ModelKind::RSM;
    double delta = 0.5;      // qubit frequency
    double omega = 1.0;      // cavity frequency, > 0
    double stark_u = 1.0;    // Stark coupling U; ignored for QRM
    double coupling_g = 0.0; // qubit-cavity coupling, >= 0

    void validate() const;
};

/// Maximum photon number retained. Hilbert-space dimension is 2*(n_tr+1).
struct FockTruncation {
    int n_tr = 0;

    int dim() const { return 2 * (n_tr + 1); }
};

/// Real symmetric operator in coordinate format on the ordered basis
/// |n,s> with index 2n+s (s=0 spin up, s=1 spin down).
struct SparseOperator {
    int dim = 0;
    struct Entry {
        int row;
        int col;
        double value;
    };
    std::vector<Entry> entries;
};

struct CriticalData {
    double g_c = 0.0; // critical coupling
    double e_c = 0.0; // collapse energy at the params' g
    Branch branch = Branch::plus;
};

/// H = (Delta/2 + U a†a) σ_z + ω a†a + g (a†+a) σ_x on the truncated basis.
/// QRM kind sets U = 0 identically.
SparseOperator build_hamiltonian(const ModelParams& params, const FockTruncation& trunc);

/// P = σ_z ⊗ (−1)^{a†a}; diagonal, commutes exactly with every built H.
SparseOperator build_parity_operator(const FockTruncation& trunc);

/// Critical coupling and collapse energy. RSM branch selected by the sign of
/// stark_u (the critical data of the |U|=1 limit; finite-|U| sweeps use it as
/// their reference point). QRM: g_c = sqrt(omega*delta)/2.
CriticalData critical_point(const ModelParams& params);

/// RSM: L = 1/(1 ∓ U); QRM: L = delta/omega. Rejects U = ±1 exactly
/// (callers treat that as the thermodynamic-limit label).
double effective_size(const ModelParams& params);

} // namespace rsm::model
