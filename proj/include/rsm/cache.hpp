// cache.hpp — content-addressed result cache for converged observable values.
#pragma once

#include <atomic>
#include <optional>
#include <string>

#include "rsm/model.hpp"
#include "rsm/spectra.hpp"

namespace rsm::runner {

/// Canonical serialization of one evaluation request: sorted keys, decimal
/// floats with 17 significant digits. Identical inputs give identical
/// digests on every platform.
std::string canonical_key(const model::ModelParams& params, int n_tr,
                          const std::string& observable, double tol);

/// 64-hex-character SHA-256 of canonical_key.
std::string cache_digest(const model::ModelParams& params, int n_tr,
                         const std::string& observable, double tol);

struct CacheRecord {
    double value = 0.0;
    int n_tr_used = 0;
    bool converged = true;
};

/// One JSON file per digest; writes go to a temp file then rename, so
/// concurrent workers never observe partial entries.
class Cache {
  public:
    Cache() = default;
    explicit Cache(std::string dir); // empty dir = disabled

    /// Directory from RSM_CACHE_DIR when set, else the given default.
    static std::string resolve_dir(const std::string& fallback);

    bool enabled() const { return !dir_.empty(); }
    std::optional<CacheRecord> get(const std::string& digest) const;
    void put(const std::string& digest, const std::string& canonical, const CacheRecord& rec) const;

    std::uint64_t hits() const { return hits_.load(); }
    std::uint64_t misses() const { return misses_.load(); }

  private:
    std::string dir_;
    mutable std::atomic<std::uint64_t> hits_{0};
    mutable std::atomic<std::uint64_t> misses_{0};
};

/// Cache-first single-truncation evaluation.
double cached_evaluate(const model::ModelParams& params, spectra::ObservableId id, int n_tr,
                       const spectra::SolverOptions& opts, const Cache* cache);

/// Cache-first convergence ladder: each rung is cached individually, so a
/// rerun replays the ladder without eigensolves.
spectra::ConvergedValue cached_converge(const model::ModelParams& params,
                                        spectra::ObservableId id,
                                        const spectra::ConvergencePolicy& policy,
                                        const spectra::SolverOptions& opts, const Cache* cache);

} // namespace rsm::runner
