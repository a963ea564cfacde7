// runner.hpp — sweep configuration, orchestration, and dataset export.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rsm/cache.hpp"
#include "rsm/model.hpp"
#include "rsm/scaling.hpp"
#include "rsm/spectra.hpp"

namespace rsm::runner {

enum class SweepAxis { coupling_g, stark_u, truncation_n };

struct GridSpec {
    std::vector<double> values; // explicit, or generated from lo/hi/count
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;
    std::string spacing = "linear"; // or "log"

    std::vector<double> materialize() const;
};

struct SweepConfig {
    model::ModelParams model;
    SweepAxis sweep_axis = SweepAxis::coupling_g;
    GridSpec grid;
    std::vector<std::string> observables;
    spectra::ConvergencePolicy convergence;
    int fixed_n_tr = 0; // > 0: evaluate at this truncation, no ladder
    double solver_tol = 1e-10;
    std::string output_dir = "out";
    std::string cache_dir; // default: <output_dir>/cache; RSM_CACHE_DIR overrides
    int workers = 1;

    void validate() const;
};

SweepConfig load_sweep_config(const std::string& path,
                              const std::vector<std::string>& overrides = {});

struct SweepOutcome {
    int points_total = 0;
    int points_failed = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;
    std::uint64_t eigensolves = 0;
    std::vector<std::string> csv_files;
    std::string manifest_file;
};

/// Evaluates every (observable, grid point) cache-first, writes one CSV per
/// (observable, size label) plus a JSON manifest. Rerunning an identical
/// config performs no eigensolves. Returns per-point failure counts; the CLI
/// maps failures to a nonzero exit status.
SweepOutcome run_sweep(const SweepConfig& config);

/// One schema=1 series file: `# schema=1`, `# key=value` metadata lines, a
/// `abscissa,value,n_tr,converged,residual` header, then CSV rows with
/// 17-significant-digit floats.
struct SeriesFile {
    scaling::SweepSeries series;
    std::vector<int> n_tr;
    std::vector<int> converged;
    std::vector<double> residual;
    std::vector<std::pair<std::string, std::string>> meta;
};

void write_series_csv(const std::string& path, const SeriesFile& file);
SeriesFile read_series_csv(const std::string& path);

} // namespace rsm::runner
