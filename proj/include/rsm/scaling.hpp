// scaling.hpp — power-law fits, susceptibility peaks, data collapse,
// and the critical-exponent summary table.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rsm::scaling {

enum class SizeKind { effective_L, truncation_N };
enum class AbscissaKind { coupling_g, reduced_t };

/// One observable traced over a grid at a fixed size label.
struct SweepSeries {
    double size_label = 0.0;
    SizeKind size_kind = SizeKind::effective_L;
    AbscissaKind abscissa_kind = AbscissaKind::coupling_g;
    std::vector<std::pair<double, double>> points; // (abscissa, value), sorted

    void sort_points();
};

struct PowerLawFit {
    double exponent = 0.0;
    double log_intercept = 0.0;
    double r_squared = 0.0;
    std::pair<double, double> window{0.0, 0.0};
    int n_points = 0;
};

/// Least squares on (log10 x, log10 y) over the window. Requires >= 4
/// strictly positive points inside; offending points are listed otherwise.
PowerLawFit fit_power_law(const SweepSeries& series, std::pair<double, double> window);

/// Consecutive-point log-log slopes, for spotting drift out of the scaling
/// regime. Entries are (geometric-midpoint abscissa, local slope).
std::vector<std::pair<double, double>> local_slope_trace(const SweepSeries& series);

struct PeakResult {
    double g_m = 0.0;
    double chi_max = 0.0;
    double size_label = 0.0;
};

/// Golden-section refinement of a single interior maximum. The caller
/// supplies a bracket from a coarse scan; a maximum within tol of either
/// bracket end is rejected as "bracket too small".
PeakResult locate_peak(const std::function<double(double)>& chi, double lo, double hi,
                       double tol, double size_label = 0.0);

enum class CollapseAnsatz {
    order_parameter,   // M = |t|^beta m(|t| L^nu), separate branches by sign(t)
    fidelity_ratio,    // (chi_max - chi)/chi = f[(g - g_m) L^nu]
    generic_observable // A = |t|^beta f(|t| L^nu), separate branches
};

struct CollapseResult {
    double beta_used = 0.0;
    double nu_used = 0.0;
    CollapseAnsatz ansatz = CollapseAnsatz::order_parameter;
    double residual = 0.0;
    std::pair<double, double> overlap_range{0.0, 0.0};
};

/// Rescales every series into master coordinates, interpolates the
/// largest-size series as the reference curve, and returns the RMS relative
/// deviation of all other series over the overlap range. Deviations are
/// measured against max(|reference|, 5% of the reference curve scale).
CollapseResult collapse(const std::vector<SweepSeries>& series_set, double beta, double nu,
                        CollapseAnsatz ansatz);

/// Coordinate-search minimization of the collapse residual over (beta, nu),
/// starting from the given pair. Diagnostic only; tests pin exponents.
CollapseResult optimize_collapse(const std::vector<SweepSeries>& series_set, double beta0,
                                 double nu0, CollapseAnsatz ansatz, int rounds = 4);

struct TableCell {
    std::string observable;
    std::string column; // "y", "y_L", "y_N"
    double target = 0.0;
    double tolerance = 0.0;
    std::optional<PowerLawFit> fit; // empty when the cell computation failed
    std::string note;

    bool within() const { return fit && std::abs(fit->exponent - target) <= tolerance; }
};

struct ExponentTable {
    std::vector<TableCell> cells;
    // (observable, y_L/y_N, y/y_L); NaN where a contributing cell is missing
    std::vector<std::tuple<std::string, double, double>> ratios;
};

struct TableConfig {
    double delta = 0.5;
    double omega = 1.0;
    int workers = 1;
    std::string cache_dir; // empty = no on-disk caching
};

/// Truncation-converged chi_F peak at one effective size: coarse scan on
/// [scan_lo, scan_hi], then golden-section refinement to g_tol. Shared by the
/// exponent table and the acceptance drivers so cached evaluations coincide.
PeakResult converged_chi_peak(const TableConfig& config, double stark_u, double size_label,
                              double scan_lo, double scan_hi, double g_tol, double rel_tol,
                              int n_tr_start, int n_tr_cap);

/// Fits all twelve Table-style cells (gap, 1/nbar, dx, chi_F) x (y, y_L, y_N)
/// from fresh sweeps, plus the exponent ratios. Per-cell failures are
/// reported in the cell note; the table is still emitted.
ExponentTable exponent_table(const TableConfig& config);

} // namespace rsm::scaling
