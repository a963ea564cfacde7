// rsm_main.cpp — command-line front end: sweeps, fits, collapse, peaks,
// derivatives, the closed-form oracle, and the exponent-table reproduction.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsm/cache.hpp"
#include "rsm/kernels.hpp"
#include "rsm/model.hpp"
#include "rsm/observables.hpp"
#include "rsm/oracle.hpp"
#include "rsm/runner.hpp"
#include "rsm/scaling.hpp"
#include "rsm/spectra.hpp"

namespace {

using nlohmann::json;

std::pair<double, double> parse_window(const std::string& s) {
    const std::size_t colon = s.find(':');
    if (colon == std::string::npos)
        throw CLI::ValidationError("window", "expected lo:hi");
    return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

rsm::model::ModelParams model_from_json(const json& j) {
    rsm::model::ModelParams p;
    const std::string kind = j.value("kind", "RSM");
    p.kind = (kind == "QRM") ? rsm::model::ModelKind::QRM : rsm::model::ModelKind::RSM;
    p.delta = j.value("delta", 0.5);
    p.omega = j.value("omega", 1.0);
    p.stark_u = j.value("stark_u", 1.0);
    p.coupling_g = j.value("coupling_g", 0.0);
    p.validate();
    return p;
}

rsm::spectra::ConvergencePolicy policy_from_json(const json& j) {
    rsm::spectra::ConvergencePolicy pol;
    pol.rel_tol = j.value("rel_tol", pol.rel_tol);
    pol.n_tr_start = j.value("n_tr_start", pol.n_tr_start);
    pol.growth_factor = j.value("growth_factor", pol.growth_factor);
    pol.n_tr_cap = j.value("n_tr_cap", pol.n_tr_cap);
    return pol;
}

json apply_sets(json cfg, const std::vector<std::string>& sets) {
    for (const auto& ov : sets) {
        const std::size_t eq = ov.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("--set expects key.path=value, got: " + ov);
        json* cur = &cfg;
        std::string path = ov.substr(0, eq);
        std::size_t pos = 0;
        while (true) {
            const std::size_t dot = path.find('.', pos);
            const std::string key = path.substr(pos, dot - pos);
            cur = &(*cur)[key];
            if (dot == std::string::npos)
                break;
            pos = dot + 1;
        }
        const std::string raw = ov.substr(eq + 1);
        try {
            *cur = json::parse(raw);
        } catch (const json::parse_error&) {
            *cur = raw;
        }
    }
    return cfg;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& sets) {
    const auto cfg = rsm::runner::load_sweep_config(config_path, sets);
    const auto outcome = rsm::runner::run_sweep(cfg);
    std::printf("sweep: %d points, %d failed, cache hits %llu misses %llu, eigensolves %llu\n",
                outcome.points_total, outcome.points_failed,
                static_cast<unsigned long long>(outcome.cache_hits),
                static_cast<unsigned long long>(outcome.cache_misses),
                static_cast<unsigned long long>(outcome.eigensolves));
    for (const auto& f : outcome.csv_files)
        std::printf("  wrote %s\n", f.c_str());
    std::printf("  manifest %s\n", outcome.manifest_file.c_str());
    return outcome.points_failed == 0 ? 0 : 1;
}

int cmd_fit(const std::string& input, const std::string& window_str, bool invert) {
    const auto window = parse_window(window_str);
    auto file = rsm::runner::read_series_csv(input);
    if (invert)
        for (auto& [x, y] : file.series.points)
            y = 1.0 / y;
    const auto fit = rsm::scaling::fit_power_law(file.series, window);
    std::printf("fit: exponent=%.6f intercept=%.6f r2=%.8f n=%d window=[%g,%g]\n", fit.exponent,
                fit.log_intercept, fit.r_squared, fit.n_points, fit.window.first,
                fit.window.second);
    const auto trace = rsm::scaling::local_slope_trace(file.series);
    std::printf("local slopes:");
    for (const auto& [x, s] : trace)
        std::printf(" (%.3g: %.3f)", x, s);
    std::printf("\n");
    return 0;
}

int cmd_collapse(const std::string& config_path, const std::vector<std::string>& sets) {
    const json cfg = apply_sets(load_json(config_path), sets);
    std::vector<rsm::scaling::SweepSeries> series;
    for (const auto& path : cfg.at("series").get<std::vector<std::string>>()) {
        auto file = rsm::runner::read_series_csv(path);
        auto s = file.series;
        if (cfg.value("value", "identity") == std::string("inverse"))
            for (auto& [x, y] : s.points)
                y = 1.0 / y;
        if (cfg.value("to_reduced", false)) {
            double delta = 0.5, omega = 1.0, stark_u = 1.0;
            std::string kind = "RSM";
            for (const auto& [k, v] : file.meta) {
                if (k == "delta")
                    delta = std::stod(v);
                if (k == "omega")
                    omega = std::stod(v);
                if (k == "stark_u")
                    stark_u = std::stod(v);
                if (k == "kind")
                    kind = v;
            }
            rsm::model::ModelParams p;
            p.kind = (kind == "QRM") ? rsm::model::ModelKind::QRM : rsm::model::ModelKind::RSM;
            p.delta = delta;
            p.omega = omega;
            p.stark_u = stark_u;
            const double gc = rsm::model::critical_point(p).g_c;
            for (auto& [x, y] : s.points)
                x = 1.0 - x / gc;
            std::sort(s.points.begin(), s.points.end());
            s.abscissa_kind = rsm::scaling::AbscissaKind::reduced_t;
        }
        series.push_back(std::move(s));
    }
    const std::string ansatz_name = cfg.value("ansatz", "order_parameter");
    rsm::scaling::CollapseAnsatz ansatz = rsm::scaling::CollapseAnsatz::order_parameter;
    if (ansatz_name == "fidelity_ratio")
        ansatz = rsm::scaling::CollapseAnsatz::fidelity_ratio;
    else if (ansatz_name == "generic_observable")
        ansatz = rsm::scaling::CollapseAnsatz::generic_observable;
    else if (ansatz_name != "order_parameter")
        throw std::runtime_error("unknown ansatz: " + ansatz_name);
    const double beta = cfg.value("beta", 1.0);
    const double nu = cfg.value("nu", 1.0 / 3.0);
    const auto res = rsm::scaling::collapse(series, beta, nu, ansatz);
    std::printf("collapse: residual=%.6g overlap=[%.6g,%.6g] beta=%g nu=%g ansatz=%s\n",
                res.residual, res.overlap_range.first, res.overlap_range.second, beta, nu,
                ansatz_name.c_str());
    if (cfg.contains("output")) {
        json out;
        out["residual"] = res.residual;
        out["beta"] = beta;
        out["nu"] = nu;
        out["ansatz"] = ansatz_name;
        out["overlap"] = {res.overlap_range.first, res.overlap_range.second};
        std::ofstream o(cfg["output"].get<std::string>());
        o << out.dump(2) << "\n";
    }
    return 0;
}

int cmd_peak(const std::string& config_path, const std::vector<std::string>& sets) {
    const json cfg = apply_sets(load_json(config_path), sets);
    const auto p = model_from_json(cfg.at("model"));
    const auto pol = policy_from_json(cfg.value("convergence", json::object()));
    rsm::spectra::SolverOptions opts;
    opts.tol = cfg.value("solver_tol", 1e-11);
    rsm::runner::Cache cache(rsm::runner::Cache::resolve_dir(cfg.value("cache_dir", "")));
    const int fixed_n_tr = cfg.value("fixed_n_tr", 0);
    auto chi = [&](double g) {
        rsm::model::ModelParams pg = p;
        pg.coupling_g = g;
        if (fixed_n_tr > 0)
            return rsm::runner::cached_evaluate(
                pg, rsm::spectra::ObservableId::fidelity_susceptibility, fixed_n_tr, opts,
                &cache);
        return rsm::runner::cached_converge(
                   pg, rsm::spectra::ObservableId::fidelity_susceptibility, pol, opts, &cache)
            .value;
    };
    const json scan = cfg.at("scan");
    const double lo = scan.at("lo").get<double>();
    const double hi = scan.at("hi").get<double>();
    const int npts = scan.value("points", 16);
    std::vector<double> gs, vals;
    for (int i = 0; i < npts; ++i) {
        gs.push_back(lo + (hi - lo) * i / (npts - 1));
        vals.push_back(chi(gs.back()));
    }
    const auto imax =
        static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
    if (imax == 0 || imax + 1 == gs.size())
        throw std::runtime_error("peak: maximum at scan boundary, widen the scan");
    const double tol = cfg.value("tol", 1e-6);
    const auto peak = rsm::scaling::locate_peak(chi, gs[imax - 1], gs[imax + 1], tol,
                                                cfg.value("size_label", 0.0));
    std::printf("peak: g_m=%.10g chi_max=%.10g\n", peak.g_m, peak.chi_max);
    if (cfg.contains("output")) {
        json out;
        out["g_m"] = peak.g_m;
        out["chi_max"] = peak.chi_max;
        out["size_label"] = peak.size_label;
        std::ofstream o(cfg["output"].get<std::string>());
        o << out.dump(2) << "\n";
    }
    return 0;
}

int cmd_derivatives(const std::string& config_path, const std::vector<std::string>& sets) {
    const json cfg = apply_sets(load_json(config_path), sets);
    const auto p = model_from_json(cfg.at("model"));
    const auto pol = policy_from_json(cfg.value("convergence", json::object()));
    const json grid = cfg.at("grid");
    const double lo = grid.at("lo").get<double>();
    const double hi = grid.at("hi").get<double>();
    const int count = grid.at("count").get<int>();
    std::vector<double> gs;
    for (int i = 0; i < count; ++i)
        gs.push_back(lo + (hi - lo) * i / (count - 1));
    rsm::spectra::SolverOptions opts;
    opts.tol = cfg.value("solver_tol", 1e-10);
    const auto curve = rsm::spectra::ground_energy_derivatives(p, gs, pol, opts);
    const std::string out_path = cfg.value("output_csv", "derivatives.csv");
    std::ofstream out(out_path, std::ios::binary);
    out << "# schema=1\n# columns=g,e0,d1,d2\ng,e0,d1,d2\n";
    char buf[160];
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", curve.grid[i], curve.e0[i],
                      curve.d1[i], curve.d2[i]);
        out << buf;
    }
    std::printf("derivatives: wrote %s (%zu points, step %.3g)\n", out_path.c_str(),
                curve.grid.size(), curve.step);
    return 0;
}

int cmd_oracle(double delta, double g, int levels) {
    const double gc = std::sqrt((1.0 - delta) / 2.0);
    std::printf("oracle: delta=%g g=%g g_c=%.10g lambda=%.6f\n", delta, g, gc, g / gc);
    std::printf("%3s %18s %12s %10s %10s %10s %10s\n", "n", "E_n", "chi", "r", "c_n", "d_n",
                "norm");
    for (int n = 0; n < levels; ++n) {
        const auto lvl = rsm::oracle::oracle_level_data(delta, g, n);
        std::printf("%3d %18.12f %12.6f %10.6f %10.6f %10.6f %10.6f\n", n, lvl.energy, lvl.chi,
                    lvl.r, lvl.c_n, lvl.d_n, lvl.norm);
    }
    if (g < gc) {
        const auto obs = rsm::oracle::analytic_observables(delta, g / gc, 0);
        std::printf("closed-form observables at lambda=%.6f (n=0):\n", g / gc);
        std::printf("  mean_photon      %.10g\n", obs.mean_photon);
        std::printf("  delta_x          %.10g\n", obs.delta_x);
        std::printf("  chi_f_full       %.10g   (per unit lambda; /g_c^2 for d/dg)\n",
                    obs.chi_f_full);
        std::printf("  chi_f_asymptotic %.10g\n", obs.chi_f_asymptotic);
    }
    return 0;
}

int cmd_table1(double delta, double omega, int workers, const std::string& cache_dir,
               const std::string& output) {
    rsm::scaling::TableConfig cfg;
    cfg.delta = delta;
    cfg.omega = omega;
    cfg.workers = workers;
    cfg.cache_dir = rsm::runner::Cache::resolve_dir(cache_dir);
    const auto table = rsm::scaling::exponent_table(cfg);
    std::printf("%-18s %-5s %10s %10s %6s  %s\n", "observable", "col", "target", "fitted", "ok",
                "note");
    bool all_computed = true;
    for (const auto& c : table.cells) {
        if (c.fit) {
            std::printf("%-18s %-5s %10.4f %10.4f %6s\n", c.observable.c_str(), c.column.c_str(),
                        c.target, c.fit->exponent, c.within() ? "pass" : "FAIL");
        } else {
            all_computed = false;
            std::printf("%-18s %-5s %10.4f %10s %6s  %s\n", c.observable.c_str(),
                        c.column.c_str(), c.target, "-", "ERROR", c.note.c_str());
        }
    }
    std::printf("ratios (observable, y_L/y_N, y/y_L):\n");
    for (const auto& [obs, rln, ryl] : table.ratios)
        std::printf("  %-18s %8.4f %8.4f\n", obs.c_str(), rln, ryl);
    if (!output.empty()) {
        json out;
        for (const auto& c : table.cells) {
            json jc;
            jc["observable"] = c.observable;
            jc["column"] = c.column;
            jc["target"] = c.target;
            jc["tolerance"] = c.tolerance;
            if (c.fit) {
                jc["exponent"] = c.fit->exponent;
                jc["r_squared"] = c.fit->r_squared;
                jc["within"] = c.within();
            } else {
                jc["error"] = c.note;
            }
            out["cells"].push_back(jc);
        }
        std::ofstream o(output);
        o << out.dump(2) << "\n";
    }
    return all_computed ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rabi-Stark criticality toolkit"};
    app.require_subcommand(1);
    rsm::kernels::set_parallel(true);

    std::string config_path, input, window = "1e-3:1e-1", cache_dir, output;
    std::vector<std::string> sets;
    bool invert = false;
    double delta = 0.5, g = 0.3, omega = 1.0;
    int levels = 2, workers = 1;

    auto* sweep = app.add_subcommand("sweep", "run a sweep from a JSON config");
    sweep->add_option("--config", config_path, "JSON config path")->required();
    sweep->add_option("--set", sets, "override leaf keys, key.path=value");

    auto* fit = app.add_subcommand("fit", "power-law fit of a series CSV");
    fit->add_option("--input", input, "series CSV")->required();
    fit->add_option("--window", window, "fit window lo:hi");
    fit->add_flag("--inverse", invert, "fit 1/value instead of value");

    auto* collapse = app.add_subcommand("collapse", "data collapse from a JSON config");
    collapse->add_option("--config", config_path, "JSON config path")->required();
    collapse->add_option("--set", sets, "override leaf keys");

    auto* peak = app.add_subcommand("peak", "locate a susceptibility peak");
    peak->add_option("--config", config_path, "JSON config path")->required();
    peak->add_option("--set", sets, "override leaf keys");

    auto* derivatives = app.add_subcommand("derivatives", "ground-energy derivative curve");
    derivatives->add_option("--config", config_path, "JSON config path")->required();
    derivatives->add_option("--set", sets, "override leaf keys");

    auto* oracle = app.add_subcommand("oracle", "closed-form levels and observables at U = 1");
    oracle->add_option("--delta", delta, "qubit frequency");
    oracle->add_option("--g", g, "coupling");
    oracle->add_option("--levels", levels, "number of levels");

    auto* table1 = app.add_subcommand("table1", "critical-exponent table reproduction");
    table1->add_option("--delta", delta, "qubit frequency");
    table1->add_option("--omega", omega, "cavity frequency");
    table1->add_option("--workers", workers, "parallel cell jobs");
    table1->add_option("--cache-dir", cache_dir, "value cache directory");
    table1->add_option("--output", output, "write cell results to this JSON file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2; // usage error
    }

    try {
        if (*sweep)
            return cmd_sweep(config_path, sets);
        if (*fit)
            return cmd_fit(input, window, invert);
        if (*collapse)
            return cmd_collapse(config_path, sets);
        if (*peak)
            return cmd_peak(config_path, sets);
        if (*derivatives)
            return cmd_derivatives(config_path, sets);
        if (*oracle)
            return cmd_oracle(delta, g, levels);
        if (*table1)
            return cmd_table1(delta, omega, workers, cache_dir, output);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
