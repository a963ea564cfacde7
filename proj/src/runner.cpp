#include "rsm/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <omp.h>

#include <json.hpp>

#include "rsm/observables.hpp"

namespace rsm::runner {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCodeVersion = "rsmkit 1.0.0";

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json* navigate(json& root, const std::string& dotted, bool create) {
    json* cur = &root;
    std::size_t pos = 0;
    while (true) {
        const std::size_t dot = dotted.find('.', pos);
        const std::string key = dotted.substr(pos, dot - pos);
        if (dot == std::string::npos) {
            if (!create && !cur->contains(key))
                return nullptr;
            return &(*cur)[key];
        }
        if (!create && !cur->contains(key))
            return nullptr;
        cur = &(*cur)[key];
        pos = dot + 1;
    }
}

void apply_overrides(json& cfg, const std::vector<std::string>& overrides) {
    for (const auto& ov : overrides) {
        const std::size_t eq = ov.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("override must be key.path=value: " + ov);
        const std::string path = ov.substr(0, eq);
        const std::string raw = ov.substr(eq + 1);
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::parse_error&) {
            value = raw; // bare string
        }
        *navigate(cfg, path, true) = value;
    }
}

model::ModelParams parse_model(const json& j) {
    model::ModelParams p;
    const std::string kind = j.value("kind", "RSM");
    if (kind == "RSM")
        p.kind = model::ModelKind::RSM;
    else if (kind == "QRM")
        p.kind = model::ModelKind::QRM;
    else
        throw std::invalid_argument("model.kind must be RSM or QRM");
    p.delta = j.value("delta", 0.5);
    p.omega = j.value("omega", 1.0);
    p.stark_u = j.value("stark_u", 1.0);
    p.coupling_g = j.value("coupling_g", 0.0);
    p.validate();
    return p;
}

} // namespace

std::vector<double> GridSpec::materialize() const {
    std::vector<double> out = values;
    if (out.empty()) {
        if (count < 1)
            throw std::invalid_argument("grid: empty");
        if (count == 1) {
            out.push_back(lo);
        } else if (spacing == "log") {
            if (!(lo > 0.0) || !(hi > 0.0))
                throw std::invalid_argument("grid: log spacing needs positive bounds");
            const double llo = std::log10(lo), lhi = std::log10(hi);
            for (int i = 0; i < count; ++i)
                out.push_back(std::pow(10.0, llo + (lhi - llo) * i / (count - 1)));
        } else if (spacing == "linear") {
            for (int i = 0; i < count; ++i)
                out.push_back(lo + (hi - lo) * i / (count - 1));
        } else {
            throw std::invalid_argument("grid: spacing must be linear or log");
        }
    }
    if (out.empty())
        throw std::invalid_argument("grid: empty");
    for (std::size_t i = 1; i < out.size(); ++i)
        if (!(out[i] > out[i - 1]))
            throw std::invalid_argument("grid: values must be strictly increasing");
    return out;
}

void SweepConfig::validate() const {
    model.validate();
    convergence.validate();
    if (observables.empty())
        throw std::invalid_argument("config: observables list is empty");
    for (const auto& name : observables)
        spectra::observable_from_name(name); // throws on unknown
    if (workers < 1)
        throw std::invalid_argument("config: workers must be >= 1");
    if (fixed_n_tr < 0)
        throw std::invalid_argument("config: fixed_n_tr must be >= 0");
    if (!(solver_tol > 0.0))
        throw std::invalid_argument("config: solver_tol must be positive");
    grid.materialize();
}

SweepConfig load_sweep_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config: " + path);
    json j;
    in >> j;
    apply_overrides(j, overrides);

    SweepConfig cfg;
    cfg.model = parse_model(j.value("model", json::object()));
    const std::string axis = j.value("sweep_axis", "coupling_g");
    if (axis == "coupling_g")
        cfg.sweep_axis = SweepAxis::coupling_g;
    else if (axis == "stark_u")
        cfg.sweep_axis = SweepAxis::stark_u;
    else if (axis == "truncation_n")
        cfg.sweep_axis = SweepAxis::truncation_n;
    else
        throw std::invalid_argument("sweep_axis must be coupling_g, stark_u or truncation_n");
    if (j.contains("grid")) {
        const json& g = j["grid"];
        if (g.contains("values"))
            cfg.grid.values = g["values"].get<std::vector<double>>();
        cfg.grid.lo = g.value("lo", 0.0);
        cfg.grid.hi = g.value("hi", 0.0);
        cfg.grid.count = g.value("count", 0);
        cfg.grid.spacing = g.value("spacing", "linear");
    }
    cfg.observables = j.value("observables", std::vector<std::string>{});
    if (j.contains("convergence")) {
        const json& c = j["convergence"];
        cfg.convergence.rel_tol = c.value("rel_tol", cfg.convergence.rel_tol);
        cfg.convergence.n_tr_start = c.value("n_tr_start", cfg.convergence.n_tr_start);
        cfg.convergence.growth_factor = c.value("growth_factor", cfg.convergence.growth_factor);
        cfg.convergence.n_tr_cap = c.value("n_tr_cap", cfg.convergence.n_tr_cap);
    }
    cfg.fixed_n_tr = j.value("fixed_n_tr", 0);
    cfg.solver_tol = j.value("solver_tol", 1e-10);
    cfg.output_dir = j.value("output_dir", std::string("out"));
    cfg.cache_dir = j.value("cache_dir", std::string());
    cfg.workers = j.value("workers", 1);
    cfg.validate();
    return cfg;
}

void write_series_csv(const std::string& path, const SeriesFile& file) {
    std::ofstream out(path, std::ios::binary); // binary: LF line endings everywhere
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << "# schema=1\n";
    for (const auto& [k, v] : file.meta)
        out << "# " << k << "=" << v << "\n";
    out << "abscissa,value,n_tr,converged,residual\n";
    for (std::size_t i = 0; i < file.series.points.size(); ++i) {
        out << fmt17(file.series.points[i].first) << "," << fmt17(file.series.points[i].second)
            << "," << file.n_tr[i] << "," << file.converged[i] << ","
            << fmt17(file.residual[i]) << "\n";
    }
}

SeriesFile read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open series: " + path);
    SeriesFile file;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line[0] == '#') {
            const std::size_t eq = line.find('=');
            if (eq != std::string::npos) {
                std::string key = line.substr(1, eq - 1);
                key.erase(0, key.find_first_not_of(' '));
                key.erase(key.find_last_not_of(' ') + 1);
                file.meta.emplace_back(key, line.substr(eq + 1));
            }
            continue;
        }
        if (!header_seen) { // column header
            header_seen = true;
            continue;
        }
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> cols;
        while (std::getline(ss, tok, ','))
            cols.push_back(tok);
        if (cols.size() < 2)
            throw std::runtime_error("malformed series row in " + path + ": " + line);
        file.series.points.emplace_back(std::stod(cols[0]), std::stod(cols[1]));
        file.n_tr.push_back(cols.size() > 2 ? std::stoi(cols[2]) : 0);
        file.converged.push_back(cols.size() > 3 ? std::stoi(cols[3]) : 1);
        file.residual.push_back(cols.size() > 4 ? std::stod(cols[4]) : 0.0);
    }
    for (const auto& [k, v] : file.meta) {
        if (k == "size_label")
            file.series.size_label = std::stod(v);
        if (k == "size_kind")
            file.series.size_kind = (v == "truncation_N") ? scaling::SizeKind::truncation_N
                                                          : scaling::SizeKind::effective_L;
        if (k == "abscissa_kind")
            file.series.abscissa_kind = (v == "reduced_t") ? scaling::AbscissaKind::reduced_t
                                                           : scaling::AbscissaKind::coupling_g;
    }
    return file;
}

namespace {

struct PointOutcome {
    observables::ObservableRecord record;
    double residual = 0.0;
    bool failed = false;
    std::string reason;
    std::string digest;
};

} // namespace

SweepOutcome run_sweep(const SweepConfig& config) {
    config.validate();
    fs::create_directories(config.output_dir);
    const std::string cache_dir = Cache::resolve_dir(
        config.cache_dir.empty() ? (fs::path(config.output_dir) / "cache").string()
                                 : config.cache_dir);
    Cache cache(cache_dir);
    const std::uint64_t solves_before = spectra::eigensolve_count();

    const std::vector<double> grid = config.grid.materialize();
    const std::size_t n_obs = config.observables.size();
    const std::size_t n_jobs = grid.size() * n_obs;
    std::vector<PointOutcome> outcomes(n_jobs);

    spectra::SolverOptions opts;
    opts.tol = config.solver_tol;

    auto eval_point = [&](std::size_t obs_idx, std::size_t grid_idx) {
        PointOutcome& out = outcomes[obs_idx * grid.size() + grid_idx];
        const auto id = spectra::observable_from_name(config.observables[obs_idx]);
        model::ModelParams p = config.model;
        int fixed_n = config.fixed_n_tr;
        const double x = grid[grid_idx];
        switch (config.sweep_axis) {
        case SweepAxis::coupling_g: p.coupling_g = x; break;
        case SweepAxis::stark_u: p.stark_u = x; break;
        case SweepAxis::truncation_n: fixed_n = static_cast<int>(x); break;
        }
        out.record.params = p;
        out.record.name = config.observables[obs_idx];
        try {
            if (fixed_n > 0) {
                out.digest = cache_digest(p, fixed_n, spectra::observable_name(id), opts.tol);
                out.record.value = cached_evaluate(p, id, fixed_n, opts, &cache);
                out.record.n_tr = fixed_n;
                out.record.converged = true; // fixed-truncation evaluation, as requested
                out.residual = 0.0;
            } else {
                const auto res = cached_converge(p, id, config.convergence, opts, &cache);
                out.record.value = res.value;
                out.record.n_tr = res.n_tr_used;
                out.record.converged = true;
                out.residual = config.convergence.rel_tol;
                out.digest =
                    cache_digest(p, res.n_tr_used, spectra::observable_name(id), opts.tol);
            }
        } catch (const std::exception& e) {
            out.failed = true;
            out.reason = e.what();
        }
    };

    const bool parallel = config.workers > 1 && omp_in_parallel() == 0;
#pragma omp parallel for collapse(2) schedule(dynamic, 1) if (parallel)
    for (std::ptrdiff_t oi = 0; oi < static_cast<std::ptrdiff_t>(n_obs); ++oi)
        for (std::ptrdiff_t gi = 0; gi < static_cast<std::ptrdiff_t>(grid.size()); ++gi)
            eval_point(static_cast<std::size_t>(oi), static_cast<std::size_t>(gi));

    // size label for file naming
    std::string size_kind = "effective_L";
    std::string size_label = "inf";
    double size_value = std::numeric_limits<double>::infinity();
    if (config.sweep_axis == SweepAxis::truncation_n) {
        size_kind = "truncation_scan";
        size_label = "scan";
    } else if (config.fixed_n_tr > 0) {
        size_kind = "truncation_N";
        size_label = std::to_string(config.fixed_n_tr);
        size_value = config.fixed_n_tr;
    } else if (config.sweep_axis == SweepAxis::stark_u) {
        size_kind = "stark_scan";
        size_label = "scan";
    } else {
        try {
            size_value = model::effective_size(config.model);
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%g", size_value);
            size_label = buf;
        } catch (const std::domain_error&) {
            size_label = "inf"; // |U| = 1, thermodynamic-limit label
        }
    }

    SweepOutcome outcome;
    outcome.points_total = static_cast<int>(n_jobs);
    json manifest;
    manifest["schema"] = 1;
    manifest["code_version"] = kCodeVersion;
    manifest["cache_dir"] = cache_dir;
    {
        json jm;
        jm["kind"] = (config.model.kind == model::ModelKind::QRM) ? "QRM" : "RSM";
        jm["delta"] = config.model.delta;
        jm["omega"] = config.model.omega;
        jm["stark_u"] = config.model.stark_u;
        jm["coupling_g"] = config.model.coupling_g;
        manifest["config"]["model"] = jm;
        manifest["config"]["sweep_axis"] = config.sweep_axis == SweepAxis::coupling_g ? "coupling_g"
                                           : config.sweep_axis == SweepAxis::stark_u ? "stark_u"
                                                                                     : "truncation_n";
        manifest["config"]["observables"] = config.observables;
        manifest["config"]["fixed_n_tr"] = config.fixed_n_tr;
        manifest["config"]["solver_tol"] = config.solver_tol;
        manifest["config"]["workers"] = config.workers;
        manifest["config"]["convergence"] = {{"rel_tol", config.convergence.rel_tol},
                                             {"n_tr_start", config.convergence.n_tr_start},
                                             {"growth_factor", config.convergence.growth_factor},
                                             {"n_tr_cap", config.convergence.n_tr_cap}};
        manifest["config"]["grid"] = grid;
    }
    manifest["points"] = json::array();

    for (std::size_t oi = 0; oi < n_obs; ++oi) {
        SeriesFile file;
        file.series.size_label = size_value;
        file.series.size_kind = (size_kind == "truncation_N") ? scaling::SizeKind::truncation_N
                                                              : scaling::SizeKind::effective_L;
        file.meta.emplace_back("observable", config.observables[oi]);
        file.meta.emplace_back("size_kind", size_kind);
        file.meta.emplace_back("size_label", size_label);
        file.meta.emplace_back("kind",
                               config.model.kind == model::ModelKind::QRM ? "QRM" : "RSM");
        file.meta.emplace_back("delta", fmt17(config.model.delta));
        file.meta.emplace_back("omega", fmt17(config.model.omega));
        file.meta.emplace_back("stark_u", fmt17(config.model.stark_u));
        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
            const PointOutcome& po = outcomes[oi * grid.size() + gi];
            json jp;
            jp["observable"] = config.observables[oi];
            jp["abscissa"] = grid[gi];
            jp["cache_key"] = po.digest;
            if (po.failed) {
                jp["status"] = "failed";
                jp["reason"] = po.reason;
                ++outcome.points_failed;
            } else {
                jp["status"] = "ok";
                jp["n_tr"] = po.record.n_tr;
                jp["converged"] = po.record.converged;
                file.series.points.emplace_back(grid[gi], po.record.value);
                file.n_tr.push_back(po.record.n_tr);
                file.converged.push_back(po.record.converged ? 1 : 0);
                file.residual.push_back(po.residual);
            }
            manifest["points"].push_back(jp);
        }
        std::string suffix;
        if (size_kind == "truncation_N")
            suffix = "N" + size_label;
        else if (size_kind == "truncation_scan")
            suffix = "Nscan";
        else if (size_kind == "stark_scan")
            suffix = "Uscan";
        else
            suffix = "L" + size_label;
        const std::string fname = config.observables[oi] + "__" + suffix + ".csv";
        const std::string path = (fs::path(config.output_dir) / fname).string();
        write_series_csv(path, file);
        outcome.csv_files.push_back(path);
    }

    outcome.cache_hits = cache.hits();
    outcome.cache_misses = cache.misses();
    outcome.eigensolves = spectra::eigensolve_count() - solves_before;
    manifest["cache_hits"] = outcome.cache_hits;
    manifest["cache_misses"] = outcome.cache_misses;
    manifest["eigensolves"] = outcome.eigensolves;
    manifest["points_failed"] = outcome.points_failed;

    const std::string mpath = (fs::path(config.output_dir) / "manifest.json").string();
    {
        std::ofstream out(mpath, std::ios::binary);
        out << manifest.dump(2) << "\n";
    }
    outcome.manifest_file = mpath;
    return outcome;
}

} // namespace rsm::runner
