#include "rsm/cache.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include <json.hpp>

#include "rsm/sha256.hpp"

namespace rsm::runner {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::string canonical_key(const model::ModelParams& params, int n_tr,
                          const std::string& observable, double tol) {
    std::string s = "{\"delta\":" + fmt17(params.delta);
    s += ",\"g\":" + fmt17(params.coupling_g);
    s += ",\"kind\":\"";
    s += (params.kind == model::ModelKind::QRM) ? "QRM" : "RSM";
    s += "\",\"n_tr\":" + std::to_string(n_tr);
    s += ",\"observable\":\"" + observable + "\"";
    s += ",\"omega\":" + fmt17(params.omega);
    s += ",\"tol\":" + fmt17(tol);
    s += ",\"u\":" + fmt17(params.kind == model::ModelKind::QRM ? 0.0 : params.stark_u);
    s += "}";
    return s;
}

std::string cache_digest(const model::ModelParams& params, int n_tr,
                         const std::string& observable, double tol) {
    return util::sha256_hex(canonical_key(params, n_tr, observable, tol));
}

Cache::Cache(std::string dir) : dir_(std::move(dir)) {
    if (!dir_.empty())
        fs::create_directories(dir_);
}

std::string Cache::resolve_dir(const std::string& fallback) {
    if (const char* env = std::getenv("RSM_CACHE_DIR"); env && *env)
        return env;
    return fallback;
}

std::optional<CacheRecord> Cache::get(const std::string& digest) const {
    if (!enabled())
        return std::nullopt;
    const fs::path p = fs::path(dir_) / (digest + ".json");
    std::ifstream in(p);
    if (!in) {
        ++misses_;
        return std::nullopt;
    }
    try {
        json j;
        in >> j;
        CacheRecord rec;
        rec.value = j.at("value").get<double>();
        rec.n_tr_used = j.at("n_tr_used").get<int>();
        rec.converged = j.at("converged").get<bool>();
        ++hits_;
        return rec;
    } catch (const std::exception&) {
        ++misses_;
        return std::nullopt; // unreadable entry behaves like a miss
    }
}

void Cache::put(const std::string& digest, const std::string& canonical,
                const CacheRecord& rec) const {
    if (!enabled())
        return;
    json j;
    j["key"] = json::parse(canonical);
    j["value"] = rec.value;
    j["n_tr_used"] = rec.n_tr_used;
    j["converged"] = rec.converged;
    const fs::path final_path = fs::path(dir_) / (digest + ".json");
    const fs::path tmp_path =
        fs::path(dir_) / (digest + ".tmp." + std::to_string(::getpid()));
    {
        std::ofstream out(tmp_path);
        out << j.dump(0) << "\n";
    }
    fs::rename(tmp_path, final_path);
}

double cached_evaluate(const model::ModelParams& params, spectra::ObservableId id, int n_tr,
                       const spectra::SolverOptions& opts, const Cache* cache) {
    const std::string name = spectra::observable_name(id);
    std::string digest;
    if (cache && cache->enabled()) {
        digest = cache_digest(params, n_tr, name, opts.tol);
        if (const auto rec = cache->get(digest))
            return rec->value;
    }
    const double value = spectra::evaluate_observable(params, id, {n_tr}, opts);
    if (cache && cache->enabled())
        cache->put(digest, canonical_key(params, n_tr, name, opts.tol), {value, n_tr, true});
    return value;
}

spectra::ConvergedValue cached_converge(const model::ModelParams& params,
                                        spectra::ObservableId id,
                                        const spectra::ConvergencePolicy& policy,
                                        const spectra::SolverOptions& opts, const Cache* cache) {
    policy.validate();
    int n = policy.n_tr_start;
    double prev2 = std::numeric_limits<double>::quiet_NaN();
    double prev = cached_evaluate(params, id, n, opts, cache);
    while (true) {
        const int next = static_cast<int>(std::ceil(policy.growth_factor * n));
        if (next > policy.n_tr_cap)
            throw spectra::ConvergenceError(
                "converge_truncation: cap reached without convergence for " +
                    spectra::observable_name(id),
                prev, prev2, n);
        const double value = cached_evaluate(params, id, next, opts, cache);
        const double scale = std::max({std::abs(value), std::abs(prev), 1e-300});
        if (std::abs(value - prev) <= policy.rel_tol * scale)
            return {value, next};
        prev2 = prev;
        prev = value;
        n = next;
    }
}

} // namespace rsm::runner
