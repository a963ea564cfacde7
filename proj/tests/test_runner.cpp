#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "rsm/cache.hpp"
#include "rsm/runner.hpp"
#include "rsm/sha256.hpp"
#include "rsm/spectra.hpp"

using namespace rsm;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("rsm_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

runner::SweepConfig one_point_config(const fs::path& out) {
    runner::SweepConfig cfg;
    cfg.model.kind = model::ModelKind::QRM;
    cfg.model.delta = 0.5;
    cfg.sweep_axis = runner::SweepAxis::coupling_g;
    cfg.grid.values = {0.0};
    cfg.observables = {"ground_energy"};
    cfg.convergence.n_tr_start = 8;
    cfg.output_dir = out.string();
    return cfg;
}

} // namespace

TEST_CASE("sha256 known vectors") {
    CHECK(util::sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(util::sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(util::sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
    // force the two-block padding path
    CHECK(util::sha256_hex(std::string(57, 'a')).size() == 64);
}

TEST_CASE("canonical cache keys are stable and sensitive") {
    model::ModelParams p;
    p.delta = 0.5;
    p.stark_u = 1.0;
    p.coupling_g = 0.25;
    const std::string key = runner::canonical_key(p, 128, "gap", 1e-10);
    CHECK(key ==
          "{\"delta\":0.5,\"g\":0.25,\"kind\":\"RSM\",\"n_tr\":128,\"observable\":\"gap\","
          "\"omega\":1,\"tol\":1e-10,\"u\":1}");
    const std::string d1 = runner::cache_digest(p, 128, "gap", 1e-10);
    CHECK(d1.size() == 64);
    CHECK(d1 == runner::cache_digest(p, 128, "gap", 1e-10));
    p.coupling_g = 0.25000000000000006;
    CHECK(runner::cache_digest(p, 128, "gap", 1e-10) != d1);
}

TEST_CASE("cache roundtrip and corrupted entries") {
    const auto dir = fresh_dir("cache");
    runner::Cache cache(dir.string());
    const std::string digest(64, 'a');
    CHECK(!cache.get(digest).has_value());
    cache.put(digest, "{\"k\":1}", {1.25, 64, true});
    const auto rec = cache.get(digest);
    REQUIRE(rec.has_value());
    CHECK(rec->value == 1.25);
    CHECK(rec->n_tr_used == 64);

    std::ofstream(dir / (std::string(64, 'b') + ".json")) << "not json";
    CHECK(!cache.get(std::string(64, 'b')).has_value());
}

TEST_CASE("grid materialization") {
    runner::GridSpec g;
    g.lo = 1.0;
    g.hi = 100.0;
    g.count = 3;
    g.spacing = "log";
    const auto v = g.materialize();
    CHECK(v[1] == doctest::Approx(10.0).epsilon(1e-12));
    g.values = {3.0, 2.0};
    CHECK_THROWS_AS(g.materialize(), std::invalid_argument);
    runner::GridSpec empty;
    CHECK_THROWS_AS(empty.materialize(), std::invalid_argument);
}

TEST_CASE("one-point sweep writes the expected row") {
    const auto out = fresh_dir("sweep1");
    const auto outcome = runner::run_sweep(one_point_config(out));
    CHECK(outcome.points_total == 1);
    CHECK(outcome.points_failed == 0);
    REQUIRE(outcome.csv_files.size() == 1);
    const auto file = runner::read_series_csv(outcome.csv_files[0]);
    REQUIRE(file.series.points.size() == 1);
    CHECK(file.series.points[0].second == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(fs::exists(outcome.manifest_file));

    std::ifstream in(outcome.csv_files[0]);
    std::string first;
    std::getline(in, first);
    CHECK(first == "# schema=1");
}

TEST_CASE("rerunning a sweep performs no eigensolves") {
    const auto out = fresh_dir("sweep2");
    auto cfg = one_point_config(out);
    cfg.grid.values = {0.0, 0.1, 0.2};
    cfg.observables = {"ground_energy", "gap"};
    const auto first = runner::run_sweep(cfg);
    CHECK(first.eigensolves > 0);
    const auto second = runner::run_sweep(cfg);
    CHECK(second.eigensolves == 0);
    CHECK(second.cache_hits > 0);
    CHECK(second.points_failed == 0);
}

TEST_CASE("cached values equal fresh recomputation bit for bit") {
    const auto out = fresh_dir("sweep3");
    auto cfg = one_point_config(out);
    cfg.model.kind = model::ModelKind::RSM;
    cfg.model.stark_u = 1.0;
    cfg.grid.values = {0.2};
    cfg.convergence.rel_tol = 1e-8;
    cfg.convergence.n_tr_start = 16;
    (void)runner::run_sweep(cfg);
    const auto file = runner::read_series_csv(
        (out / "ground_energy__Linf.csv").string());
    REQUIRE(file.series.points.size() == 1);
    model::ModelParams p = cfg.model;
    p.coupling_g = 0.2;
    const auto fresh = spectra::converge_truncation(p, spectra::ObservableId::ground_energy,
                                                    cfg.convergence);
    CHECK(file.series.points[0].second == fresh.value); // bit-exact through the CSV
    CHECK(file.n_tr[0] == fresh.n_tr_used);
}

TEST_CASE("per-point failures are recorded and counted") {
    const auto out = fresh_dir("sweep4");
    auto cfg = one_point_config(out);
    cfg.model.kind = model::ModelKind::RSM;
    cfg.model.stark_u = 1.0;
    cfg.observables = {"mean_photon"};
    cfg.grid.values = {0.45};
    cfg.convergence.rel_tol = 1e-12;
    cfg.convergence.n_tr_start = 8;
    cfg.convergence.n_tr_cap = 16; // guaranteed cap failure
    const auto outcome = runner::run_sweep(cfg);
    CHECK(outcome.points_failed == 1);
    std::ifstream in(outcome.manifest_file);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("cap reached") != std::string::npos);
}

TEST_CASE("parallel and serial sweeps write identical csv files") {
    const auto out1 = fresh_dir("sweep5a");
    const auto out2 = fresh_dir("sweep5b");
    auto cfg = one_point_config(out1);
    cfg.model.kind = model::ModelKind::RSM;
    cfg.grid.values = {0.05, 0.1, 0.15, 0.2};
    cfg.observables = {"ground_energy", "gap", "mean_photon"};
    cfg.workers = 1;
    (void)runner::run_sweep(cfg);
    cfg.output_dir = out2.string();
    cfg.workers = 4;
    (void)runner::run_sweep(cfg);
    for (const auto& name :
         {"ground_energy__Linf.csv", "gap__Linf.csv", "mean_photon__Linf.csv"}) {
        std::ifstream a(out1 / name), b(out2 / name);
        const std::string sa((std::istreambuf_iterator<char>(a)),
                             std::istreambuf_iterator<char>());
        const std::string sb((std::istreambuf_iterator<char>(b)),
                             std::istreambuf_iterator<char>());
        CHECK(sa == sb);
        CHECK(!sa.empty());
    }
}

TEST_CASE("config loading with dotted overrides") {
    const auto dir = fresh_dir("cfg");
    const auto path = dir / "sweep.json";
    std::ofstream(path) << R"({
      "model": {"kind": "RSM", "delta": 0.5, "stark_u": 1.0},
      "sweep_axis": "coupling_g",
      "grid": {"values": [0.1, 0.2]},
      "observables": ["ground_energy"],
      "convergence": {"rel_tol": 1e-6, "n_tr_start": 16},
      "output_dir": ")" << (dir / "out").string() << R"("
    })";
    const auto cfg = runner::load_sweep_config(path.string(),
                                               {"model.delta=0.25", "convergence.n_tr_start=32"});
    CHECK(cfg.model.delta == 0.25);
    CHECK(cfg.convergence.n_tr_start == 32);
    CHECK(cfg.grid.values.size() == 2);
    CHECK_THROWS(runner::load_sweep_config((dir / "missing.json").string(), {}));
}

TEST_CASE("cache directory environment override") {
    ::setenv("RSM_CACHE_DIR", "/tmp/rsm_env_cache_test", 1);
    CHECK(runner::Cache::resolve_dir("fallback") == "/tmp/rsm_env_cache_test");
    ::unsetenv("RSM_CACHE_DIR");
    CHECK(runner::Cache::resolve_dir("fallback") == "fallback");
}
