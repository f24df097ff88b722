#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "core/perf_model.hpp"

using namespace mcx;

namespace {

// Mirrors the shipped default calibration.
ModelConfig default_cfg() {
    ModelConfig cfg;
    cfg.cores = 2;
    cfg.cache_hit_rate = 0.0;
    cfg.mem_access_ns = 52.9;
    cfg.ops_send = 16;
    cfg.ops_recv = 14;
    cfg.target_rate = 175000;
    return cfg;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& content) {
        path = std::string(std::tmpnam(nullptr)) + ".calib";
        std::ofstream(path) << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("theoretical max matches the closed form and the target peak") {
    ModelConfig cfg = default_cfg();
    // (16 + 14) * 52.9 = 1587 ns per message at zero hit rate.
    CHECK(effective_ns_per_message(cfg) == doctest::Approx(1587.0));
    double peak = theoretical_max(cfg);
    CHECK(peak == doctest::Approx(1e9 / 1587.0));
    CHECK(std::abs(peak - 630000.0) / 630000.0 < 0.01);

    SUBCASE("halving memory latency doubles the peak") {
        ModelConfig half = cfg;
        half.mem_access_ns /= 2;
        CHECK(theoretical_max(half) == doctest::Approx(2 * peak));
    }
    SUBCASE("hit rate 1.0 is degenerate (unbounded)") {
        cfg.cache_hit_rate = 1.0;
        CHECK(std::isinf(theoretical_max(cfg)));
        SimResult r = simulate(cfg, 0.2, 1);
        CHECK(r.degenerate);
        CHECK(r.achieved_throughput_pct == 100.0);
    }
}

TEST_CASE("uncontended limit: tiny load reaches ~100% at ~zero utilization") {
    ModelConfig cfg = default_cfg();
    cfg.target_rate = 5000;  // offered bus load = 5000 * 1587 ns ~ 0.8%
    SimResult r = simulate(cfg, 2.0, 3);
    CHECK_FALSE(r.unstable);
    CHECK(r.achieved_throughput_pct > 98.0);
    CHECK(r.bus_utilization < 0.02);
    CHECK(r.mean_wait_ns < cfg.mem_access_ns * 30);
}

TEST_CASE("overload: offered load above 1 is flagged and throughput caps") {
    ModelConfig cfg = default_cfg();
    cfg.cores = 8;
    cfg.target_rate = 1200000;  // 1.2e6 * 1587 ns ~ 1.9 offered load
    SimResult r = simulate(cfg, 1.0, 3);
    CHECK(r.unstable);
    CHECK(r.achieved_throughput_pct < 100.0);
    CHECK(r.bus_utilization > 0.95);
    // Saturated bus serves at most one message per service time.
    CHECK(r.throughput < 1.01 * theoretical_max(cfg));
}

TEST_CASE("single-customer closed form is an independent oracle") {
    // One core alternates think (mean Z) and service (D) with no queueing,
    // so long-run throughput must be 1 / (Z + D).
    ModelConfig cfg = default_cfg();
    cfg.cores = 1;
    for (double h : {0.0, 0.5, 0.9}) {
        cfg.cache_hit_rate = h;
        double z = 1e9 / cfg.target_rate;
        double d = effective_ns_per_message(cfg);
        double expect = 1e9 / (z + d);
        SimResult r = simulate(cfg, 2.0, 11);
        CHECK(r.throughput == doctest::Approx(expect).epsilon(0.02));
        CHECK(r.mean_wait_ns == 0.0);  // nobody to queue behind
        CHECK(r.mean_latency_ns == doctest::Approx(d).epsilon(1e-9));
    }
}

TEST_CASE("sweep reproduces the plotted orderings") {
    ModelConfig dual = default_cfg();
    ModelConfig single = default_cfg();
    single.cores = 1;

    auto cd = sweep_hit_rate(dual, 0.0, 0.95, 12, 1.0, 5);
    auto cs = sweep_hit_rate(single, 0.0, 0.95, 12, 1.0, 5);
    REQUIRE(cd.size() == 12);
    REQUIRE(cs.size() == 12);

    bool dual_hits_target = false;
    for (size_t i = 0; i < cd.size(); ++i) {
        const SimResult& d = cd[i].second;
        const SimResult& s = cs[i].second;
        CHECK(d.bus_utilization >= s.bus_utilization);   // second core adds load
        CHECK(d.little_error_pct < 2.0);
        CHECK(s.little_error_pct < 2.0);
        CHECK(d.throughput < 1.01 * theoretical_max({2, cd[i].first, 52.9, 16, 14, 175000}));
        if (i > 0) {
            CHECK(d.achieved_throughput_pct >=
                  cd[i - 1].second.achieved_throughput_pct - 1e-9);
            CHECK(d.bus_utilization <= cd[i - 1].second.bus_utilization + 1e-9);
        }
        if (d.achieved_throughput_pct >= 99.0) dual_hits_target = true;
        CHECK(s.achieved_throughput_pct < 99.0);  // single core never gets there
    }
    CHECK(dual_hits_target);
    CHECK(cd.front().second.achieved_throughput_pct < 99.0);  // ...only above a threshold
}

TEST_CASE("seeded runs are bit-reproducible") {
    ModelConfig cfg = default_cfg();
    cfg.cache_hit_rate = 0.4;
    SimResult a = simulate(cfg, 1.0, 99);
    SimResult b = simulate(cfg, 1.0, 99);
    CHECK(a.completions == b.completions);
    CHECK(a.throughput == b.throughput);  // exact, not approximate
    CHECK(a.bus_utilization == b.bus_utilization);
    CHECK(a.mean_latency_ns == b.mean_latency_ns);

    SimResult c = simulate(cfg, 1.0, 100);
    CHECK(a.completions != c.completions);  // different seed, different path
}

TEST_CASE("calibration parser accepts the documented format") {
    TempFile f(
        "# comment\n"
        "cores = 2\n"
        "mem_access_ns = 52.9  # trailing comment\n"
        "ops_send = 16\n"
        "ops_recv = 14\n"
        "target_rate = 175000\n");
    ModelConfig cfg;
    CalibrationError err;
    REQUIRE(load_calibration(f.path, cfg, err));
    CHECK(cfg.cores == 2);
    CHECK(cfg.mem_access_ns == doctest::Approx(52.9));
    CHECK(cfg.ops_send == 16);
    CHECK(cfg.ops_recv == 14);
    CHECK(cfg.target_rate == 175000);
}

TEST_CASE("calibration parser rejects bad input with line numbers") {
    ModelConfig cfg;
    CalibrationError err;

    SUBCASE("missing key") {
        TempFile f("cores = 2\nmem_access_ns = 50\nops_send = 16\nops_recv = 14\n");
        CHECK_FALSE(load_calibration(f.path, cfg, err));
        CHECK(err.message.find("target_rate") != std::string::npos);
    }
    SUBCASE("bad number") {
        TempFile f("cores = 2\nmem_access_ns = fast\n");
        CHECK_FALSE(load_calibration(f.path, cfg, err));
        CHECK(err.line == 2);
    }
    SUBCASE("unknown key") {
        TempFile f("cores = 2\nburst = 9\n");
        CHECK_FALSE(load_calibration(f.path, cfg, err));
        CHECK(err.line == 2);
    }
    SUBCASE("nonpositive value") {
        TempFile f("cores = 1\nmem_access_ns = 0\nops_send = 16\nops_recv = 14\ntarget_rate = 1\n");
        CHECK_FALSE(load_calibration(f.path, cfg, err));
    }
    SUBCASE("missing file") {
        CHECK_FALSE(load_calibration("/nonexistent/calib", cfg, err));
    }
}
