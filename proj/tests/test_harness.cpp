#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "harness/report.hpp"
#include "harness/runner.hpp"
#include "harness/topology.hpp"

using namespace mcx::harness;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& content) {
        path = std::string(std::tmpnam(nullptr)) + ".topo";
        std::ofstream(path) << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("shipped two-node topology parses to 2 nodes, 1 channel") {
    Topology topo;
    TopologyError err;
    REQUIRE(load_topology(MCX_SOURCE_DIR "/config/two_node.topo", topo, err));
    CHECK(topo.nodes.size() == 2);
    REQUIRE(topo.channels.size() == 1);
    CHECK(topo.channels[0].send_node == 0);
    CHECK(topo.channels[0].recv_node == 1);
    CHECK(topo.channels[0].kind == MCX_KIND_MESSAGE);
    CHECK(topo.channels[0].ring_capacity == 64);
}

TEST_CASE("topology validation failures carry line diagnostics") {
    Topology topo;
    TopologyError err;

    SUBCASE("channel referencing an undeclared node") {
        TempFile f("[nodes]\nids = 0, 1\n[channel]\nsend = 0\nrecv = 5\n");
        CHECK_FALSE(load_topology(f.path, topo, err));
        CHECK(err.message.find("not declared") != std::string::npos);
    }
    SUBCASE("empty channel list") {
        TempFile f("[nodes]\nids = 0, 1\n");
        CHECK_FALSE(load_topology(f.path, topo, err));
        CHECK(err.message.find("no channels") != std::string::npos);
    }
    SUBCASE("missing mandatory channel field") {
        TempFile f("[nodes]\nids = 0\n[channel]\nsend = 0\n");
        CHECK_FALSE(load_topology(f.path, topo, err));
        CHECK(err.message.find("recv") != std::string::npos);
    }
    SUBCASE("bad kind with its line number") {
        TempFile f("[nodes]\nids = 0, 1\n[channel]\nsend = 0\nrecv = 1\nkind = pigeon\n");
        CHECK_FALSE(load_topology(f.path, topo, err));
        CHECK(err.line == 6);
    }
    SUBCASE("non-power-of-two capacity") {
        TempFile f("[nodes]\nids = 0, 1\n[channel]\nsend = 0\nrecv = 1\ncapacity = 3\n");
        CHECK_FALSE(load_topology(f.path, topo, err));
        CHECK(err.line == 6);
    }
    SUBCASE("duplicate node id") {
        TempFile f("[nodes]\nids = 0, 0\n[channel]\nsend = 0\nrecv = 0\n");
        CHECK_FALSE(load_topology(f.path, topo, err));
        CHECK(err.message.find("duplicate") != std::string::npos);
    }
    SUBCASE("missing file") {
        CHECK_FALSE(load_topology("/no/such/file.topo", topo, err));
    }
}

TEST_CASE("speedup arithmetic matches the published ratios") {
    CHECK(throughput_speedup(740, 1000) == doctest::Approx(0.74).epsilon(1e-12));
    CHECK(throughput_speedup(230, 1000) == doctest::Approx(0.23).epsilon(1e-12));
    CHECK(latency_speedup(175000, 7000) == doctest::Approx(25.0).epsilon(1e-12));
    CHECK(latency_speedup(14, 7) == doctest::Approx(2.0).epsilon(1e-12));

    // identities
    CHECK(throughput_speedup(3.7, 3.7) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(latency_speedup(3.7, 3.7) == doctest::Approx(1.0).epsilon(1e-12));
    double ab = latency_speedup(13.0, 29.0) * latency_speedup(29.0, 13.0);
    CHECK(std::abs(ab - 1.0) < 1e-12);

    CHECK_THROWS_AS(throughput_speedup(1, 0), std::domain_error);
    CHECK_THROWS_AS(latency_speedup(1, 0), std::domain_error);
}

TEST_CASE("median and percentile helpers") {
    CHECK(median({3, 1, 2}) == 2);
    CHECK(median({4, 1, 2, 3}) == doctest::Approx(2.5));
    CHECK(percentile({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 0.99) == 10);
    CHECK(percentile({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 0.50) == 5);
}

TEST_CASE("MCX_CORES environment override controls core detection") {
    setenv("MCX_CORES", "3", 1);
    CHECK(detect_cores() == 3);
    setenv("MCX_CORES", "junk", 1);
    CHECK(detect_cores() >= 1);  // falls back to hardware detection
    unsetenv("MCX_CORES");
    CHECK(detect_cores() >= 1);
}

TEST_CASE("run_matrix produces one verified report per config") {
    Topology topo;
    TopologyError terr;
    REQUIRE(load_topology(MCX_SOURCE_DIR "/config/two_node.topo", topo, terr));

    RunConfig lockfree;
    lockfree.backend = MCX_BACKEND_LOCKFREE;
    lockfree.count = 200;
    lockfree.reps = 2;
    lockfree.warmup = 0;
    RunConfig locked = lockfree;
    locked.backend = MCX_BACKEND_LOCKED;

    std::vector<RunReport> reports;
    std::string error;
    REQUIRE_MESSAGE(run_matrix(topo, {lockfree, locked}, reports, error), error);
    REQUIRE(reports.size() == 2);

    for (const auto& rep : reports) {
        CHECK(rep.rep_throughputs.size() == 2);
        CHECK(rep.median_throughput > 0);
        REQUIRE(rep.channels.size() == 1);
        const ChannelStats& ch = rep.channels[0];
        CHECK(ch.sent == 200);
        CHECK(ch.received == 200);
        CHECK(ch.lat_min_ns <= ch.lat_median_ns);
        CHECK(ch.lat_median_ns <= ch.lat_p99_ns);
    }
    CHECK(reports[0].backend == "lockfree");
    CHECK(reports[1].backend == "locked");

    SUBCASE("CSV emit has the documented column count on every row") {
        std::ostringstream os;
        emit_report(reports, ReportFormat::Csv, os);
        std::istringstream is(os.str());
        std::string line;
        int rows = 0;
        while (std::getline(is, line)) {
            CHECK(std::count(line.begin(), line.end(), ',') == 22);  // 23 columns
            ++rows;
        }
        CHECK(rows == 3);  // header + one row per (report, channel)
    }

    SUBCASE("JSON emit round-trips and carries speedups vs the baseline") {
        std::ostringstream os;
        emit_report(reports, ReportFormat::Json, os);
        auto j = nlohmann::json::parse(os.str());
        REQUIRE(j.is_array());
        REQUIRE(j.size() == 2);
        CHECK(j[0]["channels"][0]["throughput_speedup"].get<double>() ==
              doctest::Approx(1.0));
        CHECK(j[0]["channels"][0]["latency_speedup"].get<double>() ==
              doctest::Approx(1.0));
        CHECK(j[1]["channels"][0]["throughput_speedup"].get<double>() > 0.0);
        CHECK(j[1]["backend"] == "locked");
    }
}

TEST_CASE("scalar override and multi-channel topology complete") {
    TempFile f(
        "[nodes]\nids = 0, 1\n"
        "[channel]\nsend = 0\nrecv = 1\nkind = message\n"
        "[channel]\nsend = 1\nrecv = 0\nkind = packet\n");
    Topology topo;
    TopologyError terr;
    REQUIRE(load_topology(f.path, topo, terr));
    REQUIRE(topo.channels.size() == 2);

    RunConfig cfg;
    cfg.count = 100;
    cfg.warmup = 0;
    cfg.kind_override = MCX_KIND_SCALAR;

    std::vector<RunReport> reports;
    std::string error;
    REQUIRE_MESSAGE(run_matrix(topo, {cfg}, reports, error), error);
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].kind == "scalar");
    REQUIRE(reports[0].channels.size() == 2);
    for (const auto& ch : reports[0].channels) CHECK(ch.received == 100);
}
