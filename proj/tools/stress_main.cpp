// stress — loads a topology, runs the node loops under a chosen backend,
// affinity and traffic kind, and reports throughput/latency.
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "harness/runner.hpp"
#include "harness/topology.hpp"

int main(int argc, char** argv) {
    using namespace mcx::harness;

    CLI::App app{"message-passing stress harness"};
    std::string topology_path;
    std::string backend = "lockfree";
    std::string affinity = "none";
    std::string kind;
    uint32_t count = 1000;
    uint32_t payload = 24;
    uint32_t reps = 1;
    uint32_t warmup = 1;
    double deadline_s = 30.0;
    std::string format = "csv";
    std::string out_path;

    app.add_option("--topology", topology_path, "topology file")->required();
    app.add_option("--backend", backend, "locked|lockfree (default lockfree)")
        ->check(CLI::IsMember({"locked", "lockfree"}));
    app.add_option("--affinity", affinity,
                   "pinned-one|none|spread (default none)")
        ->check(CLI::IsMember({"pinned-one", "none", "spread"}));
    app.add_option("--kind", kind,
                   "message|packet|scalar; overrides every channel's kind")
        ->check(CLI::IsMember({"message", "packet", "scalar"}));
    app.add_option("--count", count, "transactions per channel (default 1000)")
        ->check(CLI::PositiveNumber);
    app.add_option("--payload", payload, "payload bytes (default 24)");
    app.add_option("--reps", reps, "measured repetitions (default 1)")
        ->check(CLI::PositiveNumber);
    app.add_option("--warmup", warmup, "discarded warmup runs (default 1)");
    app.add_option("--deadline", deadline_s,
                   "wall-clock bound per repetition, seconds (default 30)")
        ->check(CLI::PositiveNumber);
    app.add_option("--format", format, "csv|json (default csv)")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--out", out_path, "output path (default stdout)");
    CLI11_PARSE(app, argc, argv);

    Topology topo;
    TopologyError terr;
    if (!load_topology(topology_path, topo, terr)) {
        std::cerr << "stress: " << topology_path;
        if (terr.line) std::cerr << ":" << terr.line;
        std::cerr << ": " << terr.message << "\n";
        return 2;
    }

    RunConfig cfg;
    cfg.backend = backend == "locked" ? MCX_BACKEND_LOCKED : MCX_BACKEND_LOCKFREE;
    cfg.affinity = affinity == "pinned-one" ? Affinity::PinnedOne
                   : affinity == "spread"   ? Affinity::Spread
                                            : Affinity::None;
    if (kind == "message") cfg.kind_override = MCX_KIND_MESSAGE;
    else if (kind == "packet") cfg.kind_override = MCX_KIND_PACKET;
    else if (kind == "scalar") cfg.kind_override = MCX_KIND_SCALAR;
    cfg.count = count;
    cfg.payload = payload;
    cfg.reps = reps;
    cfg.warmup = warmup;
    cfg.deadline_s = deadline_s;

    std::vector<RunReport> reports;
    std::string error;
    if (!run_matrix(topo, {cfg}, reports, error)) {
        std::cerr << "stress: " << error << "\n";
        return 1;
    }

    ReportFormat rf = format == "json" ? ReportFormat::Json : ReportFormat::Csv;
    if (out_path.empty()) {
        emit_report(reports, rf, std::cout);
    } else {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "stress: cannot write " << out_path << "\n";
            return 2;
        }
        emit_report(reports, rf, out);
    }
    return 0;
}
