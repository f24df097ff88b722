#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mcx::harness {

struct ChannelStats {
    uint32_t channel = 0;
    uint64_t sent = 0;
    uint64_t received = 0;
    double wall_s = 0.0;
    double throughput = 0.0;  // messages/second on this channel
    double lat_min_ns = 0.0;
    double lat_median_ns = 0.0;
    double lat_p99_ns = 0.0;
};

struct RunReport {
    // config echo
    std::string backend;   // "locked" | "lockfree"
    std::string affinity;  // "pinned-one" | "none" | "spread"
    std::string kind;      // "message" | "packet" | "scalar" | "topology"
    uint32_t count = 0;
    uint32_t payload = 0;
    uint32_t reps = 0;
    // environment
    uint32_t cores = 0;
    std::string timestamp;
    bool affinity_unsupported = false;
    bool spread_degenerate = false;  // SPREAD on a 1-core machine
    double clock_read_ns = 0.0;      // measured monotonic-clock read cost
    std::string lock_fairness = "platform-default";
    // results (medians over reps; per-rep totals kept for inspection)
    std::vector<double> rep_throughputs;  // total msgs/s per repetition
    double median_throughput = 0.0;
    std::vector<ChannelStats> channels;   // from the median repetition
};

// Eq-style speedup ratios. Throughput improves when the ratio rises, latency
// improves when the *original* is the numerator.
// Throws std::domain_error("ZERO_BASELINE") / ("ZERO_TEST_LATENCY").
double throughput_speedup(double test, double original);
double latency_speedup(double original, double test);

enum class ReportFormat { Csv, Json };

// One row/object per (report, channel). Speedup columns compare each row
// against the same channel of the first report, the designated baseline.
void emit_report(const std::vector<RunReport>& reports, ReportFormat format,
                 std::ostream& out);

// Helpers shared with the runner.
double median(std::vector<double> v);
double percentile(std::vector<double> v, double p);  // p in [0,1]

}  // namespace mcx::harness
