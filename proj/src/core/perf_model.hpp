#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mcx {

// Single-server memory-bus contention model. A fixed set of cores exchange
// messages; each message demands a deterministic number of main-memory
// operations on one shared FIFO bus, discounted by the cache hit rate. The
// model is closed: a core thinks (exponential delay tuned so the fleet offers
// target_rate when uncontended), visits the bus, and only then thinks again.
// A closed population is what makes the per-core-count orderings observable:
// a single core can never overlap its own bus visit with its think time, so
// its achieved rate plateaus below target, while extra cores keep the bus fed
// and can reach 100% once per-message demand is low enough.
struct ModelConfig {
    uint32_t cores = 1;
    double cache_hit_rate = 0.0;  // fraction of memory ops served by cache
    double mem_access_ns = 0.0;   // cost of one main-memory operation
    double ops_send = 0.0;        // memory ops on the send path
    double ops_recv = 0.0;        // memory ops on the receive path
    double target_rate = 0.0;     // messages/second the workload attempts
};

struct SimResult {
    double bus_utilization = 0.0;
    double achieved_throughput_pct = 0.0;  // of target_rate, clamped to 100
    double throughput = 0.0;               // messages/second observed
    double mean_wait_ns = 0.0;             // queueing delay before the bus
    double mean_latency_ns = 0.0;          // wait + service
    uint64_t completions = 0;
    bool unstable = false;    // per-message demand exceeds bus capacity
    bool degenerate = false;  // hit rate 1.0: zero bus demand, unbounded max
    // Little's-law crosscheck: jobs_in_system comes from an event-driven
    // time integral of the bus population, independent of the per-message
    // response-time bookkeeping behind rate_times_latency.
    double jobs_in_system = 0.0;
    double rate_times_latency = 0.0;
    double little_error_pct = 0.0;
};

// Bus nanoseconds demanded by one message at the configured hit rate.
double effective_ns_per_message(const ModelConfig& cfg) noexcept;

// 1e9 / effective_ns at the configured hit rate; +inf when degenerate.
double theoretical_max(const ModelConfig& cfg) noexcept;

SimResult simulate(const ModelConfig& cfg, double horizon_seconds, uint64_t seed);

std::vector<std::pair<double, SimResult>> sweep_hit_rate(
    ModelConfig cfg, double from, double to, uint32_t steps,
    double horizon_seconds, uint64_t seed);

// Calibration files hold the five numeric ModelConfig fields (everything but
// the hit rate) as `key = value` lines; '#' starts a comment.
struct CalibrationError {
    int line = 0;
    std::string message;
};

bool load_calibration(const std::string& path, ModelConfig& cfg, CalibrationError& err);

}  // namespace mcx
