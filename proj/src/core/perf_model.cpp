#include "core/perf_model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace mcx {

double effective_ns_per_message(const ModelConfig& cfg) noexcept {
    return (cfg.ops_send + cfg.ops_recv) * (1.0 - cfg.cache_hit_rate) * cfg.mem_access_ns;
}

double theoretical_max(const ModelConfig& cfg) noexcept {
    double ns = effective_ns_per_message(cfg);
    if (ns <= 0.0) return std::numeric_limits<double>::infinity();
    return 1e9 / ns;
}

SimResult simulate(const ModelConfig& cfg, double horizon_seconds, uint64_t seed) {
    SimResult res;
    double service_ns = effective_ns_per_message(cfg);
    res.degenerate = service_ns <= 0.0;
    res.unstable = cfg.target_rate * service_ns > 1e9;

    const double horizon_ns = horizon_seconds * 1e9;
    if (res.degenerate) {
        // Zero bus demand: every core runs at its offered rate untouched.
        res.achieved_throughput_pct = 100.0;
        res.throughput = cfg.target_rate;
        res.completions = static_cast<uint64_t>(cfg.target_rate * horizon_seconds);
        return res;
    }

    // Mean think time per core; the fleet offers target_rate when the bus
    // never makes anyone wait.
    const double think_mean_ns = static_cast<double>(cfg.cores) * 1e9 / cfg.target_rate;
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> think(1.0 / think_mean_ns);

    std::vector<double> next_arrival(cfg.cores);
    for (auto& t : next_arrival) t = think(rng);

    double server_free = 0.0;
    double busy_ns = 0.0;
    double wait_ns = 0.0;
    double resp_ns = 0.0;
    uint64_t completions = 0;

    // Event-driven population integral for the Little's-law crosscheck.
    std::deque<double> departures;  // FIFO: monotone non-decreasing
    double area = 0.0;
    double clock = 0.0;
    size_t in_system = 0;
    auto advance_to = [&](double t) {
        while (!departures.empty() && departures.front() <= t) {
            area += in_system * (departures.front() - clock);
            clock = departures.front();
            --in_system;
            departures.pop_front();
        }
        area += in_system * (t - clock);
        clock = t;
    };

    double last_depart = 0.0;
    for (;;) {
        size_t core = 0;
        for (size_t i = 1; i < next_arrival.size(); ++i) {
            if (next_arrival[i] < next_arrival[core]) core = i;
        }
        double t = next_arrival[core];
        if (t >= horizon_ns) break;

        advance_to(t);
        ++in_system;

        double start = std::max(t, server_free);
        double depart = start + service_ns;
        server_free = depart;
        last_depart = depart;
        departures.push_back(depart);

        busy_ns += service_ns;
        wait_ns += start - t;
        resp_ns += depart - t;
        ++completions;
        next_arrival[core] = depart + think(rng);
    }
    advance_to(std::max(horizon_ns, last_depart));
    double elapsed_ns = clock;
    if (elapsed_ns <= 0.0 || completions == 0) return res;

    double elapsed_s = elapsed_ns / 1e9;
    res.completions = completions;
    res.throughput = static_cast<double>(completions) / elapsed_s;
    res.bus_utilization = std::min(1.0, busy_ns / elapsed_ns);
    res.achieved_throughput_pct =
        std::min(100.0, 100.0 * res.throughput / cfg.target_rate);
    res.mean_wait_ns = wait_ns / static_cast<double>(completions);
    res.mean_latency_ns = resp_ns / static_cast<double>(completions);

    res.jobs_in_system = area / elapsed_ns;
    res.rate_times_latency = (res.throughput / 1e9) * res.mean_latency_ns;
    if (res.jobs_in_system > 0.0) {
        res.little_error_pct =
            100.0 * std::abs(res.jobs_in_system - res.rate_times_latency) /
            res.jobs_in_system;
    }
    return res;
}

std::vector<std::pair<double, SimResult>> sweep_hit_rate(
    ModelConfig cfg, double from, double to, uint32_t steps,
    double horizon_seconds, uint64_t seed) {
    std::vector<std::pair<double, SimResult>> curve;
    if (steps < 2 || from >= to) return curve;
    curve.reserve(steps);
    for (uint32_t i = 0; i < steps; ++i) {
        double h = from + (to - from) * static_cast<double>(i) /
                              static_cast<double>(steps - 1);
        cfg.cache_hit_rate = h;
        // Same seed every point: curves differ only through the hit rate.
        curve.emplace_back(h, simulate(cfg, horizon_seconds, seed));
    }
    return curve;
}

bool load_calibration(const std::string& path, ModelConfig& cfg, CalibrationError& err) {
    std::ifstream in(path);
    if (!in) {
        err = {0, "cannot open calibration file: " + path};
        return false;
    }
    std::string line;
    int lineno = 0;
    bool seen[5] = {};
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                err = {lineno, "expected `key = value`"};
                return false;
            }
            continue;
        }
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        double num = 0.0;
        try {
            size_t used = 0;
            num = std::stod(val, &used);
            if (used != val.size()) throw std::invalid_argument(val);
        } catch (...) {
            err = {lineno, "not a number: `" + val + "`"};
            return false;
        }
        if (key == "cores") {
            if (num < 1) { err = {lineno, "cores must be >= 1"}; return false; }
            cfg.cores = static_cast<uint32_t>(num); seen[0] = true;
        } else if (key == "mem_access_ns") {
            cfg.mem_access_ns = num; seen[1] = true;
        } else if (key == "ops_send") {
            cfg.ops_send = num; seen[2] = true;
        } else if (key == "ops_recv") {
            cfg.ops_recv = num; seen[3] = true;
        } else if (key == "target_rate") {
            cfg.target_rate = num; seen[4] = true;
        } else {
            err = {lineno, "unknown key: `" + key + "`"};
            return false;
        }
    }
    static const char* names[5] = {"cores", "mem_access_ns", "ops_send",
                                   "ops_recv", "target_rate"};
    for (int i = 0; i < 5; ++i) {
        if (!seen[i]) {
            err = {0, std::string("missing key: ") + names[i]};
            return false;
        }
    }
    if (cfg.mem_access_ns <= 0 || cfg.ops_send <= 0 || cfg.ops_recv <= 0 ||
        cfg.target_rate <= 0) {
        err = {0, "mem_access_ns, ops_send, ops_recv, target_rate must be > 0"};
        return false;
    }
    return true;
}

}  // namespace mcx
