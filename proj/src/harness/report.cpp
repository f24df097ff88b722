#include "harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace mcx::harness {

double throughput_speedup(double test, double original) {
    if (original <= 0.0) throw std::domain_error("ZERO_BASELINE");
    return test / original;
}

double latency_speedup(double original, double test) {
    if (test <= 0.0) throw std::domain_error("ZERO_TEST_LATENCY");
    return original / test;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double percentile(std::vector<double> v, double p) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    double idx = std::ceil(p * static_cast<double>(v.size())) - 1.0;
    return v[static_cast<size_t>(std::clamp(idx, 0.0, double(v.size() - 1)))];
}

namespace {

const ChannelStats* baseline_channel(const std::vector<RunReport>& reports,
                                     uint32_t channel) {
    for (const auto& ch : reports.front().channels) {
        if (ch.channel == channel) return &ch;
    }
    return nullptr;
}

double safe_tput_speedup(double test, double original) {
    return original > 0.0 ? test / original : 0.0;
}
double safe_lat_speedup(double original, double test) {
    return test > 0.0 ? original / test : 0.0;
}

}  // namespace

void emit_report(const std::vector<RunReport>& reports, ReportFormat format,
                 std::ostream& out) {
    if (reports.empty()) return;

    if (format == ReportFormat::Csv) {
        out << "backend,affinity,kind,count,payload,reps,cores,timestamp,"
               "affinity_unsupported,spread_degenerate,clock_read_ns,"
               "lock_fairness,median_run_throughput,channel,sent,received,"
               "wall_s,throughput,lat_min_ns,lat_median_ns,lat_p99_ns,"
               "throughput_speedup,latency_speedup\n";
        for (const auto& r : reports) {
            for (const auto& ch : r.channels) {
                const ChannelStats* base = baseline_channel(reports, ch.channel);
                double ts = base ? safe_tput_speedup(ch.throughput, base->throughput) : 0.0;
                double ls = base ? safe_lat_speedup(base->lat_median_ns, ch.lat_median_ns) : 0.0;
                out << r.backend << ',' << r.affinity << ',' << r.kind << ','
                    << r.count << ',' << r.payload << ',' << r.reps << ','
                    << r.cores << ',' << r.timestamp << ','
                    << (r.affinity_unsupported ? 1 : 0) << ','
                    << (r.spread_degenerate ? 1 : 0) << ','
                    << r.clock_read_ns << ',' << r.lock_fairness << ','
                    << r.median_throughput << ',' << ch.channel << ','
                    << ch.sent << ',' << ch.received << ',' << ch.wall_s << ','
                    << ch.throughput << ',' << ch.lat_min_ns << ','
                    << ch.lat_median_ns << ',' << ch.lat_p99_ns << ','
                    << ts << ',' << ls << '\n';
            }
        }
        return;
    }

    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json jr{
            {"backend", r.backend},
            {"affinity", r.affinity},
            {"kind", r.kind},
            {"count", r.count},
            {"payload", r.payload},
            {"reps", r.reps},
            {"cores", r.cores},
            {"timestamp", r.timestamp},
            {"affinity_unsupported", r.affinity_unsupported},
            {"spread_degenerate", r.spread_degenerate},
            {"clock_read_ns", r.clock_read_ns},
            {"lock_fairness", r.lock_fairness},
            {"rep_throughputs", r.rep_throughputs},
            {"median_run_throughput", r.median_throughput},
        };
        jr["channels"] = nlohmann::json::array();
        for (const auto& ch : r.channels) {
            const ChannelStats* base = baseline_channel(reports, ch.channel);
            jr["channels"].push_back({
                {"channel", ch.channel},
                {"sent", ch.sent},
                {"received", ch.received},
                {"wall_s", ch.wall_s},
                {"throughput", ch.throughput},
                {"lat_min_ns", ch.lat_min_ns},
                {"lat_median_ns", ch.lat_median_ns},
                {"lat_p99_ns", ch.lat_p99_ns},
                {"throughput_speedup",
                 base ? safe_tput_speedup(ch.throughput, base->throughput) : 0.0},
                {"latency_speedup",
                 base ? safe_lat_speedup(base->lat_median_ns, ch.lat_median_ns) : 0.0},
            });
        }
        arr.push_back(std::move(jr));
    }
    out << arr.dump(2) << '\n';
}

}  // namespace mcx::harness
