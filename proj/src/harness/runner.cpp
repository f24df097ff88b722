#include "harness/runner.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#if defined(__linux__)
#include <pthread.h>
#include <sched.h>
#endif

namespace mcx::harness {

namespace {

int64_t now_ns() {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

double measure_clock_cost_ns() {
    constexpr int kReads = 1000;
    int64_t t0 = now_ns();
    int64_t sink = 0;
    for (int i = 0; i < kReads; ++i) sink += now_ns() & 1;
    int64_t t1 = now_ns();
    return static_cast<double>(t1 - t0 - (sink & 0)) / kReads;
}

std::string timestamp_now() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", std::localtime(&t));
    return buf;
}

// Pins the calling thread; returns false if the platform refused.
bool pin_to_core(uint32_t core) {
#if defined(__linux__)
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(core, &set);
    return pthread_setaffinity_np(pthread_self(), sizeof(set), &set) == 0;
#else
    (void)core;
    return false;
#endif
}

struct FailBox {
    std::atomic<bool> failed{false};
    std::mutex m;
    std::string message;

    void fail(const std::string& msg) {
        bool expected = false;
        if (failed.compare_exchange_strong(expected, true)) {
            std::lock_guard<std::mutex> g(m);
            message = msg;
        }
    }
};

// Everything one repetition shares about a single channel.
struct ChannelRun {
    ChannelSpec spec;  // kind already resolved against any override
    uint32_t index = 0;
    mcx_endpoint send_ep{};
    mcx_endpoint recv_ep{};
    mcx_channel chan = 0;  // packet/scalar only

    // sender side
    uint64_t next_tx = 1;
    mcx_request pending_send = 0;
    uint64_t sent = 0;
    std::vector<uint8_t> payload;

    // receiver side
    uint64_t expect = 1;
    mcx_request pending_recv = 0;
    uint64_t received = 0;
    uint64_t id_sum = 0;

    // latency bookkeeping; index = transaction id
    std::vector<int64_t> send_ts;
    std::vector<int64_t> recv_ts;
};

const char* status_name(mcx_status s) {
    switch (s) {
        case MCX_OK: return "OK";
        case MCX_PENDING: return "PENDING";
        case MCX_TIMEOUT: return "TIMEOUT";
        case MCX_COMPLETED: return "COMPLETED";
        case MCX_CANCELLED: return "CANCELLED";
        case MCX_ALREADY_INITIALIZED: return "ALREADY_INITIALIZED";
        case MCX_NODE_NOT_INITIALIZED: return "NODE_NOT_INITIALIZED";
        case MCX_PORT_IN_USE: return "PORT_IN_USE";
        case MCX_NO_SUCH_ENDPOINT: return "NO_SUCH_ENDPOINT";
        case MCX_ALREADY_CONNECTED: return "ALREADY_CONNECTED";
        case MCX_NOT_CONNECTED: return "NOT_CONNECTED";
        case MCX_WIDTH_MISMATCH: return "WIDTH_MISMATCH";
        case MCX_BUSY: return "BUSY";
        case MCX_LIMIT: return "LIMIT";
        case MCX_EXHAUSTED: return "EXHAUSTED";
        case MCX_TOO_LATE: return "TOO_LATE";
        case MCX_INVALID_OPERATION: return "INVALID_OPERATION";
        case MCX_UNKNOWN_REQUEST: return "UNKNOWN_REQUEST";
        case MCX_FULL: return "FULL";
        case MCX_EMPTY: return "EMPTY";
        case MCX_TOO_LARGE: return "TOO_LARGE";
        case MCX_INVALID_ARGUMENT: return "INVALID_ARGUMENT";
    }
    return "?";
}

class NodeWorker {
public:
    NodeWorker(mcx_runtime* rt, uint32_t node_id, const RunConfig& cfg,
               std::vector<ChannelRun>& channels, FailBox& fb)
        : rt_(rt), node_id_(node_id), cfg_(cfg), channels_(channels), fb_(fb) {}

    // One pass over every channel this node participates in; one operation
    // per role per pass. Returns true while work remains.
    bool pass() {
        bool busy = false;
        bool progressed = false;
        for (auto& ch : channels_) {
            if (fb_.failed.load(std::memory_order_relaxed)) return false;
            if (ch.spec.send_node == node_id_ && !send_done(ch)) {
                progressed |= step_send(ch);
                busy = true;
            }
            if (ch.spec.recv_node == node_id_ && ch.received < cfg_.count) {
                progressed |= step_recv(ch);
                busy = true;
            }
        }
        // A pass that moved nothing is blocked on the peer thread; on a
        // saturated machine spinning here just burns the peer's timeslice.
        if (busy && !progressed) std::this_thread::yield();
        return busy;
    }

private:
    bool send_done(const ChannelRun& ch) const {
        return ch.next_tx > cfg_.count && ch.pending_send == 0;
    }

    void fail_status(const ChannelRun& ch, const char* op, mcx_status st) {
        std::ostringstream os;
        os << op << " failed on channel " << ch.index << " ("
           << kind_name(ch.spec.kind) << "): " << status_name(st);
        fb_.fail(os.str());
    }

    bool step_send(ChannelRun& ch) {
        if (ch.spec.kind == MCX_KIND_SCALAR) {
            if (ch.next_tx > cfg_.count) return false;
            if (ch.send_ts[ch.next_tx] == 0) ch.send_ts[ch.next_tx] = now_ns();
            mcx_status st = mcx_scalar_send(rt_, ch.chan, ch.next_tx, 64);
            if (st == MCX_OK) {
                ++ch.sent;
                ++ch.next_tx;
                return true;
            }
            if (st == MCX_FULL) {
                std::this_thread::yield();  // plain FULL: give the consumer time
                return false;
            }
            fail_status(ch, "scalar_send", st);
            return false;
        }

        if (ch.pending_send) {
            mcx_status st = mcx_wait(rt_, ch.pending_send, 0, nullptr);
            if (st == MCX_COMPLETED) {
                ch.pending_send = 0;
                ++ch.sent;
                ++ch.next_tx;
                return true;
            }
            if (st != MCX_PENDING) fail_status(ch, "send wait", st);
            return false;
        }
        if (ch.next_tx > cfg_.count) return false;

        uint64_t tx = ch.next_tx;
        if (ch.payload.size() >= sizeof(tx)) {
            std::memcpy(ch.payload.data(), &tx, sizeof(tx));
        }
        ch.send_ts[tx] = now_ns();
        mcx_request req = 0;
        mcx_status st;
        if (ch.spec.kind == MCX_KIND_MESSAGE) {
            st = mcx_msg_send(rt_, &ch.send_ep, &ch.recv_ep, ch.payload.data(),
                              ch.payload.size(), ch.spec.priority, tx, &req);
        } else {
            st = mcx_pkt_send(rt_, ch.chan, ch.payload.data(), ch.payload.size(),
                              tx, &req);
        }
        if (st == MCX_OK) {
            ch.pending_send = req;
            return true;
        }
        fail_status(ch, "send", st);
        return false;
    }

    bool step_recv(ChannelRun& ch) {
        if (ch.spec.kind == MCX_KIND_SCALAR) {
            uint64_t value = 0;
            mcx_status st = mcx_scalar_recv(rt_, ch.chan, 64, &value);
            if (st == MCX_OK) {
                accept(ch, value, nullptr, 0);
                return true;
            }
            if (st == MCX_EMPTY) std::this_thread::yield();
            else fail_status(ch, "scalar_recv", st);
            return false;
        }

        if (!ch.pending_recv) {
            mcx_request req = 0;
            mcx_status st = ch.spec.kind == MCX_KIND_MESSAGE
                                ? mcx_msg_recv(rt_, &ch.recv_ep, &req)
                                : mcx_pkt_recv(rt_, ch.chan, &req);
            if (st != MCX_OK) {
                fail_status(ch, "recv post", st);
                return false;
            }
            ch.pending_recv = req;
        }
        mcx_completion comp{};
        mcx_status st = mcx_wait(rt_, ch.pending_recv, 0, &comp);
        if (st == MCX_COMPLETED) {
            ch.pending_recv = 0;
            const uint8_t* body = comp.payload;
            if (ch.spec.kind == MCX_KIND_PACKET) {
                body = static_cast<const uint8_t*>(mcx_buffer_data(rt_, comp.buffer));
            }
            accept(ch, comp.txid, body, comp.length);
            if (ch.spec.kind == MCX_KIND_PACKET) {
                mcx_status rel = mcx_pkt_release(rt_, ch.chan, comp.buffer);
                if (rel != MCX_OK) fail_status(ch, "pkt_release", rel);
            }
            return true;
        }
        if (st != MCX_PENDING) fail_status(ch, "recv wait", st);
        return false;
    }

    void accept(ChannelRun& ch, uint64_t txid, const uint8_t* body, size_t len) {
        int64_t t = now_ns();
        if (txid != ch.expect) {
            std::ostringstream os;
            os << "OUT_OF_ORDER on channel " << ch.index << " ("
               << kind_name(ch.spec.kind) << "): expected transaction "
               << ch.expect << ", received " << txid << " after " << ch.received
               << " accepted";
            fb_.fail(os.str());
            return;
        }
        if (body && len >= sizeof(uint64_t)) {
            uint64_t embedded = 0;
            std::memcpy(&embedded, body, sizeof(embedded));
            if (embedded != txid) {
                std::ostringstream os;
                os << "payload corruption on channel " << ch.index
                   << ": transaction " << txid << " carries body id " << embedded;
                fb_.fail(os.str());
                return;
            }
        }
        ch.recv_ts[txid] = t;
        ch.id_sum += txid;
        ++ch.received;
        ++ch.expect;
    }

    mcx_runtime* rt_;
    uint32_t node_id_;
    const RunConfig& cfg_;
    std::vector<ChannelRun>& channels_;
    FailBox& fb_;
};

struct RepResult {
    double wall_s = 0.0;
    double total_throughput = 0.0;
    std::vector<ChannelStats> channels;
};

bool run_once(const Topology& topo, const RunConfig& cfg, uint32_t cores,
              bool& affinity_unsupported, RepResult& out, std::string& error) {
    mcx_config rc;
    mcx_config_default(&rc);
    rc.backend = cfg.backend;
    rc.max_nodes = static_cast<uint32_t>(topo.nodes.size());
    rc.max_endpoints_per_node = static_cast<uint32_t>(2 * topo.channels.size());
    rc.max_channels = static_cast<uint32_t>(topo.channels.size());

    mcx_runtime* rt = nullptr;
    mcx_status st = mcx_runtime_create(&rc, &rt);
    if (st != MCX_OK) {
        error = std::string("runtime_create: ") + status_name(st);
        return false;
    }
    struct RtGuard {
        mcx_runtime* rt;
        ~RtGuard() { mcx_runtime_destroy(rt); }
    } guard{rt};

    std::vector<mcx_node> node_handles(topo.nodes.size());
    for (size_t i = 0; i < topo.nodes.size(); ++i) {
        st = mcx_node_init(rt, 0, topo.nodes[i], &node_handles[i]);
        if (st != MCX_OK) {
            error = std::string("node_init: ") + status_name(st);
            return false;
        }
    }
    auto handle_of = [&](uint32_t node_id) {
        for (size_t i = 0; i < topo.nodes.size(); ++i) {
            if (topo.nodes[i] == node_id) return node_handles[i];
        }
        return mcx_node{0};
    };

    std::vector<ChannelRun> channels(topo.channels.size());
    for (size_t i = 0; i < topo.channels.size(); ++i) {
        ChannelRun& ch = channels[i];
        ch.spec = topo.channels[i];
        if (cfg.kind_override) ch.spec.kind = *cfg.kind_override;
        ch.index = static_cast<uint32_t>(i);
        ch.payload.assign(cfg.payload, 0xA5);
        ch.send_ts.assign(cfg.count + 1, 0);
        ch.recv_ts.assign(cfg.count + 1, 0);

        uint32_t sp = static_cast<uint32_t>(2 * i);
        uint32_t rp = sp + 1;
        st = mcx_endpoint_create(rt, handle_of(ch.spec.send_node), sp, &ch.send_ep);
        if (st != MCX_OK) {
            error = std::string("endpoint_create(send): ") + status_name(st);
            return false;
        }
        st = mcx_endpoint_create(rt, handle_of(ch.spec.recv_node), rp, &ch.recv_ep);
        if (st != MCX_OK) {
            error = std::string("endpoint_create(recv): ") + status_name(st);
            return false;
        }
        if (ch.spec.kind != MCX_KIND_MESSAGE) {
            st = mcx_channel_open(rt, ch.spec.kind, &ch.send_ep, &ch.recv_ep,
                                  ch.spec.ring_capacity, &ch.chan);
            if (st != MCX_OK) {
                error = std::string("channel_open: ") + status_name(st);
                return false;
            }
        }
    }

    FailBox fb;
    std::atomic<int64_t> t0{0};
    std::atomic<int64_t> t_end{0};
    std::atomic<bool> pin_failed{false};
    const size_t n_threads = topo.nodes.size();
    std::barrier sync(static_cast<std::ptrdiff_t>(n_threads),
                      [&]() noexcept { t0.store(now_ns()); });

    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (size_t k = 0; k < n_threads; ++k) {
        threads.emplace_back([&, k]() {
            if (cfg.affinity == Affinity::PinnedOne) {
                if (!pin_to_core(0)) pin_failed.store(true);
            } else if (cfg.affinity == Affinity::Spread) {
                if (!pin_to_core(static_cast<uint32_t>(k % cores)))
                    pin_failed.store(true);
            }
            NodeWorker worker(rt, topo.nodes[k], cfg, channels, fb);
            sync.arrive_and_wait();
            const int64_t deadline =
                t0.load() + static_cast<int64_t>(cfg.deadline_s * 1e9);
            while (worker.pass()) {
                if (now_ns() > deadline) {
                    fb.fail("DEADLINE: repetition exceeded " +
                            std::to_string(cfg.deadline_s) + "s wall bound");
                    break;
                }
            }
            int64_t t = now_ns();
            int64_t prev = t_end.load();
            while (prev < t && !t_end.compare_exchange_weak(prev, t)) {
            }
        });
    }
    for (auto& th : threads) th.join();
    affinity_unsupported = affinity_unsupported || pin_failed.load();

    if (fb.failed.load()) {
        std::lock_guard<std::mutex> g(fb.m);
        error = fb.message;
        return false;
    }

    // Conservation and exactness checks; failures mean the runtime lost or
    // duplicated work even though every loop exited cleanly.
    for (const auto& ch : channels) {
        if (ch.sent != cfg.count || ch.received != cfg.count) {
            std::ostringstream os;
            os << "channel " << ch.index << ": sent " << ch.sent << ", received "
               << ch.received << ", expected " << cfg.count << " each";
            error = os.str();
            return false;
        }
        uint64_t want = uint64_t{cfg.count} * (uint64_t{cfg.count} + 1) / 2;
        if (ch.id_sum != want) {
            std::ostringstream os;
            os << "channel " << ch.index << ": id checksum " << ch.id_sum
               << " != " << want;
            error = os.str();
            return false;
        }
    }

    // Run the channels down and check nothing leaked.
    for (auto& ch : channels) {
        if (ch.spec.kind == MCX_KIND_MESSAGE) continue;
        st = mcx_channel_close(rt, ch.chan);
        if (st != MCX_OK) {
            error = std::string("channel_close: ") + status_name(st);
            return false;
        }
    }
    uint64_t req_edges = mcx_diag_request_edges(rt);
    uint64_t ent_edges = mcx_diag_entry_edges(rt);
    if (req_edges & ~mcx_diag_legal_request_edges()) {
        error = "illegal request-state transition recorded";
        return false;
    }
    if (ent_edges & ~mcx_diag_legal_entry_edges()) {
        error = "illegal queue-entry transition recorded";
        return false;
    }
    if (mcx_diag_buffers_in_use(rt) != 0) {
        error = "buffer leak: " + std::to_string(mcx_diag_buffers_in_use(rt)) +
                " buffers still allocated at run end";
        return false;
    }
    for (mcx_node h : node_handles) {
        if (mcx_diag_request_free(rt, h) != rc.requests_per_node) {
            error = "request leak: free count below capacity at run end";
            return false;
        }
    }
    if (mcx_diag_max_writers(rt) > 1) {
        error = "lock discipline violation: concurrent writers observed";
        return false;
    }
    for (mcx_node h : node_handles) {
        st = mcx_node_finalize(rt, h);
        if (st != MCX_OK) {
            error = std::string("node_finalize: ") + status_name(st);
            return false;
        }
    }

    double wall_s = static_cast<double>(t_end.load() - t0.load()) / 1e9;
    if (wall_s <= 0) wall_s = 1e-9;
    out.wall_s = wall_s;
    out.total_throughput =
        static_cast<double>(channels.size()) * cfg.count / wall_s;
    out.channels.clear();
    for (const auto& ch : channels) {
        ChannelStats cs;
        cs.channel = ch.index;
        cs.sent = ch.sent;
        cs.received = ch.received;
        cs.wall_s = wall_s;
        cs.throughput = static_cast<double>(cfg.count) / wall_s;
        std::vector<double> lat;
        lat.reserve(cfg.count);
        for (uint32_t tx = 1; tx <= cfg.count; ++tx) {
            lat.push_back(static_cast<double>(ch.recv_ts[tx] - ch.send_ts[tx]));
        }
        std::vector<double> sorted = lat;
        std::sort(sorted.begin(), sorted.end());
        cs.lat_min_ns = sorted.front();
        cs.lat_median_ns = median(lat);
        cs.lat_p99_ns = percentile(lat, 0.99);
        out.channels.push_back(std::move(cs));
    }
    return true;
}

}  // namespace

const char* backend_name(mcx_backend b) {
    return b == MCX_BACKEND_LOCKED ? "locked" : "lockfree";
}

const char* affinity_name(Affinity a) {
    switch (a) {
        case Affinity::PinnedOne: return "pinned-one";
        case Affinity::None: return "none";
        case Affinity::Spread: return "spread";
    }
    return "?";
}

const char* kind_name(mcx_kind k) {
    switch (k) {
        case MCX_KIND_MESSAGE: return "message";
        case MCX_KIND_PACKET: return "packet";
        case MCX_KIND_SCALAR: return "scalar";
    }
    return "?";
}

uint32_t detect_cores() {
    if (const char* env = std::getenv("MCX_CORES")) {
        char* end = nullptr;
        unsigned long v = std::strtoul(env, &end, 10);
        if (end && *end == '\0' && v >= 1 && v <= 4096) {
            return static_cast<uint32_t>(v);
        }
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1;
}

bool run_matrix(const Topology& topo, const std::vector<RunConfig>& configs,
                std::vector<RunReport>& reports, std::string& error) {
    if (configs.empty()) {
        error = "no run configurations";
        return false;
    }
    const uint32_t cores = detect_cores();
    const double clock_cost = measure_clock_cost_ns();

    for (const auto& cfg : configs) {
        if (cfg.count < 1) {
            error = "count must be >= 1";
            return false;
        }
        RunReport rep;
        rep.backend = backend_name(cfg.backend);
        rep.affinity = affinity_name(cfg.affinity);
        rep.kind = cfg.kind_override ? kind_name(*cfg.kind_override) : "topology";
        rep.count = cfg.count;
        rep.payload = cfg.payload;
        rep.reps = cfg.reps;
        rep.cores = cores;
        rep.timestamp = timestamp_now();
        rep.clock_read_ns = clock_cost;
        rep.spread_degenerate = cfg.affinity == Affinity::Spread && cores == 1;

        for (uint32_t w = 0; w < cfg.warmup; ++w) {
            RepResult discard;
            if (!run_once(topo, cfg, cores, rep.affinity_unsupported, discard,
                          error)) {
                return false;
            }
        }

        std::vector<RepResult> results;
        for (uint32_t r = 0; r < std::max(1u, cfg.reps); ++r) {
            RepResult res;
            if (!run_once(topo, cfg, cores, rep.affinity_unsupported, res,
                          error)) {
                return false;
            }
            rep.rep_throughputs.push_back(res.total_throughput);
            results.push_back(std::move(res));
        }
        rep.median_throughput = median(rep.rep_throughputs);

        // Report the repetition closest to the median so channel stats and
        // the headline number describe the same run.
        size_t pick = 0;
        double best = -1.0;
        for (size_t i = 0; i < results.size(); ++i) {
            double d = std::abs(rep.rep_throughputs[i] - rep.median_throughput);
            if (best < 0 || d < best) {
                best = d;
                pick = i;
            }
        }
        rep.channels = std::move(results[pick].channels);
        reports.push_back(std::move(rep));
    }
    return true;
}

}  // namespace mcx::harness
