#include "mcx/mcx.h"

#include <cstring>
#include <new>

#include "core/perf_model.hpp"
#include "core/runtime.hpp"

namespace {

mcx::Runtime* unwrap(mcx_runtime* rt) noexcept {
    return reinterpret_cast<mcx::Runtime*>(rt);
}
const mcx::Runtime* unwrap(const mcx_runtime* rt) noexcept {
    return reinterpret_cast<const mcx::Runtime*>(rt);
}
mcx_status wrap(mcx::Status s) noexcept {
    return static_cast<mcx_status>(static_cast<int>(s));
}
mcx::EndpointId unwrap(const mcx_endpoint& ep) noexcept {
    return {ep.domain, ep.node, ep.port};
}

}  // namespace

extern "C" {

void mcx_config_default(mcx_config* cfg) {
    if (!cfg) return;
    mcx::RuntimeConfig d;
    cfg->backend = d.backend == mcx::Backend::Locked ? MCX_BACKEND_LOCKED
                                                     : MCX_BACKEND_LOCKFREE;
    cfg->max_nodes = static_cast<uint32_t>(d.max_nodes);
    cfg->max_endpoints_per_node = static_cast<uint32_t>(d.max_endpoints_per_node);
    cfg->max_channels = static_cast<uint32_t>(d.max_channels);
    cfg->max_producers_per_endpoint = static_cast<uint32_t>(d.max_producers_per_endpoint);
    cfg->ring_capacity = static_cast<uint32_t>(d.ring_capacity);
    cfg->entries_per_endpoint = static_cast<uint32_t>(d.entries_per_endpoint);
    cfg->requests_per_node = static_cast<uint32_t>(d.requests_per_node);
    cfg->buffer_count = static_cast<uint32_t>(d.buffer_count);
    cfg->buffer_size = static_cast<uint32_t>(d.buffer_size);
    cfg->spin_bound = d.spin_bound;
}

mcx_status mcx_runtime_create(const mcx_config* cfg, mcx_runtime** out) {
    if (!out) return MCX_INVALID_ARGUMENT;
    *out = nullptr;
    mcx::RuntimeConfig rc;
    if (cfg) {
        if (cfg->max_nodes == 0 || cfg->max_endpoints_per_node == 0 ||
            cfg->max_channels == 0 || cfg->max_producers_per_endpoint == 0 ||
            cfg->ring_capacity == 0 || cfg->entries_per_endpoint == 0 ||
            cfg->requests_per_node == 0 || cfg->buffer_count == 0 ||
            cfg->buffer_size == 0 ||
            (cfg->ring_capacity & (cfg->ring_capacity - 1)) != 0) {
            return MCX_INVALID_ARGUMENT;
        }
        rc.backend = cfg->backend == MCX_BACKEND_LOCKED ? mcx::Backend::Locked
                                                        : mcx::Backend::LockFree;
        rc.max_nodes = cfg->max_nodes;
        rc.max_endpoints_per_node = cfg->max_endpoints_per_node;
        rc.max_channels = cfg->max_channels;
        rc.max_producers_per_endpoint = cfg->max_producers_per_endpoint;
        rc.ring_capacity = cfg->ring_capacity;
        rc.entries_per_endpoint = cfg->entries_per_endpoint;
        rc.requests_per_node = cfg->requests_per_node;
        rc.buffer_count = cfg->buffer_count;
        rc.buffer_size = cfg->buffer_size;
        rc.spin_bound = cfg->spin_bound;
    }
    auto* rt = new (std::nothrow) mcx::Runtime(rc);
    if (!rt) return MCX_EXHAUSTED;
    *out = reinterpret_cast<mcx_runtime*>(rt);
    return MCX_OK;
}

void mcx_runtime_destroy(mcx_runtime* rt) { delete unwrap(rt); }

mcx_status mcx_node_init(mcx_runtime* rt, uint32_t domain, uint32_t node,
                         mcx_node* out) {
    if (!rt || !out) return MCX_INVALID_ARGUMENT;
    auto r = unwrap(rt)->node_init(domain, node);
    if (r.ok()) *out = r.value;
    return wrap(r.status);
}

mcx_status mcx_node_finalize(mcx_runtime* rt, mcx_node node) {
    if (!rt) return MCX_INVALID_ARGUMENT;
    return wrap(unwrap(rt)->node_finalize(node));
}

mcx_status mcx_endpoint_create(mcx_runtime* rt, mcx_node node, uint32_t port,
                               mcx_endpoint* out) {
    if (!rt || !out) return MCX_INVALID_ARGUMENT;
    auto r = unwrap(rt)->create_endpoint(node, port);
    if (r.ok()) *out = {r.value.domain, r.value.node, r.value.port};
    return wrap(r.status);
}

mcx_status mcx_msg_send(mcx_runtime* rt, const mcx_endpoint* from,
                        const mcx_endpoint* to, const void* payload, size_t len,
                        uint32_t priority, uint64_t txid, mcx_request* out) {
    if (!rt || !from || !to || !out || (len && !payload)) return MCX_INVALID_ARGUMENT;
    auto r = unwrap(rt)->msg_send(
        unwrap(*from), unwrap(*to),
        {static_cast<const uint8_t*>(payload), len}, priority, txid);
    if (r.ok()) *out = r.value;
    return wrap(r.status);
}

mcx_status mcx_msg_recv(mcx_runtime* rt, const mcx_endpoint* ep, mcx_request* out) {
    if (!rt || !ep || !out) return MCX_INVALID_ARGUMENT;
    auto r = unwrap(rt)->msg_recv(unwrap(*ep));
    if (r.ok()) *out = r.value;
    return wrap(r.status);
}

mcx_status mcx_channel_open(mcx_runtime* rt, mcx_kind kind,
                            const mcx_endpoint* send_ep,
                            const mcx_endpoint* recv_ep, size_t ring_capacity,
                            mcx_channel* out) {
    if (!rt || !send_ep || !recv_ep || !out) return MCX_INVALID_ARGUMENT;
    if (ring_capacity & (ring_capacity - 1)) return MCX_INVALID_ARGUMENT;
    auto r = unwrap(rt)->channel_open(static_cast<mcx::TrafficKind>(kind),
                                      unwrap(*send_ep), unwrap(*recv_ep),
                                      ring_capacity);
    if (r.ok()) *out = r.value;
    return wrap(r.status);
}

mcx_status mcx_channel_close(mcx_runtime* rt, mcx_channel chan) {
    if (!rt) return MCX_INVALID_ARGUMENT;
    return wrap(unwrap(rt)->channel_close(chan));
}

mcx_status mcx_pkt_send(mcx_runtime* rt, mcx_channel chan, const void* payload,
                        size_t len, uint64_t txid, mcx_request* out) {
    if (!rt || !out || (len && !payload)) return MCX_INVALID_ARGUMENT;
    auto r = unwrap(rt)->pkt_send(chan, {static_cast<const uint8_t*>(payload), len},
                                  txid);
    if (r.ok()) *out = r.value;
    return wrap(r.status);
}

mcx_status mcx_pkt_recv(mcx_runtime* rt, mcx_channel chan, mcx_request* out) {
    if (!rt || !out) return MCX_INVALID_ARGUMENT;
    auto r = unwrap(rt)->pkt_recv(chan);
    if (r.ok()) *out = r.value;
    return wrap(r.status);
}

mcx_status mcx_pkt_release(mcx_runtime* rt, mcx_channel chan, uint32_t buffer) {
    if (!rt) return MCX_INVALID_ARGUMENT;
    return wrap(unwrap(rt)->pkt_buffer_release(chan, buffer));
}

const void* mcx_buffer_data(const mcx_runtime* rt, uint32_t buffer) {
    if (!rt) return nullptr;
    return unwrap(rt)->buffer_data(buffer);
}

mcx_status mcx_scalar_send(mcx_runtime* rt, mcx_channel chan, uint64_t value,
                           uint32_t width) {
    if (!rt) return MCX_INVALID_ARGUMENT;
    return wrap(unwrap(rt)->scalar_send(chan, value, width));
}

mcx_status mcx_scalar_recv(mcx_runtime* rt, mcx_channel chan, uint32_t width,
                           uint64_t* out) {
    if (!rt || !out) return MCX_INVALID_ARGUMENT;
    auto r = unwrap(rt)->scalar_recv(chan, width);
    if (r.ok()) *out = r.value;
    return wrap(r.status);
}

mcx_status mcx_wait(mcx_runtime* rt, mcx_request req, int64_t timeout_ns,
                    mcx_completion* out) {
    if (!rt) return MCX_INVALID_ARGUMENT;
    mcx::WaitOutcome w = unwrap(rt)->wait(req, timeout_ns);
    if (out && w.status == mcx::Status::Completed) {
        out->txid = w.completion.txid;
        out->priority = w.completion.priority;
        out->length = w.completion.length;
        out->buffer = w.completion.buffer;
        static_assert(sizeof(out->payload) == sizeof(w.completion.payload));
        std::memcpy(out->payload, w.completion.payload, w.completion.length);
    }
    return wrap(w.status);
}

mcx_status mcx_cancel(mcx_runtime* rt, mcx_request req) {
    if (!rt) return MCX_INVALID_ARGUMENT;
    return wrap(unwrap(rt)->cancel(req));
}

uint64_t mcx_diag_request_edges(const mcx_runtime* rt) {
    return rt ? unwrap(rt)->request_edge_mask() : 0;
}
uint64_t mcx_diag_entry_edges(const mcx_runtime* rt) {
    return rt ? unwrap(rt)->entry_edge_mask() : 0;
}
uint64_t mcx_diag_legal_request_edges(void) {
    return mcx::Runtime::legal_request_edges();
}
uint64_t mcx_diag_legal_entry_edges(void) {
    return mcx::Runtime::legal_entry_edges();
}
size_t mcx_diag_request_free(const mcx_runtime* rt, mcx_node node) {
    return rt ? unwrap(rt)->request_free_count(node) : 0;
}
size_t mcx_diag_buffers_in_use(const mcx_runtime* rt) {
    return rt ? unwrap(rt)->buffers_in_use() : 0;
}
uint32_t mcx_diag_max_writers(const mcx_runtime* rt) {
    return rt ? static_cast<uint32_t>(unwrap(rt)->max_concurrent_writers()) : 0;
}

/* ----- performance model -------------------------------------------------- */

namespace {
mcx::ModelConfig to_cpp(const mcx_model_config& c) {
    return {c.cores, c.cache_hit_rate, c.mem_access_ns, c.ops_send, c.ops_recv,
            c.target_rate};
}
}  // namespace

double mcx_model_theoretical_max(const mcx_model_config* cfg) {
    return cfg ? mcx::theoretical_max(to_cpp(*cfg)) : 0.0;
}

mcx_status mcx_model_simulate(const mcx_model_config* cfg, double horizon_seconds,
                              uint64_t seed, mcx_model_result* out) {
    if (!cfg || !out || horizon_seconds <= 0 || cfg->cores < 1 ||
        cfg->cache_hit_rate < 0 || cfg->cache_hit_rate > 1 ||
        cfg->mem_access_ns <= 0 || cfg->ops_send <= 0 || cfg->ops_recv <= 0 ||
        cfg->target_rate <= 0) {
        return MCX_INVALID_ARGUMENT;
    }
    mcx::SimResult r = mcx::simulate(to_cpp(*cfg), horizon_seconds, seed);
    *out = {r.bus_utilization, r.achieved_throughput_pct, r.throughput,
            r.mean_wait_ns,    r.mean_latency_ns,         r.completions,
            r.unstable,        r.degenerate,              r.jobs_in_system,
            r.rate_times_latency, r.little_error_pct};
    return MCX_OK;
}

mcx_status mcx_model_load_calibration(const char* path, mcx_model_config* cfg,
                                      char* errbuf, size_t errbuf_len) {
    if (!path || !cfg) return MCX_INVALID_ARGUMENT;
    mcx::ModelConfig mc;
    mc.cache_hit_rate = cfg->cache_hit_rate;
    mcx::CalibrationError err;
    if (!mcx::load_calibration(path, mc, err)) {
        if (errbuf && errbuf_len) {
            std::string msg = err.line
                                  ? "line " + std::to_string(err.line) + ": " + err.message
                                  : err.message;
            std::snprintf(errbuf, errbuf_len, "%s", msg.c_str());
        }
        return MCX_INVALID_ARGUMENT;
    }
    cfg->cores = mc.cores;
    cfg->mem_access_ns = mc.mem_access_ns;
    cfg->ops_send = mc.ops_send;
    cfg->ops_recv = mc.ops_recv;
    cfg->target_rate = mc.target_rate;
    return MCX_OK;
}

}  // extern "C"
