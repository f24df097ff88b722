/*
 * mcx — multicore message-passing runtime, C interface.
 *
 * All objects live behind the opaque mcx_runtime handle. Nodes, channels and
 * requests are plain 64-bit handles (0 is never valid); endpoints are named
 * by (domain, node, port). Every call returns an mcx_status; calls that
 * produce a value write it through an out-parameter on MCX_OK.
 */
#ifndef MCX_H
#define MCX_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MCX_API __declspec(dllexport)
#else
#define MCX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mcx_status {
    MCX_OK = 0,
    MCX_PENDING,
    MCX_TIMEOUT,
    MCX_COMPLETED,
    MCX_CANCELLED,
    MCX_ALREADY_INITIALIZED,
    MCX_NODE_NOT_INITIALIZED,
    MCX_PORT_IN_USE,
    MCX_NO_SUCH_ENDPOINT,
    MCX_ALREADY_CONNECTED,
    MCX_NOT_CONNECTED,
    MCX_WIDTH_MISMATCH,
    MCX_BUSY,
    MCX_LIMIT,
    MCX_EXHAUSTED,
    MCX_TOO_LATE,
    MCX_INVALID_OPERATION,
    MCX_UNKNOWN_REQUEST,
    MCX_FULL,
    MCX_EMPTY,
    MCX_TOO_LARGE,
    MCX_INVALID_ARGUMENT = 64 /* C-boundary validation (null pointer, ...) */
} mcx_status;

typedef enum mcx_backend {
    MCX_BACKEND_LOCKED = 0,
    MCX_BACKEND_LOCKFREE = 1
} mcx_backend;

typedef enum mcx_kind {
    MCX_KIND_MESSAGE = 0,
    MCX_KIND_PACKET = 1,
    MCX_KIND_SCALAR = 2
} mcx_kind;

#define MCX_MAX_PAYLOAD 256u
#define MCX_PRIORITIES 4u
#define MCX_INVALID_BUFFER 0xFFFFFFFFu

typedef struct mcx_runtime mcx_runtime;
typedef uint64_t mcx_node;
typedef uint64_t mcx_request;
typedef uint64_t mcx_channel;

typedef struct mcx_endpoint {
    uint32_t domain;
    uint32_t node;
    uint32_t port;
} mcx_endpoint;

typedef struct mcx_config {
    mcx_backend backend;
    uint32_t max_nodes;
    uint32_t max_endpoints_per_node;
    uint32_t max_channels;
    uint32_t max_producers_per_endpoint;
    uint32_t ring_capacity;          /* per producer ring / channel, power of 2 */
    uint32_t entries_per_endpoint;   /* receive queue depth */
    uint32_t requests_per_node;
    uint32_t buffer_count;
    uint32_t buffer_size;            /* capped at MCX_MAX_PAYLOAD */
    uint32_t spin_bound;             /* retries on *_BUT_* transient states */
} mcx_config;

typedef struct mcx_completion {
    uint64_t txid;
    uint32_t priority;
    uint32_t length;
    uint32_t buffer; /* packet receive: pool buffer now owned by the caller */
    uint8_t payload[MCX_MAX_PAYLOAD]; /* message receive: copied payload */
} mcx_completion;

MCX_API void mcx_config_default(mcx_config* cfg);
MCX_API mcx_status mcx_runtime_create(const mcx_config* cfg, mcx_runtime** out);
MCX_API void mcx_runtime_destroy(mcx_runtime* rt);

/* ----- nodes and endpoints ---------------------------------------------- */
MCX_API mcx_status mcx_node_init(mcx_runtime* rt, uint32_t domain, uint32_t node,
                                 mcx_node* out);
MCX_API mcx_status mcx_node_finalize(mcx_runtime* rt, mcx_node node);
MCX_API mcx_status mcx_endpoint_create(mcx_runtime* rt, mcx_node node,
                                       uint32_t port, mcx_endpoint* out);

/* ----- connection-less messages ----------------------------------------- */
MCX_API mcx_status mcx_msg_send(mcx_runtime* rt, const mcx_endpoint* from,
                                const mcx_endpoint* to, const void* payload,
                                size_t len, uint32_t priority, uint64_t txid,
                                mcx_request* out);
MCX_API mcx_status mcx_msg_recv(mcx_runtime* rt, const mcx_endpoint* ep,
                                mcx_request* out);

/* ----- connected channels (packets and scalars) -------------------------- */
/* ring_capacity 0 means "use the runtime default". */
MCX_API mcx_status mcx_channel_open(mcx_runtime* rt, mcx_kind kind,
                                    const mcx_endpoint* send_ep,
                                    const mcx_endpoint* recv_ep,
                                    size_t ring_capacity, mcx_channel* out);
MCX_API mcx_status mcx_channel_close(mcx_runtime* rt, mcx_channel chan);

MCX_API mcx_status mcx_pkt_send(mcx_runtime* rt, mcx_channel chan,
                                const void* payload, size_t len, uint64_t txid,
                                mcx_request* out);
MCX_API mcx_status mcx_pkt_recv(mcx_runtime* rt, mcx_channel chan,
                                mcx_request* out);
/* Return a buffer handed out by a packet-receive completion. */
MCX_API mcx_status mcx_pkt_release(mcx_runtime* rt, mcx_channel chan,
                                   uint32_t buffer);
MCX_API const void* mcx_buffer_data(const mcx_runtime* rt, uint32_t buffer);

/* Width is 8/16/32/64 bits and is fixed for the channel by the first send. */
MCX_API mcx_status mcx_scalar_send(mcx_runtime* rt, mcx_channel chan,
                                   uint64_t value, uint32_t width);
MCX_API mcx_status mcx_scalar_recv(mcx_runtime* rt, mcx_channel chan,
                                   uint32_t width, uint64_t* out);

/* ----- completion -------------------------------------------------------- */
/* Drives the runtime forward (there is no background thread) and polls the
 * request. timeout_ns == 0: one progress pass, then MCX_PENDING if not done.
 * Returns MCX_COMPLETED / MCX_PENDING / MCX_TIMEOUT / MCX_CANCELLED. */
MCX_API mcx_status mcx_wait(mcx_runtime* rt, mcx_request req, int64_t timeout_ns,
                            mcx_completion* out);
/* Receive requests only; MCX_TOO_LATE once the request completed. */
MCX_API mcx_status mcx_cancel(mcx_runtime* rt, mcx_request req);

/* ----- diagnostics -------------------------------------------------------
 * Edge masks log every state transition the runtime ever performed, one bit
 * per (from, to) pair: bit index = from * 8 + to. The observed mask must stay
 * a subset of the legal mask. */
MCX_API uint64_t mcx_diag_request_edges(const mcx_runtime* rt);
MCX_API uint64_t mcx_diag_entry_edges(const mcx_runtime* rt);
MCX_API uint64_t mcx_diag_legal_request_edges(void);
MCX_API uint64_t mcx_diag_legal_entry_edges(void);
MCX_API size_t mcx_diag_request_free(const mcx_runtime* rt, mcx_node node);
MCX_API size_t mcx_diag_buffers_in_use(const mcx_runtime* rt);
/* Locked backend: most writers ever observed inside the global write lock. */
MCX_API uint32_t mcx_diag_max_writers(const mcx_runtime* rt);

/* ----- bus-contention performance model ---------------------------------- */
typedef struct mcx_model_config {
    uint32_t cores;
    double cache_hit_rate;
    double mem_access_ns;
    double ops_send;
    double ops_recv;
    double target_rate;
} mcx_model_config;

typedef struct mcx_model_result {
    double bus_utilization;
    double achieved_throughput_pct;
    double throughput;
    double mean_wait_ns;
    double mean_latency_ns;
    uint64_t completions;
    int unstable;
    int degenerate;
    double jobs_in_system;
    double rate_times_latency;
    double little_error_pct;
} mcx_model_result;

MCX_API double mcx_model_theoretical_max(const mcx_model_config* cfg);
MCX_API mcx_status mcx_model_simulate(const mcx_model_config* cfg,
                                      double horizon_seconds, uint64_t seed,
                                      mcx_model_result* out);
MCX_API mcx_status mcx_model_load_calibration(const char* path,
                                              mcx_model_config* cfg,
                                              char* errbuf, size_t errbuf_len);

#ifdef __cplusplus
}
#endif
#endif /* MCX_H */
