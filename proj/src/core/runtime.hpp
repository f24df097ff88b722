#pragma once

#include <cstring>
#include <span>

#include "core/atomics.hpp"
#include "core/locked_queue.hpp"
#include "core/nbb.hpp"
#include "core/registry.hpp"

namespace mcx {

struct RuntimeConfig {
    Backend backend = Backend::LockFree;
    size_t max_nodes = 8;
    size_t max_endpoints_per_node = 8;
    size_t max_channels = 16;
    size_t max_producers_per_endpoint = 4;
    size_t ring_capacity = 64;         // power of two
    size_t entries_per_endpoint = 256;
    size_t requests_per_node = 256;
    size_t buffer_count = 1024;
    size_t buffer_size = 256;          // bytes per pool buffer, <= 256
    unsigned spin_bound = 100;         // immediate retries on the BUT_* states
};

struct EndpointId {
    uint32_t domain = 0;
    uint32_t node = 0;
    uint32_t port = 0;

    friend bool operator==(const EndpointId&, const EndpointId&) = default;
};

using NodeHandle = uint64_t;  // 0 is invalid
using ReqHandle = uint64_t;   // 0 is invalid
using ChanHandle = uint64_t;  // 0 is invalid

inline constexpr size_t kMaxPayload = 256;

struct Completion {
    uint64_t txid = 0;
    uint32_t priority = 0;
    uint32_t length = 0;
    uint32_t buffer = kInvalidIndex;  // packet recv: pool buffer to release
    uint8_t payload[kMaxPayload];     // message recv: inline copy
};

template <typename T>
struct Result {
    Status status = Status::Ok;
    T value{};

    bool ok() const noexcept { return status == Status::Ok; }
};

struct WaitOutcome {
    Status status = Status::Pending;  // Completed/Pending/Timeout/Cancelled/UnknownRequest
    Completion completion;
};

// The runtime instance: node/endpoint registry, request pools, buffer pool,
// channels, and the message/packet/scalar exchange surface. The queue
// backend (locked baseline vs lock-free) is fixed at construction.
class Runtime {
public:
    explicit Runtime(const RuntimeConfig& cfg = {});
    ~Runtime();

    Runtime(const Runtime&) = delete;
    Runtime& operator=(const Runtime&) = delete;

    const RuntimeConfig& config() const noexcept { return cfg_; }

    // --- nodes -------------------------------------------------------
    Result<NodeHandle> node_init(uint32_t domain, uint32_t node);
    Status node_finalize(NodeHandle h);

    // --- endpoints ---------------------------------------------------
    Result<EndpointId> create_endpoint(NodeHandle h, uint32_t port);

    // --- connection-less messages -----------------------------------
    Result<ReqHandle> msg_send(const EndpointId& from, const EndpointId& to,
                               std::span<const uint8_t> payload,
                               uint32_t priority, uint64_t txid);
    Result<ReqHandle> msg_recv(const EndpointId& ep);

    // --- channels ----------------------------------------------------
    Result<ChanHandle> channel_open(TrafficKind kind, const EndpointId& send,
                                    const EndpointId& recv, size_t ring_capacity = 0);
    Status channel_close(ChanHandle h);

    Result<ReqHandle> pkt_send(ChanHandle h, std::span<const uint8_t> payload,
                               uint64_t txid);
    Result<ReqHandle> pkt_recv(ChanHandle h);
    Status pkt_buffer_release(ChanHandle h, uint32_t buffer);

    // Pool buffer bytes for a packet completion.
    const uint8_t* buffer_data(uint32_t buffer) const noexcept;

    Status scalar_send(ChanHandle h, uint64_t value, uint32_t width);
    Result<uint64_t> scalar_recv(ChanHandle h, uint32_t width);

    // --- requests ----------------------------------------------------
    WaitOutcome wait(ReqHandle h, int64_t timeout_ns);
    Status cancel(ReqHandle h);

    // --- diagnostics -------------------------------------------------
    uint64_t request_edge_mask() const noexcept { return req_edges_.load(); }
    uint64_t entry_edge_mask() const noexcept { return entry_edges_.load(); }
    static constexpr uint64_t legal_request_edges() noexcept { return kLegalRequestEdges; }
    static constexpr uint64_t legal_entry_edges() noexcept { return kLegalEntryEdges; }

    size_t request_free_count(NodeHandle h) const;
    size_t buffers_in_use() const noexcept { return pool_.in_use(); }
    int max_concurrent_writers() const noexcept { return global_lock_.max_writers_observed(); }

    // Exposed for white-box tests.
    Request* resolve_request(ReqHandle h) noexcept;
    bool request_transition(Request& r, RequestState from, RequestState to) noexcept;
    bool entry_transition(QueueEntry& e, EntryState from, EntryState to) noexcept;

private:
    std::unique_ptr<ItemRing> make_ring(size_t capacity);

    Node* find_node(uint32_t domain, uint32_t node) noexcept;
    const Node* find_node(uint32_t domain, uint32_t node) const noexcept;
    Endpoint* find_endpoint(const EndpointId& id) noexcept;
    ChannelSlot* resolve_channel(ChanHandle h) noexcept;

    Result<ReqHandle> request_alloc(Node& node);
    void request_release(Request& r) noexcept;

    ItemRing* claim_producer_ring(Endpoint& dst, uint32_t priority, uint64_t producer_key);
    QueueEntry* reserve_entry(Endpoint& ep, uint32_t& index_out) noexcept;

    void progress_send(Request& r) noexcept;
    // Returns true when the request completed (or was found complete).
    bool progress_recv(Request& r, Completion& out) noexcept;
    bool consume_from(Request& r, Endpoint& recv_ep, ItemRing& ring, Completion& out) noexcept;
    void complete_sender(uint64_t handle) noexcept;

    RuntimeConfig cfg_;
    GlobalWriteLock global_lock_;
    BufferPool pool_;
    std::vector<std::unique_ptr<Node>> nodes_;
    std::vector<std::unique_ptr<ChannelSlot>> channels_;
    AtomicWord req_edges_;
    AtomicWord entry_edges_;
};

}  // namespace mcx
