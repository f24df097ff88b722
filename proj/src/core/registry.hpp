#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

#include "core/bitset.hpp"
#include "core/ring.hpp"

namespace mcx {

inline constexpr uint32_t kInvalidIndex = 0xFFFFFFFFu;
inline constexpr size_t kPriorities = 4;  // 0 is highest

enum class Status : int {
    Ok = 0,
    Pending,
    Timeout,
    Completed,
    Cancelled,
    AlreadyInitialized,
    NodeNotInitialized,
    PortInUse,
    NoSuchEndpoint,
    AlreadyConnected,
    NotConnected,
    WidthMismatch,
    Busy,
    Limit,
    Exhausted,
    TooLate,
    InvalidOperation,
    UnknownRequest,
    Full,
    Empty,
    TooLarge,
};

enum class Backend { Locked, LockFree };

enum class TrafficKind : uint8_t { Message = 0, Packet = 1, Scalar = 2 };

// Request lifecycle (CAS-guarded; see legal edge masks below).
enum class RequestState : uint32_t {
    Free = 0,
    Valid,
    Received,
    Completed,
    Cancelled,
};

// Receive-queue entry lifecycle. A buffer is bound exactly while the entry
// is Allocated or Received.
enum class EntryState : uint32_t {
    Free = 0,
    Reserved,
    Allocated,
    Received,
};

// Transition edges are recorded as single bits (from * 8 + to) so a whole
// run's history can be checked against the legal set afterwards.
constexpr uint64_t edge_bit(uint32_t from, uint32_t to) {
    return uint64_t{1} << (from * 8 + to);
}

constexpr uint64_t kLegalRequestEdges =
    edge_bit(0, 1) |  // Free      -> Valid
    edge_bit(1, 3) |  // Valid     -> Completed
    edge_bit(1, 2) |  // Valid     -> Received   (send path)
    edge_bit(2, 3) |  // Received  -> Completed
    edge_bit(1, 4) |  // Valid     -> Cancelled  (receive cancel)
    edge_bit(4, 0) |  // Cancelled -> Free
    edge_bit(3, 0);   // Completed -> Free

constexpr uint64_t kLegalEntryEdges =
    edge_bit(0, 1) |  // Free      -> Reserved
    edge_bit(1, 2) |  // Reserved  -> Allocated
    edge_bit(2, 3) |  // Allocated -> Received
    edge_bit(3, 0);   // Received  -> Free

// Fixed-size pool of equally sized exchange buffers behind a lock-free
// allocation bitset.
class BufferPool {
public:
    BufferPool(size_t buffer_count, size_t buffer_size);

    std::optional<uint32_t> alloc() noexcept;
    void free(uint32_t handle) noexcept;
    bool live(uint32_t handle) const noexcept;

    uint8_t* data(uint32_t handle) noexcept;
    const uint8_t* data(uint32_t handle) const noexcept;

    size_t buffer_size() const noexcept { return buffer_size_; }
    size_t capacity() const noexcept { return count_; }
    size_t in_use() const noexcept { return bits_.popcount(); }
    void reset() noexcept { bits_.reset(); }

private:
    size_t count_;
    size_t buffer_size_;
    LockFreeBitSet bits_;
    std::vector<uint8_t> storage_;
};

struct Endpoint;
struct ChannelSlot;
struct Node;

struct SendStage {
    static constexpr uint8_t NeedEntry = 0;
    static constexpr uint8_t NeedInsert = 1;
    static constexpr uint8_t InRing = 2;
};

struct Request {
    std::atomic<uint32_t> state{0};  // RequestState
    std::atomic<uint32_t> gen{0};

    bool is_send = false;
    TrafficKind kind = TrafficKind::Message;
    uint8_t priority = 0;
    uint8_t stage = SendStage::InRing;
    uint64_t txid = 0;
    uint64_t self = 0;  // packed handle, set at allocation
    uint32_t buffer = kInvalidIndex;
    uint32_t buffer_len = 0;
    uint32_t entry_index = kInvalidIndex;
    Endpoint* src = nullptr;   // receive source (message recv)
    Endpoint* dst = nullptr;   // send target (message send)
    ChannelSlot* chan = nullptr;
    ItemRing* ring = nullptr;  // resolved target ring for sends
};

struct QueueEntry {
    std::atomic<uint32_t> state{0};  // EntryState
    uint32_t buffer = kInvalidIndex;
    uint32_t length = 0;
    uint8_t priority = 0;
    uint64_t txid = 0;
    uint64_t sender_req = 0;
};

// One SPSC ring per (producer endpoint, priority); claimed by the first
// send from that producer. key is the packed producer endpoint id, 0 free.
struct ProducerSlot {
    std::atomic<uint64_t> key{0};
    std::unique_ptr<ItemRing> ring;
};

struct Endpoint {
    // port + 1 when live, 0 when free; the claiming bit marks a slot whose
    // owner is still resolving duplicate claims.
    static constexpr uint32_t kClaimingBit = 0x80000000u;
    std::atomic<uint32_t> port_key{0};

    std::atomic<uint32_t> connected_send{0};  // channel index + 1
    std::atomic<uint32_t> connected_recv{0};

    Node* owner = nullptr;
    std::vector<QueueEntry> entries;
    std::array<std::vector<ProducerSlot>, kPriorities> rings;
    std::array<std::atomic<uint32_t>, kPriorities> rr{};  // consumer scan hints
    std::atomic<uint64_t> consumer_tid{0};

    uint32_t port() const noexcept {
        return (port_key.load() & ~kClaimingBit) - 1;
    }
    bool live() const noexcept {
        uint32_t k = port_key.load();
        return k != 0 && !(k & kClaimingBit);
    }
};

struct Node {
    // packed (domain, node) + claiming bit in bit 63; 0 when free.
    static constexpr uint64_t kClaimingBit = uint64_t{1} << 63;
    std::atomic<uint64_t> key{0};
    std::atomic<uint32_t> gen{0};

    uint32_t domain = 0;
    uint32_t node_id = 0;

    std::vector<std::unique_ptr<Request>> pool;
    std::unique_ptr<LockFreeBitSet> pool_bits;
    std::vector<std::unique_ptr<Endpoint>> endpoints;
    uint32_t index = 0;

    bool live() const noexcept {
        uint64_t k = key.load();
        return k != 0 && !(k & kClaimingBit);
    }
};

struct ChannelSlot {
    enum : uint32_t { Free = 0, Claiming = 1, Open = 2 };
    std::atomic<uint32_t> state{Free};
    std::atomic<uint32_t> gen{0};
    std::atomic<uint32_t> scalar_width{0};  // set by the first scalar send
    std::atomic<uint32_t> inflight{0};
    TrafficKind kind = TrafficKind::Packet;
    Endpoint* send_ep = nullptr;
    Endpoint* recv_ep = nullptr;
    std::unique_ptr<ItemRing> ring;
    uint32_t index = 0;
};

inline uint64_t pack_endpoint_key(uint32_t domain, uint32_t node, uint32_t port) noexcept {
    return (uint64_t{domain} + 1) << 42 | (uint64_t{node} + 1) << 21 | (uint64_t{port} + 1);
}

}  // namespace mcx
