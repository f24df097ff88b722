#include "core/runtime.hpp"

#include <cassert>
#include <chrono>
#include <thread>

namespace mcx {

namespace {

uint64_t pack_req(uint32_t node_idx, uint32_t req_idx, uint32_t gen) noexcept {
    return (uint64_t{node_idx} + 1) << 48 | uint64_t{req_idx} << 32 | gen;
}

uint64_t now_ns() noexcept {
    return static_cast<uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::steady_clock::now().time_since_epoch())
            .count());
}

[[maybe_unused]] uint64_t thread_key() noexcept {
    return std::hash<std::thread::id>{}(std::this_thread::get_id());
}

}  // namespace

Runtime::Runtime(const RuntimeConfig& cfg)
    : cfg_(cfg), pool_(cfg.buffer_count, std::min(cfg.buffer_size, kMaxPayload)) {
    cfg_.buffer_size = std::min(cfg.buffer_size, kMaxPayload);

    nodes_.reserve(cfg_.max_nodes);
    for (size_t n = 0; n < cfg_.max_nodes; ++n) {
        auto node = std::make_unique<Node>();
        node->index = static_cast<uint32_t>(n);
        node->pool_bits = std::make_unique<LockFreeBitSet>(cfg_.requests_per_node);
        node->pool.reserve(cfg_.requests_per_node);
        for (size_t r = 0; r < cfg_.requests_per_node; ++r) {
            node->pool.push_back(std::make_unique<Request>());
        }
        node->endpoints.reserve(cfg_.max_endpoints_per_node);
        for (size_t e = 0; e < cfg_.max_endpoints_per_node; ++e) {
            auto ep = std::make_unique<Endpoint>();
            ep->owner = node.get();
            ep->entries = std::vector<QueueEntry>(cfg_.entries_per_endpoint);
            for (auto& group : ep->rings) {
                group = std::vector<ProducerSlot>(cfg_.max_producers_per_endpoint);
                for (auto& slot : group) {
                    slot.ring = make_ring(cfg_.ring_capacity);
                }
            }
            node->endpoints.push_back(std::move(ep));
        }
        nodes_.push_back(std::move(node));
    }

    channels_.reserve(cfg_.max_channels);
    for (size_t c = 0; c < cfg_.max_channels; ++c) {
        auto chan = std::make_unique<ChannelSlot>();
        chan->index = static_cast<uint32_t>(c);
        channels_.push_back(std::move(chan));
    }
}

Runtime::~Runtime() = default;

std::unique_ptr<ItemRing> Runtime::make_ring(size_t capacity) {
    if (cfg_.backend == Backend::Locked) {
        return std::make_unique<RwGuardedQueue>(capacity, global_lock_);
    }
    return std::make_unique<NbbRing>(capacity);
}

// ------------------------------------------------------------- transitions

bool Runtime::request_transition(Request& r, RequestState from, RequestState to) noexcept {
    uint32_t f = static_cast<uint32_t>(from);
    uint32_t t = static_cast<uint32_t>(to);
    assert(kLegalRequestEdges & edge_bit(f, t));
    uint32_t expected = f;
    if (!r.state.compare_exchange_strong(expected, t, std::memory_order_seq_cst)) {
        return false;
    }
    req_edges_.fetch_add(0);  // full fence semantics already via seq_cst CAS
    // Record the edge; fetch_or on the mask.
    uint64_t bit = edge_bit(f, t);
    uint64_t cur = req_edges_.load();
    while (!(cur & bit)) {
        CasResult cr = req_edges_.compare_and_swap(cur, cur | bit);
        if (cr.succeeded) break;
        cur = cr.observed;
    }
    if (to == RequestState::Free) {
        request_release(r);
    }
    return true;
}

bool Runtime::entry_transition(QueueEntry& e, EntryState from, EntryState to) noexcept {
    uint32_t f = static_cast<uint32_t>(from);
    uint32_t t = static_cast<uint32_t>(to);
    assert(kLegalEntryEdges & edge_bit(f, t));
    uint32_t expected = f;
    if (!e.state.compare_exchange_strong(expected, t, std::memory_order_seq_cst)) {
        return false;
    }
    uint64_t bit = edge_bit(f, t);
    uint64_t cur = entry_edges_.load();
    while (!(cur & bit)) {
        CasResult cr = entry_edges_.compare_and_swap(cur, cur | bit);
        if (cr.succeeded) break;
        cur = cr.observed;
    }
    return true;
}

// ------------------------------------------------------------------ nodes

Node* Runtime::find_node(uint32_t domain, uint32_t node) noexcept {
    uint64_t key = (uint64_t{domain} + 1) << 32 | (uint64_t{node} + 1);
    for (auto& n : nodes_) {
        if (n->key.load() == key) return n.get();
    }
    return nullptr;
}

const Node* Runtime::find_node(uint32_t domain, uint32_t node) const noexcept {
    return const_cast<Runtime*>(this)->find_node(domain, node);
}

Result<NodeHandle> Runtime::node_init(uint32_t domain, uint32_t node) {
    uint64_t key = (uint64_t{domain} + 1) << 32 | (uint64_t{node} + 1);

    for (auto& n : nodes_) {
        if ((n->key.load() & ~Node::kClaimingBit) == key) {
            return {Status::AlreadyInitialized, 0};
        }
    }

    for (auto& n : nodes_) {
        uint64_t expected = 0;
        if (!n->key.compare_exchange_strong(expected, key | Node::kClaimingBit)) {
            if ((expected & ~Node::kClaimingBit) == key) {
                return {Status::AlreadyInitialized, 0};
            }
            continue;
        }
        // Claimed. Resolve duplicate claims deterministically: the lowest
        // slot index wins; a finalized duplicate always wins.
        for (auto& other : nodes_) {
            if (other.get() == n.get()) continue;
            uint64_t ok = other->key.load();
            if ((ok & ~Node::kClaimingBit) != key) continue;
            bool other_final = !(ok & Node::kClaimingBit);
            if (other_final || other->index < n->index) {
                n->key.store(0);
                return {Status::AlreadyInitialized, 0};
            }
        }
        n->domain = domain;
        n->node_id = node;
        n->key.store(key);
        uint32_t gen = n->gen.load();
        return {Status::Ok, (uint64_t{gen} << 32) | (n->index + 1)};
    }
    return {Status::Limit, 0};
}

Status Runtime::node_finalize(NodeHandle h) {
    uint32_t idx = static_cast<uint32_t>(h & 0xFFFFFFFFu);
    uint32_t gen = static_cast<uint32_t>(h >> 32);
    if (idx == 0 || idx > nodes_.size()) return Status::NodeNotInitialized;
    Node& n = *nodes_[idx - 1];
    if (!n.live() || n.gen.load() != gen) return Status::NodeNotInitialized;

    for (auto& req : n.pool) {
        uint32_t s = req->state.load();
        if (s == static_cast<uint32_t>(RequestState::Valid) ||
            s == static_cast<uint32_t>(RequestState::Received)) {
            return Status::Busy;
        }
    }

    for (auto& ep : n.endpoints) {
        ep->port_key.store(0);
        ep->connected_send.store(0);
        ep->connected_recv.store(0);
        ep->consumer_tid.store(0);
        for (auto& entry : ep->entries) {
            entry.state.store(0);
            entry.buffer = kInvalidIndex;
        }
        for (auto& group : ep->rings) {
            for (auto& slot : group) {
                slot.key.store(0);
                slot.ring->reset();
            }
        }
        for (auto& hint : ep->rr) hint.store(0);
    }
    for (auto& req : n.pool) {
        req->state.store(0);
        req->gen.fetch_add(1);
    }
    n.pool_bits->reset();
    n.gen.fetch_add(1);
    n.key.store(0);
    return Status::Ok;
}

// -------------------------------------------------------------- endpoints

Result<EndpointId> Runtime::create_endpoint(NodeHandle h, uint32_t port) {
    uint32_t idx = static_cast<uint32_t>(h & 0xFFFFFFFFu);
    uint32_t gen = static_cast<uint32_t>(h >> 32);
    if (idx == 0 || idx > nodes_.size()) return {Status::NodeNotInitialized, {}};
    Node& n = *nodes_[idx - 1];
    if (!n.live() || n.gen.load() != gen) return {Status::NodeNotInitialized, {}};

    uint32_t key = port + 1;
    for (auto& ep : n.endpoints) {
        if ((ep->port_key.load() & ~Endpoint::kClaimingBit) == key) {
            return {Status::PortInUse, {}};
        }
    }

    for (size_t i = 0; i < n.endpoints.size(); ++i) {
        Endpoint& ep = *n.endpoints[i];
        uint32_t expected = 0;
        if (!ep.port_key.compare_exchange_strong(expected, key | Endpoint::kClaimingBit)) {
            if ((expected & ~Endpoint::kClaimingBit) == key) return {Status::PortInUse, {}};
            continue;
        }
        for (size_t j = 0; j < n.endpoints.size(); ++j) {
            if (j == i) continue;
            uint32_t ok = n.endpoints[j]->port_key.load();
            if ((ok & ~Endpoint::kClaimingBit) != key) continue;
            bool other_final = !(ok & Endpoint::kClaimingBit);
            if (other_final || j < i) {
                ep.port_key.store(0);
                return {Status::PortInUse, {}};
            }
        }
        // Fresh state for reuse after a previous finalize/close.
        ep.connected_send.store(0);
        ep.connected_recv.store(0);
        ep.consumer_tid.store(0);
        for (auto& entry : ep.entries) {
            entry.state.store(0);
            entry.buffer = kInvalidIndex;
        }
        for (auto& group : ep.rings) {
            for (auto& slot : group) {
                slot.key.store(0);
                slot.ring->reset();
            }
        }
        ep.port_key.store(key);
        return {Status::Ok, EndpointId{n.domain, n.node_id, port}};
    }
    return {Status::Limit, {}};
}

Endpoint* Runtime::find_endpoint(const EndpointId& id) noexcept {
    Node* n = find_node(id.domain, id.node);
    if (!n) return nullptr;
    uint32_t key = id.port + 1;
    for (auto& ep : n->endpoints) {
        if (ep->port_key.load() == key) return ep.get();
    }
    return nullptr;
}

// --------------------------------------------------------------- requests

Result<ReqHandle> Runtime::request_alloc(Node& node) {
    auto idx = node.pool_bits->acquire();
    if (!idx) return {Status::Limit, 0};
    Request& r = *node.pool[*idx];
    bool ok = request_transition(r, RequestState::Free, RequestState::Valid);
    assert(ok && "pool bit ownership implies Free state");
    (void)ok;
    r.is_send = false;
    r.kind = TrafficKind::Message;
    r.priority = 0;
    r.stage = SendStage::InRing;
    r.txid = 0;
    r.buffer = kInvalidIndex;
    r.buffer_len = 0;
    r.entry_index = kInvalidIndex;
    r.src = nullptr;
    r.dst = nullptr;
    r.chan = nullptr;
    r.ring = nullptr;
    uint64_t handle = pack_req(node.index, static_cast<uint32_t>(*idx), r.gen.load());
    r.self = handle;
    return {Status::Ok, handle};
}

Request* Runtime::resolve_request(ReqHandle h) noexcept {
    uint32_t node_idx = static_cast<uint32_t>(h >> 48);
    uint32_t req_idx = static_cast<uint32_t>((h >> 32) & 0xFFFFu);
    uint32_t gen = static_cast<uint32_t>(h & 0xFFFFFFFFu);
    if (node_idx == 0 || node_idx > nodes_.size()) return nullptr;
    Node& n = *nodes_[node_idx - 1];
    if (req_idx >= n.pool.size()) return nullptr;
    Request& r = *n.pool[req_idx];
    if (r.gen.load() != gen) return nullptr;
    return &r;
}

void Runtime::request_release(Request& r) noexcept {
    if (r.chan) {
        r.chan->inflight.fetch_sub(1);
    }
    uint32_t node_idx = static_cast<uint32_t>(r.self >> 48) - 1;
    uint32_t req_idx = static_cast<uint32_t>((r.self >> 32) & 0xFFFFu);
    r.gen.fetch_add(1);
    nodes_[node_idx]->pool_bits->release(req_idx);
}

// --------------------------------------------------------------- messages

ItemRing* Runtime::claim_producer_ring(Endpoint& dst, uint32_t priority, uint64_t producer_key) {
    auto& group = dst.rings[priority];
    for (auto& slot : group) {
        uint64_t k = slot.key.load();
        if (k == producer_key) return slot.ring.get();
        if (k == 0) {
            uint64_t expected = 0;
            if (slot.key.compare_exchange_strong(expected, producer_key)) {
                return slot.ring.get();
            }
            if (expected == producer_key) return slot.ring.get();
        }
    }
    return nullptr;
}

QueueEntry* Runtime::reserve_entry(Endpoint& ep, uint32_t& index_out) noexcept {
    for (size_t i = 0; i < ep.entries.size(); ++i) {
        QueueEntry& e = ep.entries[i];
        if (e.state.load() != static_cast<uint32_t>(EntryState::Free)) continue;
        if (entry_transition(e, EntryState::Free, EntryState::Reserved)) {
            index_out = static_cast<uint32_t>(i);
            return &e;
        }
    }
    return nullptr;
}

Result<ReqHandle> Runtime::msg_send(const EndpointId& from, const EndpointId& to,
                                    std::span<const uint8_t> payload,
                                    uint32_t priority, uint64_t txid) {
    if (priority >= kPriorities) return {Status::InvalidOperation, 0};
    Endpoint* src = find_endpoint(from);
    Endpoint* dst = find_endpoint(to);
    if (!src || !dst) return {Status::NoSuchEndpoint, 0};
    if (payload.size() > pool_.buffer_size()) return {Status::TooLarge, 0};

    ItemRing* ring = claim_producer_ring(*dst, priority,
                                         pack_endpoint_key(from.domain, from.node, from.port));
    if (!ring) return {Status::Limit, 0};

    auto buf = pool_.alloc();
    if (!buf) return {Status::Exhausted, 0};
    if (!payload.empty()) {
        std::memcpy(pool_.data(*buf), payload.data(), payload.size());
    }

    auto req = request_alloc(*src->owner);
    if (!req.ok()) {
        pool_.free(*buf);
        return req;
    }
    Request& r = *resolve_request(req.value);
    r.is_send = true;
    r.kind = TrafficKind::Message;
    r.priority = static_cast<uint8_t>(priority);
    r.txid = txid;
    r.buffer = *buf;
    r.buffer_len = static_cast<uint32_t>(payload.size());
    r.dst = dst;
    r.ring = ring;
    r.stage = SendStage::NeedEntry;

    progress_send(r);
    return req;
}

Result<ReqHandle> Runtime::msg_recv(const EndpointId& ep_id) {
    Endpoint* ep = find_endpoint(ep_id);
    if (!ep) return {Status::NoSuchEndpoint, 0};
#ifndef NDEBUG
    uint64_t tid = thread_key();
    uint64_t expected = 0;
    if (!ep->consumer_tid.compare_exchange_strong(expected, tid)) {
        assert(expected == tid && "endpoint consumer role is single-owner");
    }
#endif
    auto req = request_alloc(*ep->owner);
    if (!req.ok()) return req;
    Request& r = *resolve_request(req.value);
    r.is_send = false;
    r.kind = TrafficKind::Message;
    r.src = ep;
    return req;
}

void Runtime::progress_send(Request& r) noexcept {
    Endpoint* recv_ep = r.chan ? r.chan->recv_ep : r.dst;
    if (r.stage == SendStage::NeedEntry) {
        uint32_t idx = kInvalidIndex;
        QueueEntry* e = reserve_entry(*recv_ep, idx);
        if (!e) return;  // backpressure: retry from wait()
        e->buffer = r.buffer;
        e->length = r.buffer_len;
        e->priority = r.priority;
        e->txid = r.txid;
        e->sender_req = r.self;
        bool ok = entry_transition(*e, EntryState::Reserved, EntryState::Allocated);
        assert(ok);
        (void)ok;
        r.entry_index = idx;
        r.stage = SendStage::NeedInsert;
    }
    if (r.stage == SendStage::NeedInsert) {
        RingItem item{r.entry_index, r.self};
        for (unsigned spin = 0;; ++spin) {
            InsertStatus st = r.ring->insert(item);
            if (st == InsertStatus::Ok) break;
            if (st == InsertStatus::Full) return;  // yield path
            if (spin >= cfg_.spin_bound) return;   // escalate to yield path
        }
        r.stage = SendStage::InRing;
        // The consumer may already have completed us between the insert and
        // this transition; a failed CAS then just means Completed.
        request_transition(r, RequestState::Valid, RequestState::Received);
    }
}

void Runtime::complete_sender(uint64_t handle) noexcept {
    Request* s = resolve_request(handle);
    if (!s) return;
    for (;;) {
        uint32_t st = s->state.load();
        if (st == static_cast<uint32_t>(RequestState::Valid)) {
            if (request_transition(*s, RequestState::Valid, RequestState::Completed)) return;
        } else if (st == static_cast<uint32_t>(RequestState::Received)) {
            if (request_transition(*s, RequestState::Received, RequestState::Completed)) return;
        } else {
            return;  // already completed or gone
        }
    }
}

bool Runtime::consume_from(Request& r, Endpoint& recv_ep, ItemRing& ring,
                           Completion& out) noexcept {
    // Claim the request before consuming so a racing cancel can never strand
    // a message: if the claim loses, the item stays queued.
    if (!request_transition(r, RequestState::Valid, RequestState::Completed)) {
        return false;
    }
    RingItem item;
    ReadStatus rs = ring.read(item);
    assert(rs == ReadStatus::Ok && "single consumer saw occupancy >= 1");
    (void)rs;

    QueueEntry& e = recv_ep.entries[item.a];
    bool ok = entry_transition(e, EntryState::Allocated, EntryState::Received);
    assert(ok && "producer published the entry before inserting");
    (void)ok;

    out.txid = e.txid;
    out.priority = e.priority;
    out.length = e.length;
    if (r.kind == TrafficKind::Packet) {
        out.buffer = e.buffer;  // ownership moves to the caller
    } else {
        if (e.length > 0) {
            std::memcpy(out.payload, pool_.data(e.buffer), e.length);
        }
        pool_.free(e.buffer);
        out.buffer = kInvalidIndex;
    }
    complete_sender(e.sender_req);
    e.buffer = kInvalidIndex;
    ok = entry_transition(e, EntryState::Received, EntryState::Free);
    assert(ok);
    (void)ok;
    return true;
}

bool Runtime::progress_recv(Request& r, Completion& out) noexcept {
    if (r.chan) {
        ItemRing& ring = *r.chan->ring;
        for (unsigned spin = 0;; ++spin) {
            RingAvail a = ring.available();
            if (a == RingAvail::Item) {
                return consume_from(r, *r.chan->recv_ep, ring, out);
            }
            if (a == RingAvail::Empty || spin >= cfg_.spin_bound) return false;
            // EmptyButProducerInserting: retry immediately, bounded.
        }
    }

    Endpoint& ep = *r.src;
    for (uint32_t pri = 0; pri < kPriorities; ++pri) {
        auto& group = ep.rings[pri];
        uint32_t start = ep.rr[pri].load();
        for (size_t k = 0; k < group.size(); ++k) {
            ProducerSlot& slot = group[(start + k) % group.size()];
            if (slot.key.load() == 0) continue;
            ItemRing& ring = *slot.ring;
            for (unsigned spin = 0;; ++spin) {
                RingAvail a = ring.available();
                if (a == RingAvail::Item) {
                    ep.rr[pri].store(static_cast<uint32_t>((start + k + 1) % group.size()));
                    return consume_from(r, ep, ring, out);
                }
                if (a == RingAvail::Empty || spin >= cfg_.spin_bound) break;
            }
        }
    }
    return false;
}

// --------------------------------------------------------------- channels

ChannelSlot* Runtime::resolve_channel(ChanHandle h) noexcept {
    uint32_t idx = static_cast<uint32_t>(h & 0xFFFFFFFFu);
    uint32_t gen = static_cast<uint32_t>(h >> 32);
    if (idx == 0 || idx > channels_.size()) return nullptr;
    ChannelSlot& c = *channels_[idx - 1];
    if (c.gen.load() != gen) return nullptr;
    return &c;
}

Result<ChanHandle> Runtime::channel_open(TrafficKind kind, const EndpointId& send,
                                         const EndpointId& recv, size_t ring_capacity) {
    if (kind == TrafficKind::Message) return {Status::InvalidOperation, 0};
    Endpoint* send_ep = find_endpoint(send);
    Endpoint* recv_ep = find_endpoint(recv);
    if (!send_ep || !recv_ep) return {Status::NoSuchEndpoint, 0};

    for (auto& c : channels_) {
        uint32_t expected = ChannelSlot::Free;
        if (!c->state.compare_exchange_strong(expected, ChannelSlot::Claiming)) continue;

        uint32_t chan_ref = c->index + 1;
        uint32_t want = 0;
        if (!send_ep->connected_send.compare_exchange_strong(want, chan_ref)) {
            c->state.store(ChannelSlot::Free);
            return {Status::AlreadyConnected, 0};
        }
        want = 0;
        if (!recv_ep->connected_recv.compare_exchange_strong(want, chan_ref)) {
            send_ep->connected_send.store(0);
            c->state.store(ChannelSlot::Free);
            return {Status::AlreadyConnected, 0};
        }

        c->kind = kind;
        c->send_ep = send_ep;
        c->recv_ep = recv_ep;
        c->scalar_width.store(0);
        c->inflight.store(0);
        c->ring = make_ring(ring_capacity ? ring_capacity : cfg_.ring_capacity);
        uint32_t gen = c->gen.load();
        c->state.store(ChannelSlot::Open);
        return {Status::Ok, (uint64_t{gen} << 32) | chan_ref};
    }
    return {Status::Limit, 0};
}

Status Runtime::channel_close(ChanHandle h) {
    ChannelSlot* c = resolve_channel(h);
    if (!c || c->state.load() != ChannelSlot::Open) return Status::NotConnected;
    if (c->inflight.load() != 0 || c->ring->occupancy() != 0) return Status::Busy;
    c->send_ep->connected_send.store(0);
    c->recv_ep->connected_recv.store(0);
    c->gen.fetch_add(1);
    c->state.store(ChannelSlot::Free);
    return Status::Ok;
}

Result<ReqHandle> Runtime::pkt_send(ChanHandle h, std::span<const uint8_t> payload,
                                    uint64_t txid) {
    ChannelSlot* c = resolve_channel(h);
    if (!c || c->state.load() != ChannelSlot::Open) return {Status::NotConnected, 0};
    if (c->kind != TrafficKind::Packet) return {Status::InvalidOperation, 0};
    if (payload.size() > pool_.buffer_size()) return {Status::TooLarge, 0};

    // The caller keeps its send buffer; the receive side gets a pool buffer.
    auto buf = pool_.alloc();
    if (!buf) return {Status::Exhausted, 0};
    if (!payload.empty()) {
        std::memcpy(pool_.data(*buf), payload.data(), payload.size());
    }

    auto req = request_alloc(*c->send_ep->owner);
    if (!req.ok()) {
        pool_.free(*buf);
        return req;
    }
    Request& r = *resolve_request(req.value);
    r.is_send = true;
    r.kind = TrafficKind::Packet;
    r.txid = txid;
    r.buffer = *buf;
    r.buffer_len = static_cast<uint32_t>(payload.size());
    r.chan = c;
    r.ring = c->ring.get();
    r.stage = SendStage::NeedEntry;
    c->inflight.fetch_add(1);

    progress_send(r);
    return req;
}

Result<ReqHandle> Runtime::pkt_recv(ChanHandle h) {
    ChannelSlot* c = resolve_channel(h);
    if (!c || c->state.load() != ChannelSlot::Open) return {Status::NotConnected, 0};
    if (c->kind != TrafficKind::Packet) return {Status::InvalidOperation, 0};

    auto req = request_alloc(*c->recv_ep->owner);
    if (!req.ok()) return req;
    Request& r = *resolve_request(req.value);
    r.is_send = false;
    r.kind = TrafficKind::Packet;
    r.chan = c;
    c->inflight.fetch_add(1);
    return req;
}

Status Runtime::pkt_buffer_release(ChanHandle h, uint32_t buffer) {
    ChannelSlot* c = resolve_channel(h);
    if (!c) return Status::NotConnected;
    if (!pool_.live(buffer)) {
        assert(false && "releasing a buffer that is not allocated");
        return Status::InvalidOperation;
    }
    pool_.free(buffer);
    return Status::Ok;
}

const uint8_t* Runtime::buffer_data(uint32_t buffer) const noexcept {
    return pool_.data(buffer);
}

Status Runtime::scalar_send(ChanHandle h, uint64_t value, uint32_t width) {
    ChannelSlot* c = resolve_channel(h);
    if (!c || c->state.load() != ChannelSlot::Open) return Status::NotConnected;
    if (c->kind != TrafficKind::Scalar) return Status::InvalidOperation;
    if (width != 8 && width != 16 && width != 32 && width != 64) return Status::WidthMismatch;
    if (width < 64 && (value >> width) != 0) return Status::WidthMismatch;

    uint32_t expected = 0;
    if (!c->scalar_width.compare_exchange_strong(expected, width)) {
        if (expected != width) return Status::WidthMismatch;
    }

    RingItem item{value, width};
    for (unsigned spin = 0;; ++spin) {
        InsertStatus st = c->ring->insert(item);
        if (st == InsertStatus::Ok) return Status::Ok;
        if (st == InsertStatus::Full || spin >= cfg_.spin_bound) return Status::Full;
    }
}

Result<uint64_t> Runtime::scalar_recv(ChanHandle h, uint32_t width) {
    ChannelSlot* c = resolve_channel(h);
    if (!c || c->state.load() != ChannelSlot::Open) return {Status::NotConnected, 0};
    if (c->kind != TrafficKind::Scalar) return {Status::InvalidOperation, 0};
    uint32_t cw = c->scalar_width.load();
    if (cw == 0) return {Status::Empty, 0};
    if (cw != width) return {Status::WidthMismatch, 0};

    for (unsigned spin = 0;; ++spin) {
        RingItem item;
        ReadStatus st = c->ring->read(item);
        if (st == ReadStatus::Ok) return {Status::Ok, item.a};
        if (st == ReadStatus::Empty || spin >= cfg_.spin_bound) return {Status::Empty, 0};
    }
}

// ------------------------------------------------------------------- wait

WaitOutcome Runtime::wait(ReqHandle h, int64_t timeout_ns) {
    WaitOutcome out;
    Request* r = resolve_request(h);
    if (!r) {
        out.status = Status::UnknownRequest;
        return out;
    }
    uint64_t deadline = timeout_ns > 0 ? now_ns() + static_cast<uint64_t>(timeout_ns) : 0;

    for (;;) {
        if (r->is_send) {
            if (r->stage != SendStage::InRing) progress_send(*r);
        } else {
            uint32_t st = r->state.load();
            if (st == static_cast<uint32_t>(RequestState::Valid)) {
                progress_recv(*r, out.completion);
            }
        }

        if (r->gen.load() != static_cast<uint32_t>(h & 0xFFFFFFFFu)) {
            out.status = Status::UnknownRequest;  // freed underneath us
            return out;
        }
        uint32_t st = r->state.load();
        if (st == static_cast<uint32_t>(RequestState::Completed)) {
            if (r->is_send) {
                out.completion.txid = r->txid;
                out.completion.length = r->buffer_len;
            }
            request_transition(*r, RequestState::Completed, RequestState::Free);
            out.status = Status::Completed;
            return out;
        }
        if (st == static_cast<uint32_t>(RequestState::Cancelled)) {
            out.status = Status::Cancelled;
            return out;
        }

        if (timeout_ns == 0) {
            out.status = Status::Pending;
            return out;
        }
        if (now_ns() >= deadline) {
            out.status = Status::Timeout;
            return out;
        }
        std::this_thread::yield();
    }
}

Status Runtime::cancel(ReqHandle h) {
    Request* r = resolve_request(h);
    if (!r) return Status::UnknownRequest;
    if (r->is_send) return Status::InvalidOperation;

    if (request_transition(*r, RequestState::Valid, RequestState::Cancelled)) {
        request_transition(*r, RequestState::Cancelled, RequestState::Free);
        return Status::Ok;
    }
    uint32_t st = r->state.load();
    if (st == static_cast<uint32_t>(RequestState::Completed)) return Status::TooLate;
    return Status::UnknownRequest;
}

size_t Runtime::request_free_count(NodeHandle h) const {
    uint32_t idx = static_cast<uint32_t>(h & 0xFFFFFFFFu);
    if (idx == 0 || idx > nodes_.size()) return 0;
    const Node& n = *nodes_[idx - 1];
    return n.pool.size() - n.pool_bits->popcount();
}

}  // namespace mcx
