#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <thread>
#include <vector>

#include "core/runtime.hpp"

using namespace mcx;

namespace {

std::vector<uint8_t> bytes(std::initializer_list<int> v) {
    std::vector<uint8_t> out;
    for (int x : v) out.push_back(static_cast<uint8_t>(x));
    return out;
}

struct TwoNodes {
    Runtime rt;
    NodeHandle n0, n1;
    EndpointId src, dst;

    explicit TwoNodes(RuntimeConfig cfg = {}) : rt(cfg) {
        n0 = rt.node_init(0, 0).value;
        n1 = rt.node_init(0, 1).value;
        src = rt.create_endpoint(n0, 0).value;
        dst = rt.create_endpoint(n1, 0).value;
    }
};

}  // namespace

TEST_CASE("node lifecycle: init, duplicate, finalize, reuse") {
    Runtime rt;
    auto a = rt.node_init(0, 5);
    REQUIRE(a.ok());
    CHECK(rt.node_init(0, 5).status == Status::AlreadyInitialized);

    auto b = rt.node_init(1, 5);  // same node id, different domain: distinct
    REQUIRE(b.ok());

    CHECK(rt.node_finalize(a.value) == Status::Ok);
    CHECK(rt.node_finalize(a.value) == Status::NodeNotInitialized);  // stale
    CHECK(rt.node_init(0, 5).ok());  // slot is reusable
}

TEST_CASE("node table exhaustion reports Limit") {
    RuntimeConfig cfg;
    cfg.max_nodes = 2;
    Runtime rt(cfg);
    CHECK(rt.node_init(0, 0).ok());
    CHECK(rt.node_init(0, 1).ok());
    CHECK(rt.node_init(0, 2).status == Status::Limit);
}

TEST_CASE("endpoint creation and port collisions") {
    Runtime rt;
    auto n = rt.node_init(0, 0);
    auto e = rt.create_endpoint(n.value, 7);
    REQUIRE(e.ok());
    CHECK(e.value.port == 7);
    CHECK(rt.create_endpoint(n.value, 7).status == Status::PortInUse);
    CHECK(rt.create_endpoint(n.value, 8).ok());
    CHECK(rt.create_endpoint(12345, 9).status == Status::NodeNotInitialized);
}

TEST_CASE("message round trip carries payload, txid and priority") {
    TwoNodes t;
    auto payload = bytes({1, 2, 3, 4, 5});

    auto send = t.rt.msg_send(t.src, t.dst, payload, 2, 777);
    REQUIRE(send.ok());
    auto recv = t.rt.msg_recv(t.dst);
    REQUIRE(recv.ok());

    auto rw = t.rt.wait(recv.value, 0);
    REQUIRE(rw.status == Status::Completed);
    CHECK(rw.completion.txid == 777);
    CHECK(rw.completion.priority == 2);
    CHECK(rw.completion.length == payload.size());
    CHECK(std::memcmp(rw.completion.payload, payload.data(), payload.size()) == 0);

    CHECK(t.rt.wait(send.value, 0).status == Status::Completed);
}

TEST_CASE("higher priority (lower number) is drained first") {
    TwoNodes t;
    REQUIRE(t.rt.msg_send(t.src, t.dst, bytes({3}), 3, 30).ok());
    REQUIRE(t.rt.msg_send(t.src, t.dst, bytes({0}), 0, 10).ok());

    auto r1 = t.rt.msg_recv(t.dst);
    auto w1 = t.rt.wait(r1.value, 0);
    REQUIRE(w1.status == Status::Completed);
    CHECK(w1.completion.txid == 10);  // priority 0 beats earlier priority 3

    auto r2 = t.rt.msg_recv(t.dst);
    auto w2 = t.rt.wait(r2.value, 0);
    REQUIRE(w2.status == Status::Completed);
    CHECK(w2.completion.txid == 30);
}

TEST_CASE("wait semantics: Pending at zero timeout, Timeout after deadline") {
    TwoNodes t;
    auto recv = t.rt.msg_recv(t.dst);
    REQUIRE(recv.ok());
    CHECK(t.rt.wait(recv.value, 0).status == Status::Pending);
    CHECK(t.rt.wait(recv.value, 2000000).status == Status::Timeout);  // 2 ms
    CHECK(t.rt.wait(999999, 0).status == Status::UnknownRequest);
    CHECK(t.rt.cancel(recv.value) == Status::Ok);
}

TEST_CASE("cancel claims an undelivered receive and rejects the rest") {
    TwoNodes t;

    auto recv = t.rt.msg_recv(t.dst);
    CHECK(t.rt.cancel(recv.value) == Status::Ok);
    CHECK(t.rt.wait(recv.value, 0).status == Status::UnknownRequest);  // freed

    // Completed receive: too late to cancel.
    REQUIRE(t.rt.msg_send(t.src, t.dst, bytes({1}), 0, 1).ok());
    auto recv2 = t.rt.msg_recv(t.dst);
    REQUIRE(t.rt.wait(recv2.value, 0).status == Status::Completed);
    CHECK(t.rt.cancel(recv2.value) == Status::UnknownRequest);  // already freed

    // Sends cannot be cancelled.
    auto send = t.rt.msg_send(t.src, t.dst, bytes({2}), 0, 2);
    CHECK(t.rt.cancel(send.value) == Status::InvalidOperation);
}

TEST_CASE("cancelled receive does not lose the queued message") {
    TwoNodes t;
    REQUIRE(t.rt.msg_send(t.src, t.dst, bytes({9}), 0, 9).ok());

    auto r1 = t.rt.msg_recv(t.dst);
    CHECK(t.rt.cancel(r1.value) == Status::Ok);  // cancel before draining

    auto r2 = t.rt.msg_recv(t.dst);
    auto w = t.rt.wait(r2.value, 0);
    REQUIRE(w.status == Status::Completed);
    CHECK(w.completion.txid == 9);
}

TEST_CASE("oversized payload is rejected before any allocation") {
    RuntimeConfig cfg;
    cfg.buffer_size = 32;
    TwoNodes t(cfg);
    std::vector<uint8_t> big(33, 0xEE);
    CHECK(t.rt.msg_send(t.src, t.dst, big, 0, 1).status == Status::TooLarge);
    CHECK(t.rt.buffers_in_use() == 0);
    CHECK(t.rt.request_free_count(t.n0) == cfg.requests_per_node);
}

TEST_CASE("buffer exhaustion reports Exhausted and leaks nothing") {
    RuntimeConfig cfg;
    cfg.buffer_count = 2;
    TwoNodes t(cfg);
    REQUIRE(t.rt.msg_send(t.src, t.dst, bytes({1}), 0, 1).ok());
    REQUIRE(t.rt.msg_send(t.src, t.dst, bytes({2}), 0, 2).ok());
    CHECK(t.rt.msg_send(t.src, t.dst, bytes({3}), 0, 3).status ==
          Status::Exhausted);
    CHECK(t.rt.request_free_count(t.n0) == cfg.requests_per_node - 2);
}

TEST_CASE("request pool exhaustion reports Limit and frees the buffer") {
    RuntimeConfig cfg;
    cfg.requests_per_node = 2;
    TwoNodes t(cfg);
    REQUIRE(t.rt.msg_send(t.src, t.dst, bytes({1}), 0, 1).ok());
    REQUIRE(t.rt.msg_send(t.src, t.dst, bytes({2}), 0, 2).ok());
    size_t before = t.rt.buffers_in_use();
    CHECK(t.rt.msg_send(t.src, t.dst, bytes({3}), 0, 3).status == Status::Limit);
    CHECK(t.rt.buffers_in_use() == before);  // rolled back
}

TEST_CASE("scalar channel: width fixed by first send") {
    TwoNodes t;
    auto ch = t.rt.channel_open(TrafficKind::Scalar, t.src, t.dst);
    REQUIRE(ch.ok());

    CHECK(t.rt.scalar_recv(ch.value, 16).status == Status::Empty);  // no width yet
    CHECK(t.rt.scalar_send(ch.value, 300, 8) == Status::WidthMismatch);
    CHECK(t.rt.scalar_send(ch.value, 300, 12) == Status::WidthMismatch);
    CHECK(t.rt.scalar_send(ch.value, 300, 16) == Status::Ok);  // width now 16
    CHECK(t.rt.scalar_send(ch.value, 5, 32) == Status::WidthMismatch);
    CHECK(t.rt.scalar_send(ch.value, 5, 16) == Status::Ok);

    CHECK(t.rt.scalar_recv(ch.value, 32).status == Status::WidthMismatch);
    auto r1 = t.rt.scalar_recv(ch.value, 16);
    REQUIRE(r1.ok());
    CHECK(r1.value == 300);
    auto r2 = t.rt.scalar_recv(ch.value, 16);
    REQUIRE(r2.ok());
    CHECK(r2.value == 5);
    CHECK(t.rt.scalar_recv(ch.value, 16).status == Status::Empty);
    CHECK(t.rt.channel_close(ch.value) == Status::Ok);
}

TEST_CASE("packet channel hands buffers to the receiver") {
    TwoNodes t;
    auto ch = t.rt.channel_open(TrafficKind::Packet, t.src, t.dst);
    REQUIRE(ch.ok());

    auto payload = bytes({10, 20, 30});
    auto send = t.rt.pkt_send(ch.value, payload, 42);
    REQUIRE(send.ok());
    auto recv = t.rt.pkt_recv(ch.value);
    REQUIRE(recv.ok());

    auto w = t.rt.wait(recv.value, 0);
    REQUIRE(w.status == Status::Completed);
    CHECK(w.completion.txid == 42);
    CHECK(w.completion.length == 3);
    REQUIRE(w.completion.buffer != kInvalidIndex);
    const uint8_t* data = t.rt.buffer_data(w.completion.buffer);
    CHECK(std::memcmp(data, payload.data(), 3) == 0);

    CHECK(t.rt.wait(send.value, 0).status == Status::Completed);
    CHECK(t.rt.buffers_in_use() == 1);  // receiver still owns it
    CHECK(t.rt.pkt_buffer_release(ch.value, w.completion.buffer) == Status::Ok);
    CHECK(t.rt.buffers_in_use() == 0);
    CHECK(t.rt.channel_close(ch.value) == Status::Ok);
}

TEST_CASE("channel rules: connect-once, kind checks, busy close") {
    TwoNodes t;
    CHECK(t.rt.channel_open(TrafficKind::Message, t.src, t.dst).status ==
          Status::InvalidOperation);

    auto ch = t.rt.channel_open(TrafficKind::Packet, t.src, t.dst);
    REQUIRE(ch.ok());
    CHECK(t.rt.channel_open(TrafficKind::Packet, t.src, t.dst).status ==
          Status::AlreadyConnected);

    CHECK(t.rt.scalar_send(ch.value, 1, 8) == Status::InvalidOperation);
    CHECK(t.rt.scalar_recv(ch.value, 8).status == Status::InvalidOperation);

    auto send = t.rt.pkt_send(ch.value, bytes({1}), 1);
    REQUIRE(send.ok());
    CHECK(t.rt.channel_close(ch.value) == Status::Busy);  // undelivered packet

    auto recv = t.rt.pkt_recv(ch.value);
    auto w = t.rt.wait(recv.value, 0);
    REQUIRE(w.status == Status::Completed);
    t.rt.pkt_buffer_release(ch.value, w.completion.buffer);
    REQUIRE(t.rt.wait(send.value, 0).status == Status::Completed);

    CHECK(t.rt.channel_close(ch.value) == Status::Ok);
    CHECK(t.rt.channel_close(ch.value) == Status::NotConnected);  // stale handle
    CHECK(t.rt.pkt_send(ch.value, bytes({1}), 1).status == Status::NotConnected);

    // Endpoints are free again.
    CHECK(t.rt.channel_open(TrafficKind::Scalar, t.src, t.dst).ok());
}

TEST_CASE("finalize refuses while requests are in flight") {
    TwoNodes t;
    auto recv = t.rt.msg_recv(t.dst);
    REQUIRE(recv.ok());
    CHECK(t.rt.node_finalize(t.n1) == Status::Busy);
    CHECK(t.rt.cancel(recv.value) == Status::Ok);
    CHECK(t.rt.node_finalize(t.n1) == Status::Ok);
}

TEST_CASE("threaded exchange conserves every resource and every edge is legal") {
    for (Backend backend : {Backend::LockFree, Backend::Locked}) {
        CAPTURE(static_cast<int>(backend));
        RuntimeConfig cfg;
        cfg.backend = backend;
        TwoNodes t(cfg);
        constexpr uint64_t kCount = 5000;

        std::thread sender([&] {
            for (uint64_t tx = 1; tx <= kCount;) {
                auto payload = bytes({int(tx & 0xFF)});
                auto send = t.rt.msg_send(t.src, t.dst, payload, 0, tx);
                REQUIRE(send.ok());
                while (t.rt.wait(send.value, 0).status == Status::Pending) {
                    std::this_thread::yield();
                }
                ++tx;
            }
        });

        uint64_t expect = 1;
        bool in_order = true;
        while (expect <= kCount) {
            auto recv = t.rt.msg_recv(t.dst);
            REQUIRE(recv.ok());
            WaitOutcome w;
            do {
                w = t.rt.wait(recv.value, 0);
            } while (w.status == Status::Pending);
            REQUIRE(w.status == Status::Completed);
            in_order = in_order && w.completion.txid == expect;
            ++expect;
        }
        sender.join();
        CHECK(in_order);

        CHECK((t.rt.request_edge_mask() & ~Runtime::legal_request_edges()) == 0);
        CHECK((t.rt.entry_edge_mask() & ~Runtime::legal_entry_edges()) == 0);
        CHECK(t.rt.buffers_in_use() == 0);
        CHECK(t.rt.request_free_count(t.n0) == cfg.requests_per_node);
        CHECK(t.rt.request_free_count(t.n1) == cfg.requests_per_node);
        CHECK(t.rt.max_concurrent_writers() <= 1);
    }
}
