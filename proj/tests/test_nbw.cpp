#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstring>
#include <random>
#include <semaphore>
#include <thread>
#include <vector>

#include "core/nbw.hpp"

using mcx::StateCell;

namespace {

std::vector<uint8_t> pattern(uint64_t seq, size_t len) {
    std::vector<uint8_t> p(len);
    for (size_t i = 0; i < len; ++i) {
        p[i] = static_cast<uint8_t>((seq * 131 + i * 7 + 13) & 0xFF);
    }
    return p;
}

// Independent FNV-1a oracle for the checksum the writer stores.
uint32_t fnv1a(const std::vector<uint8_t>& data) {
    uint32_t h = 2166136261u;
    for (uint8_t b : data) {
        h ^= b;
        h *= 16777619u;
    }
    return h;
}

}  // namespace

TEST_CASE("fresh cell reads Empty") {
    StateCell cell(2, 32);
    std::vector<uint8_t> out(32);
    auto r = cell.read(out);
    CHECK(r.status == StateCell::ReadStatus::Empty);
    CHECK(cell.version() == 0);
}

TEST_CASE("write then read round-trips payload and checksum") {
    StateCell cell(2, 32);
    auto w = cell.writer();
    auto payload = pattern(1, 20);
    REQUIRE(w.write(payload) == StateCell::WriteStatus::Ok);
    CHECK(cell.version() == 2);

    std::vector<uint8_t> out(32);
    auto r = cell.read(out);
    REQUIRE(r.status == StateCell::ReadStatus::Ok);
    CHECK(r.length == payload.size());
    CHECK(r.retries == 0);
    CHECK(std::memcmp(out.data(), payload.data(), payload.size()) == 0);
    CHECK(r.checksum == fnv1a(payload));
    CHECK(StateCell::checksum(payload) == fnv1a(payload));
}

TEST_CASE("version advances by two per write and readers see the newest slot") {
    StateCell cell(3, 16);
    auto w = cell.writer();
    for (uint64_t seq = 1; seq <= 10; ++seq) {
        REQUIRE(w.write(pattern(seq, 10)) == StateCell::WriteStatus::Ok);
        CHECK(cell.version() == 2 * seq);
        std::vector<uint8_t> out(16);
        auto r = cell.read(out);
        REQUIRE(r.status == StateCell::ReadStatus::Ok);
        auto expect = pattern(seq, 10);
        CHECK(std::memcmp(out.data(), expect.data(), 10) == 0);
    }
}

TEST_CASE("oversized payload is rejected without touching the version") {
    StateCell cell(2, 8);
    auto w = cell.writer();
    CHECK(w.write(pattern(1, 9)) == StateCell::WriteStatus::TooLarge);
    CHECK(cell.version() == 0);
}

TEST_CASE("a stalled writer forces Stale after bounded retries") {
    StateCell cell(1, 16);  // one slot: any in-flight write collides
    auto w = cell.writer();
    REQUIRE(w.write(pattern(1, 8)) == StateCell::WriteStatus::Ok);

    struct Gate {
        std::binary_semaphore reached{0};
        std::binary_semaphore release{0};
        std::atomic<int> retries{0};
    } gate;
    cell.set_probe(
        [](void* ctx, int point) {
            auto* g = static_cast<Gate*>(ctx);
            if (point == StateCell::kProbeWriteMid) {
                g->reached.release();
                g->release.acquire();  // hold the version odd
            } else if (point == StateCell::kProbeReadRetry) {
                g->retries.fetch_add(1);
            }
        },
        &gate);

    std::thread writer([&] { w.write(pattern(2, 8)); });
    gate.reached.acquire();  // version is odd right now

    std::vector<uint8_t> out(16);
    auto r = cell.read(out, 3);
    CHECK(r.status == StateCell::ReadStatus::Stale);
    CHECK(r.retries == 3);
    CHECK(gate.retries.load() == 3);

    gate.release.release();
    writer.join();
    cell.set_probe(nullptr, nullptr);

    auto ok = cell.read(out);
    REQUIRE(ok.status == StateCell::ReadStatus::Ok);
    auto expect = pattern(2, 8);
    CHECK(std::memcmp(out.data(), expect.data(), 8) == 0);
}

TEST_CASE("concurrent writer/readers: successful reads are never corrupt") {
    constexpr uint64_t kWrites = 200000;
    StateCell cell(1, 64);  // single slot maximizes collisions
    auto w = cell.writer();

    std::atomic<bool> done{false};
    std::atomic<uint64_t> ok_reads{0};
    std::atomic<uint64_t> bad_reads{0};

    auto reader = [&] {
        std::vector<uint8_t> out(64);
        while (!done.load(std::memory_order_relaxed)) {
            auto r = cell.read(out, 8);
            if (r.status != StateCell::ReadStatus::Ok) continue;
            // A torn copy would break the stored checksum w.h.p.
            std::vector<uint8_t> got(out.begin(), out.begin() + r.length);
            if (fnv1a(got) == r.checksum) {
                ok_reads.fetch_add(1, std::memory_order_relaxed);
            } else {
                bad_reads.fetch_add(1, std::memory_order_relaxed);
            }
        }
    };
    std::thread r1(reader), r2(reader);

    std::mt19937_64 rng(42);
    for (uint64_t seq = 1; seq <= kWrites; ++seq) {
        size_t len = 1 + rng() % 64;
        REQUIRE(w.write(pattern(seq, len)) == StateCell::WriteStatus::Ok);
    }
    // On a one-core host the writer can finish before the readers are ever
    // scheduled; keep the cell live (writer idle) until both have read it.
    while (ok_reads.load(std::memory_order_relaxed) < 2)
        std::this_thread::yield();
    done.store(true);
    r1.join();
    r2.join();

    CHECK(bad_reads.load() == 0);
    CHECK(ok_reads.load() > 0);
    CHECK(cell.version() == 2 * kWrites);
}
