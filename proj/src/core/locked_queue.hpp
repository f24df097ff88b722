#pragma once

#include <cassert>
#include <cstdint>
#include <memory>
#include <mutex>
#include <thread>

#include "core/ring.hpp"

namespace mcx {

// The single process-wide exclusive lock that guards every reader/writer
// lock state change in the locked backend. A writer holds it for the whole
// write, so at most one write anywhere in the runtime proceeds at a time.
class GlobalWriteLock {
public:
    std::mutex m;

    void note_writer_entered() noexcept {
        int inside = ++writers_inside_;
        assert(inside == 1);
        if (inside > max_inside_) max_inside_ = inside;
    }
    void note_writer_leaving() noexcept { --writers_inside_; }

    // Diagnostics: maximum concurrent writers ever observed (must stay 1).
    int max_writers_observed() const noexcept { return max_inside_; }

private:
    int writers_inside_ = 0;  // mutated only with m held
    int max_inside_ = 0;
};

// User-mode reader/writer lock whose state lives behind the global lock.
// Readers take the global lock briefly to enter and leave; a writer keeps
// it for the entire critical section.
class UserRwLock {
public:
    explicit UserRwLock(GlobalWriteLock& g) noexcept : global_(g) {}

    void lock_read() noexcept {
        for (;;) {
            global_.m.lock();
            if (!writer_) {
                ++readers_;
                global_.m.unlock();
                return;
            }
            global_.m.unlock();
            std::this_thread::yield();
        }
    }

    void unlock_read() noexcept {
        std::lock_guard<std::mutex> g(global_.m);
        --readers_;
    }

    void lock_write() noexcept {
        for (;;) {
            global_.m.lock();
            if (!writer_ && readers_ == 0) {
                writer_ = true;
                global_.note_writer_entered();
                return;  // global lock stays held until unlock_write
            }
            global_.m.unlock();
            std::this_thread::yield();
        }
    }

    void unlock_write() noexcept {
        global_.note_writer_leaving();
        writer_ = false;
        global_.m.unlock();
    }

private:
    GlobalWriteLock& global_;
    int readers_ = 0;
    bool writer_ = false;
};

// Baseline FIFO: a plain circular queue guarded by the rw lock above. Same
// slot layout as the NBB ring so the payload copy cost is identical; only
// the synchronization differs. Never reports the BUT_* states.
class RwGuardedQueue final : public ItemRing {
public:
    RwGuardedQueue(size_t capacity, GlobalWriteLock& global);

    InsertStatus insert(const RingItem& item) noexcept override;
    ReadStatus read(RingItem& out) noexcept override;
    size_t occupancy() const noexcept override;
    RingAvail available() const noexcept override;
    void reset() noexcept override;

private:
    size_t capacity_;
    mutable UserRwLock lock_;
    std::unique_ptr<RingItem[]> slots_;
    uint64_t head_ = 0;  // next slot to read
    uint64_t count_ = 0;
};

}  // namespace mcx
