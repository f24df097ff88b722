#pragma once

#include <memory>

#include "core/atomics.hpp"
#include "core/nbw.hpp"  // ProbeFn
#include "core/ring.hpp"

namespace mcx {

// Non-blocking buffer: lock-free SPSC circular FIFO built from two atomic
// counters. The update counter (UC) belongs to the producer, the acknowledge
// counter (AC) to the consumer; each is incremented once before and once
// after its operation, so an odd counter marks an operation in flight.
//
// Counter algebra (wrap-aware, capacity C):
//   UC - AC == 2C      full
//   UC - AC == 2C - 1  full, consumer mid-read of the oldest slot
//   UC - AC == 0       empty
//   UC - AC == 1       empty, producer mid-insert
// and (UC - AC)/2 committed items when both counters are even.
class NbbRing final : public ItemRing {
public:
    // Probe points (test instrumentation, see ProbeFn).
    static constexpr int kProbeInsertLoad = 0;  // before loading AC
    static constexpr int kProbeInsertInc1 = 1;  // before UC -> odd
    static constexpr int kProbeInsertInc2 = 2;  // before UC -> even
    static constexpr int kProbeReadLoad = 3;    // before loading UC
    static constexpr int kProbeReadInc1 = 4;    // before AC -> odd
    static constexpr int kProbeReadInc2 = 5;    // before AC -> even

    explicit NbbRing(size_t capacity);  // capacity must be a power of two

    InsertStatus insert(const RingItem& item) noexcept override;
    ReadStatus read(RingItem& out) noexcept override;
    size_t occupancy() const noexcept override;
    RingAvail available() const noexcept override;
    void reset() noexcept override;

    size_t capacity() const noexcept { return capacity_; }
    uint64_t update_count() const noexcept { return uc_.load(); }
    uint64_t ack_count() const noexcept { return ac_.load(); }

    void set_probe(ProbeFn fn, void* ctx) noexcept {
        probe_ = fn;
        probe_ctx_ = ctx;
    }

private:
    void probe(int point) const noexcept {
        if (probe_) probe_(probe_ctx_, point);
    }

    size_t capacity_;
    uint64_t mask_;
    AtomicWord uc_;
    AtomicWord ac_;
    std::unique_ptr<RingItem[]> slots_;
    ProbeFn probe_ = nullptr;
    void* probe_ctx_ = nullptr;
};

}  // namespace mcx
