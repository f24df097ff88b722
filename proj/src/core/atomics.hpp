#pragma once

#include <atomic>
#include <cstdint>

namespace mcx {

struct CasResult {
    bool succeeded;
    uint64_t observed;
};

// Portable 64-bit atomic word. Every operation is sequentially consistent;
// relaxing individual call sites is a deliberate, measured change, not the
// default.
class AtomicWord {
public:
    AtomicWord() noexcept = default;
    explicit AtomicWord(uint64_t v) noexcept : value_(v) {}

    AtomicWord(const AtomicWord&) = delete;
    AtomicWord& operator=(const AtomicWord&) = delete;

    uint64_t load() const noexcept { return value_.load(std::memory_order_seq_cst); }

    void store(uint64_t v) noexcept { value_.store(v, std::memory_order_seq_cst); }

    // Returns the previous value; wraps modulo 2^64.
    uint64_t fetch_add(uint64_t delta) noexcept {
        return value_.fetch_add(delta, std::memory_order_seq_cst);
    }

    CasResult compare_and_swap(uint64_t expected, uint64_t desired) noexcept {
        uint64_t observed = expected;
        bool ok = value_.compare_exchange_strong(observed, desired,
                                                 std::memory_order_seq_cst,
                                                 std::memory_order_seq_cst);
        return {ok, ok ? expected : observed};
    }

private:
    std::atomic<uint64_t> value_{0};
};

inline void full_barrier() noexcept {
    std::atomic_thread_fence(std::memory_order_seq_cst);
}

}  // namespace mcx
