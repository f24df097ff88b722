#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>

#include "core/atomics.hpp"

namespace mcx {

// Fixed-capacity concurrent bit allocator. A set bit means the slot is
// allocated. acquire() hands out each index to exactly one caller at a time;
// release() makes it acquirable again. Scans start from a rotating hint so
// concurrent allocators do not all fight over word 0.
class LockFreeBitSet {
public:
    explicit LockFreeBitSet(size_t capacity);

    LockFreeBitSet(const LockFreeBitSet&) = delete;
    LockFreeBitSet& operator=(const LockFreeBitSet&) = delete;

    // Index whose bit this caller flipped 0 -> 1, or nullopt when a full
    // scan found no clear bit.
    std::optional<size_t> acquire() noexcept;

    // Pre: the bit is set and owned by the caller.
    void release(size_t index) noexcept;

    bool test(size_t index) const noexcept;

    // Number of set bits; a snapshot, exact only at quiescence.
    size_t popcount() const noexcept;

    size_t capacity() const noexcept { return capacity_; }

    // Clears all bits. Not safe against concurrent acquire/release.
    void reset() noexcept;

private:
    size_t capacity_;
    size_t word_count_;
    std::unique_ptr<AtomicWord[]> words_;
    AtomicWord hint_;
};

}  // namespace mcx
