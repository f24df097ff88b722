#pragma once

#include <cstddef>
#include <cstdint>

namespace mcx {

// One ring slot. Meaning of the two words depends on the traffic:
// messages/packets carry (queue-entry index, sender request handle),
// scalar channels carry (value, width).
struct RingItem {
    uint64_t a = 0;
    uint64_t b = 0;
};

enum class InsertStatus {
    Ok,
    Full,                    // yield, retry later
    FullButConsumerReading,  // retry immediately, bounded spins
};

enum class ReadStatus {
    Ok,
    Empty,                     // yield, retry later
    EmptyButProducerInserting, // retry immediately, bounded spins
};

// What a consumer-side poll can observe without consuming.
enum class RingAvail {
    Item,
    Empty,
    EmptyButProducerInserting,
};

// Single-producer single-consumer FIFO contract shared by both backends.
class ItemRing {
public:
    virtual ~ItemRing() = default;

    virtual InsertStatus insert(const RingItem& item) noexcept = 0;
    virtual ReadStatus read(RingItem& out) noexcept = 0;

    // Committed-item count from one counter snapshot; may be stale.
    virtual size_t occupancy() const noexcept = 0;

    virtual RingAvail available() const noexcept = 0;

    // Restore to empty. Not safe against concurrent operations.
    virtual void reset() noexcept = 0;
};

}  // namespace mcx
