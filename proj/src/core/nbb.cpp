#include "core/nbb.hpp"

#include <bit>
#include <cassert>

namespace mcx {

NbbRing::NbbRing(size_t capacity)
    : capacity_(capacity),
      mask_(capacity - 1),
      slots_(std::make_unique<RingItem[]>(capacity)) {
    assert(capacity > 0 && std::has_single_bit(capacity));
}

void NbbRing::reset() noexcept {
    uc_.store(0);
    ac_.store(0);
}

InsertStatus NbbRing::insert(const RingItem& item) noexcept {
    uint64_t uc = uc_.load();  // producer-owned, stable
    probe(kProbeInsertLoad);
    uint64_t diff = uc - ac_.load();  // stale AC only understates free room
    if (diff == 2 * capacity_) return InsertStatus::Full;
    if (diff == 2 * capacity_ - 1) return InsertStatus::FullButConsumerReading;

    probe(kProbeInsertInc1);
    uc_.store(uc + 1);
    slots_[(uc / 2) & mask_] = item;
    probe(kProbeInsertInc2);
    uc_.store(uc + 2);
    return InsertStatus::Ok;
}

ReadStatus NbbRing::read(RingItem& out) noexcept {
    uint64_t ac = ac_.load();  // consumer-owned, stable
    probe(kProbeReadLoad);
    uint64_t diff = uc_.load() - ac;  // UC only grows: items never vanish
    if (diff == 0) return ReadStatus::Empty;
    if (diff == 1) return ReadStatus::EmptyButProducerInserting;

    probe(kProbeReadInc1);
    ac_.store(ac + 1);
    out = slots_[(ac / 2) & mask_];
    probe(kProbeReadInc2);
    ac_.store(ac + 2);
    return ReadStatus::Ok;
}

size_t NbbRing::occupancy() const noexcept {
    // AC first: AC never exceeds any later-observed UC, so diff >= 0.
    uint64_t ac = ac_.load();
    uint64_t diff = uc_.load() - ac;
    size_t n = static_cast<size_t>(diff / 2);
    return n > capacity_ ? capacity_ : n;
}

RingAvail NbbRing::available() const noexcept {
    uint64_t ac = ac_.load();
    uint64_t diff = uc_.load() - ac;
    if (diff >= 2) return RingAvail::Item;
    if (diff == 1) return RingAvail::EmptyButProducerInserting;
    return RingAvail::Empty;
}

}  // namespace mcx
