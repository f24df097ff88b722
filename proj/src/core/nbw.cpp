#include "core/nbw.hpp"

#include <cassert>
#include <cstring>

namespace mcx {

StateCell::StateCell(size_t slot_count, size_t payload_capacity)
    : slot_count_(slot_count),
      payload_capacity_(payload_capacity),
      slot_stride_(sizeof(Slot) + payload_capacity) {
    assert(slot_count_ >= 1);
    storage_ = std::make_unique<uint8_t[]>(slot_stride_ * slot_count_);
}

StateCell::Writer StateCell::writer() noexcept {
    bool expected = false;
    bool ok = writer_claimed_.compare_exchange_strong(expected, true);
    assert(ok && "state cell writer already claimed");
    (void)ok;
    return Writer(this);
}

uint8_t* StateCell::slot_payload(size_t slot) noexcept {
    return storage_.get() + slot * slot_stride_ + sizeof(Slot);
}

const uint8_t* StateCell::slot_payload(size_t slot) const noexcept {
    return storage_.get() + slot * slot_stride_ + sizeof(Slot);
}

uint32_t StateCell::checksum(std::span<const uint8_t> payload) noexcept {
    // FNV-1a, folded to 32 bits.
    uint32_t h = 2166136261u;
    for (uint8_t b : payload) {
        h ^= b;
        h *= 16777619u;
    }
    return h;
}

StateCell::WriteStatus StateCell::write(std::span<const uint8_t> payload) noexcept {
    if (payload.size() > payload_capacity_) return WriteStatus::TooLarge;

    probe(kProbeWriteBegin);
    uint64_t v = version_.load();
    size_t slot = static_cast<size_t>(v / 2) % slot_count_;
    version_.store(v + 1);  // odd: write in progress
    probe(kProbeWriteMid);

    Slot hdr{static_cast<uint32_t>(payload.size()), checksum(payload)};
    std::memcpy(storage_.get() + slot * slot_stride_, &hdr, sizeof(hdr));
    if (!payload.empty()) {
        std::memcpy(slot_payload(slot), payload.data(), payload.size());
    }

    version_.store(v + 2);
    return WriteStatus::Ok;
}

StateCell::ReadResult StateCell::read(std::span<uint8_t> out, unsigned max_retries) const noexcept {
    ReadResult res{ReadStatus::Stale};
    for (unsigned attempt = 0; attempt <= max_retries; ++attempt) {
        if (attempt > 0) {
            res.retries = attempt;
            probe(kProbeReadRetry);
        }
        uint64_t v1 = version_.load();
        if (v1 == 0) {
            res.status = ReadStatus::Empty;
            return res;
        }
        if (v1 & 1) continue;  // write in flight

        size_t slot = static_cast<size_t>(v1 / 2 - 1) % slot_count_;
        Slot hdr;
        std::memcpy(&hdr, storage_.get() + slot * slot_stride_, sizeof(hdr));
        size_t n = hdr.length <= payload_capacity_ ? hdr.length : payload_capacity_;
        if (n > out.size()) n = out.size();
        if (n > 0) {
            std::memcpy(out.data(), slot_payload(slot), n);
        }

        uint64_t v2 = version_.load();
        if (v1 == v2) {
            res.status = ReadStatus::Ok;
            res.length = n;
            res.checksum = hdr.checksum;
            return res;
        }
    }
    res.status = ReadStatus::Stale;
    return res;
}

}  // namespace mcx
