#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>

#include "core/atomics.hpp"

namespace mcx {

// Test instrumentation point. Production leaves the probe null; the probe id
// identifies which point in the protocol fired.
using ProbeFn = void (*)(void* ctx, int point);

// Versioned state-message cell: one writer that never waits on readers,
// any number of readers that detect collisions by comparing the version
// counter before and after the copy.
//
// version is odd while a write is in flight. After a completed write the
// newest payload lives in slot (version/2 - 1) mod slot_count.
class StateCell {
public:
    enum class WriteStatus { Ok, TooLarge };
    enum class ReadStatus { Ok, Empty, Stale };

    struct ReadResult {
        ReadStatus status;
        size_t length = 0;        // valid payload bytes copied out
        uint32_t checksum = 0;    // checksum stored by the writer
        unsigned retries = 0;     // collision-driven re-reads
    };

    // Probe points.
    static constexpr int kProbeWriteBegin = 0;  // before the first increment
    static constexpr int kProbeWriteMid = 1;    // version is odd here
    static constexpr int kProbeReadRetry = 2;   // before each re-read attempt

    StateCell(size_t slot_count, size_t payload_capacity);

    StateCell(const StateCell&) = delete;
    StateCell& operator=(const StateCell&) = delete;

    // Writer side. Single-writer is a construction-time contract: the cell
    // hands out exactly one writer handle, and the handle is move-only.
    class Writer {
    public:
        Writer() noexcept = default;
        Writer(Writer&& other) noexcept : cell_(other.cell_) { other.cell_ = nullptr; }
        Writer& operator=(Writer&& other) noexcept {
            cell_ = other.cell_;
            other.cell_ = nullptr;
            return *this;
        }
        Writer(const Writer&) = delete;
        Writer& operator=(const Writer&) = delete;

        WriteStatus write(std::span<const uint8_t> payload) noexcept {
            return cell_->write(payload);
        }

        bool valid() const noexcept { return cell_ != nullptr; }

    private:
        friend class StateCell;
        explicit Writer(StateCell* cell) noexcept : cell_(cell) {}
        StateCell* cell_ = nullptr;
    };

    // May be called once; asserts on a second claim.
    Writer writer() noexcept;

    // Copies some committed payload into `out` (sized >= payload_capacity).
    // Retries up to max_retries times on collision, then reports Stale.
    ReadResult read(std::span<uint8_t> out, unsigned max_retries = 3) const noexcept;

    uint64_t version() const noexcept { return version_.load(); }
    size_t slot_count() const noexcept { return slot_count_; }
    size_t payload_capacity() const noexcept { return payload_capacity_; }

    static uint32_t checksum(std::span<const uint8_t> payload) noexcept;

    void set_probe(ProbeFn fn, void* ctx) noexcept {
        probe_ = fn;
        probe_ctx_ = ctx;
    }

private:
    WriteStatus write(std::span<const uint8_t> payload) noexcept;

    void probe(int point) const noexcept {
        if (probe_) probe_(probe_ctx_, point);
    }

    struct Slot {
        uint32_t length;
        uint32_t checksum;
        // payload bytes follow in storage_
    };

    uint8_t* slot_payload(size_t slot) noexcept;
    const uint8_t* slot_payload(size_t slot) const noexcept;

    AtomicWord version_;
    size_t slot_count_;
    size_t payload_capacity_;
    size_t slot_stride_;
    std::unique_ptr<uint8_t[]> storage_;
    std::atomic<bool> writer_claimed_{false};
    ProbeFn probe_ = nullptr;
    void* probe_ctx_ = nullptr;
};

}  // namespace mcx
