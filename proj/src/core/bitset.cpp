#include "core/bitset.hpp"

#include <bit>
#include <cassert>

namespace mcx {

namespace {
constexpr uint64_t kAllSet = ~uint64_t{0};
}

LockFreeBitSet::LockFreeBitSet(size_t capacity)
    : capacity_(capacity),
      word_count_((capacity + 63) / 64),
      words_(std::make_unique<AtomicWord[]>(word_count_ ? word_count_ : 1)) {
    reset();
}

void LockFreeBitSet::reset() noexcept {
    for (size_t w = 0; w < word_count_; ++w) {
        words_[w].store(0);
    }
    // Mark the bits past capacity in the last word as permanently taken.
    size_t tail = capacity_ % 64;
    if (word_count_ > 0 && tail != 0) {
        words_[word_count_ - 1].store(kAllSet << tail);
    }
    hint_.store(0);
}

std::optional<size_t> LockFreeBitSet::acquire() noexcept {
    if (word_count_ == 0) return std::nullopt;
    size_t start = static_cast<size_t>(hint_.fetch_add(1)) % word_count_;
    for (size_t probe = 0; probe < word_count_; ++probe) {
        size_t w = (start + probe) % word_count_;
        uint64_t cur = words_[w].load();
        while (cur != kAllSet) {
            unsigned bit = static_cast<unsigned>(std::countr_one(cur));
            CasResult r = words_[w].compare_and_swap(cur, cur | (uint64_t{1} << bit));
            if (r.succeeded) {
                return w * 64 + bit;
            }
            cur = r.observed;
        }
    }
    return std::nullopt;
}

void LockFreeBitSet::release(size_t index) noexcept {
    assert(index < capacity_);
    size_t w = index / 64;
    uint64_t mask = uint64_t{1} << (index % 64);
    uint64_t cur = words_[w].load();
    for (;;) {
        assert(cur & mask);  // releasing a clear bit is a caller bug
        CasResult r = words_[w].compare_and_swap(cur, cur & ~mask);
        if (r.succeeded) return;
        cur = r.observed;
    }
}

bool LockFreeBitSet::test(size_t index) const noexcept {
    assert(index < capacity_);
    return (words_[index / 64].load() >> (index % 64)) & 1;
}

size_t LockFreeBitSet::popcount() const noexcept {
    size_t n = 0;
    for (size_t w = 0; w < word_count_; ++w) {
        n += static_cast<size_t>(std::popcount(words_[w].load()));
    }
    size_t tail = capacity_ % 64;
    if (word_count_ > 0 && tail != 0) {
        n -= 64 - tail;  // permanently-set padding bits
    }
    return n;
}

}  // namespace mcx
