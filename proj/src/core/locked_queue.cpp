#include "core/locked_queue.hpp"

namespace mcx {

RwGuardedQueue::RwGuardedQueue(size_t capacity, GlobalWriteLock& global)
    : capacity_(capacity),
      lock_(global),
      slots_(std::make_unique<RingItem[]>(capacity)) {}

void RwGuardedQueue::reset() noexcept {
    lock_.lock_write();
    head_ = 0;
    count_ = 0;
    lock_.unlock_write();
}

InsertStatus RwGuardedQueue::insert(const RingItem& item) noexcept {
    lock_.lock_write();
    if (count_ == capacity_) {
        lock_.unlock_write();
        return InsertStatus::Full;
    }
    slots_[(head_ + count_) % capacity_] = item;
    ++count_;
    lock_.unlock_write();
    return InsertStatus::Ok;
}

ReadStatus RwGuardedQueue::read(RingItem& out) noexcept {
    lock_.lock_write();  // dequeue mutates, so it takes the writer lock
    if (count_ == 0) {
        lock_.unlock_write();
        return ReadStatus::Empty;
    }
    out = slots_[head_ % capacity_];
    ++head_;
    --count_;
    lock_.unlock_write();
    return ReadStatus::Ok;
}

size_t RwGuardedQueue::occupancy() const noexcept {
    lock_.lock_read();
    size_t n = count_;
    lock_.unlock_read();
    return n;
}

RingAvail RwGuardedQueue::available() const noexcept {
    return occupancy() > 0 ? RingAvail::Item : RingAvail::Empty;
}

}  // namespace mcx
