#include "core/registry.hpp"

#include <cassert>

namespace mcx {

BufferPool::BufferPool(size_t buffer_count, size_t buffer_size)
    : count_(buffer_count),
      buffer_size_(buffer_size),
      bits_(buffer_count),
      storage_(buffer_count * buffer_size) {}

std::optional<uint32_t> BufferPool::alloc() noexcept {
    auto idx = bits_.acquire();
    if (!idx) return std::nullopt;
    return static_cast<uint32_t>(*idx);
}

void BufferPool::free(uint32_t handle) noexcept {
    assert(handle < count_);
    bits_.release(handle);
}

bool BufferPool::live(uint32_t handle) const noexcept {
    return handle < count_ && bits_.test(handle);
}

uint8_t* BufferPool::data(uint32_t handle) noexcept {
    assert(handle < count_);
    return storage_.data() + size_t{handle} * buffer_size_;
}

const uint8_t* BufferPool::data(uint32_t handle) const noexcept {
    assert(handle < count_);
    return storage_.data() + size_t{handle} * buffer_size_;
}

}  // namespace mcx
