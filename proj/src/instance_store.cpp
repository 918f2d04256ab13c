#include "pic/instance_store.hpp"

#include <algorithm>

namespace pic {

RecentNegativeBuffer::RecentNegativeBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("RecentNegativeBuffer: capacity must be >= 1");
}

void RecentNegativeBuffer::push(std::span<const std::uint32_t> batch_ids) {
  for (const auto id : batch_ids) {
    auto it = pos_.find(id);
    if (it != pos_.end()) {
      order_.splice(order_.end(), order_, it->second);  // refresh recency
      continue;
    }
    order_.push_back(id);
    pos_[id] = std::prev(order_.end());
    if (order_.size() > capacity_) {
      pos_.erase(order_.front());
      order_.pop_front();
    }
  }
}

std::vector<std::uint32_t> RecentNegativeBuffer::contents() const {
  return {order_.begin(), order_.end()};
}

std::vector<std::uint32_t> negative_class_set(const RecentNegativeBuffer& buffer,
                                              std::span<const std::uint32_t> batch_ids) {
  std::vector<std::uint32_t> set = buffer.contents();
  set.insert(set.end(), batch_ids.begin(), batch_ids.end());
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  return set;
}

}  // namespace pic
