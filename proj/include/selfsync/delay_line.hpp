#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace selfsync {

// Fixed-capacity history of vector samples. Lag 0 is the newest sample;
// lags up to capacity()-1 are addressable in O(1).
template <typename T>
class DelayLine {
 public:
  DelayLine() = default;
  DelayLine(std::size_t capacity, std::size_t dim) : data_(capacity * dim), capacity_(capacity), dim_(dim) {
    assert(capacity > 0 && dim > 0);
  }

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t dim() const noexcept { return dim_; }

  void push(std::span<const T> sample) {
    assert(sample.size() == dim_);
    head_ = head_ + 1 == capacity_ ? 0 : head_ + 1;
    std::copy(sample.begin(), sample.end(), data_.begin() + static_cast<std::ptrdiff_t>(head_ * dim_));
  }

  std::span<const T> at_lag(std::size_t lag) const {
    assert(lag < capacity_);
    const std::size_t slot = head_ >= lag ? head_ - lag : head_ + capacity_ - lag;
    return {data_.data() + slot * dim_, dim_};
  }

 private:
  std::vector<T> data_;
  std::size_t capacity_ = 0;
  std::size_t dim_ = 0;
  std::size_t head_ = 0;
};

}  // namespace selfsync
