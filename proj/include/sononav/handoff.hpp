#pragma once

// Thread handoff primitives between the network, control and audio threads.
// Both drop stale data instead of blocking the producer.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>

namespace sononav {

/// Single-slot mailbox: writers overwrite, readers take the newest value.
template <typename T>
class LatestValue {
 public:
  void store(T value) {
    std::lock_guard lock(mutex_);
    value_ = std::move(value);
    ++version_;
  }

  std::optional<T> load() const {
    std::lock_guard lock(mutex_);
    return value_;
  }

  /// Returns the value only if it changed since `seen`, updating `seen`.
  std::optional<T> load_if_newer(std::uint64_t& seen) const {
    std::lock_guard lock(mutex_);
    if (version_ == seen || !value_) return std::nullopt;
    seen = version_;
    return value_;
  }

 private:
  mutable std::mutex mutex_;
  std::optional<T> value_;
  std::uint64_t version_ = 0;
};

/// Bounded FIFO that evicts the oldest entry when full.
template <typename T>
class DropOldestQueue {
 public:
  explicit DropOldestQueue(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

  /// Returns false when an older entry was dropped to make room.
  bool push(T value) {
    bool kept_all = true;
    {
      std::lock_guard lock(mutex_);
      if (closed_) return false;
      if (items_.size() >= capacity_) {
        items_.pop_front();
        ++dropped_;
        kept_all = false;
      }
      items_.push_back(std::move(value));
    }
    cv_.notify_one();
    return kept_all;
  }

  std::optional<T> try_pop() {
    std::lock_guard lock(mutex_);
    return take();
  }

  template <typename Rep, typename Period>
  std::optional<T> pop_for(std::chrono::duration<Rep, Period> timeout) {
    std::unique_lock lock(mutex_);
    cv_.wait_for(lock, timeout, [&] { return !items_.empty() || closed_; });
    return take();
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  bool closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return items_.size();
  }

  std::uint64_t dropped() const {
    std::lock_guard lock(mutex_);
    return dropped_;
  }

 private:
  std::optional<T> take() {
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    return v;
  }

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<T> items_;
  std::size_t capacity_;
  std::uint64_t dropped_ = 0;
  bool closed_ = false;
};

}  // namespace sononav
