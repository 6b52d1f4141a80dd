#pragma once

#include <cstdint>
#include <queue>
#include <stdexcept>
#include <vector>

#include "wsnkm/types.hpp"

namespace wsnkm {

// Min-queue ordered by (time, seq); seq is assigned in insertion order so equal
// timestamps pop first-in first-out.
template <typename Payload>
class EventQueue {
 public:
  struct Entry {
    Ticks time = 0;
    std::uint64_t seq = 0;
    Payload payload;
  };

  std::uint64_t push(Ticks time, Payload payload) {
    heap_.push(Entry{time, next_seq_, std::move(payload)});
    return next_seq_++;
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  const Entry& top() const { return heap_.top(); }

  Entry pop() {
    if (heap_.empty()) throw std::logic_error("pop from empty event queue");
    Entry e = std::move(const_cast<Entry&>(heap_.top()));
    heap_.pop();
    return e;
  }

 private:
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace wsnkm
