#pragma once

#include <vector>

#include "voltsite/environment.hpp"
#include "voltsite/rng.hpp"

namespace voltsite {

// One environment step. The next-state summary keeps the whole per-candidate
// state list so targets can take the max over next actions.
struct Transition {
  StateVector state;
  Point action_loc;
  int action_port = 1;
  double reward = 0.0;
  std::vector<StateVector> next_states;
  bool terminal = false;
};

// Bounded FIFO ring sampled uniformly without replacement within a batch.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity must be > 0");
  }

  void push(Transition t) {
    if (ring_.size() < capacity_) {
      ring_.push_back(std::move(t));
    } else {
      ring_[head_] = std::move(t);
      head_ = (head_ + 1) % capacity_;
    }
  }

  std::size_t size() const { return ring_.size(); }
  std::size_t capacity() const { return capacity_; }

  // i = 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const { return ring_[(head_ + i) % ring_.size()]; }

  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const {
    if (batch > ring_.size())
      throw std::invalid_argument("sample_indices: batch larger than buffer");
    std::vector<std::size_t> idx(ring_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < batch; ++i) {  // partial Fisher-Yates
      std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(
                              0, static_cast<int>(idx.size() - 1 - i)));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(batch);
    return idx;
  }

 private:
  std::size_t capacity_;
  std::vector<Transition> ring_;
  std::size_t head_ = 0;  // oldest element once full
};

}  // namespace voltsite
