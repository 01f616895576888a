#include "safemult/buffers.hpp"

#include <stdexcept>

namespace safemult::cmdp {

ReplayBuffer::ReplayBuffer(std::size_t capacity, Rng sample_rng)
    : storage_(capacity), rng_(sample_rng) {
  if (capacity == 0) {
    throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  }
}

void ReplayBuffer::push(Transition t) {
  storage_[cursor_] = std::move(t);
  cursor_ = (cursor_ + 1) % storage_.size();
  if (size_ < storage_.size()) ++size_;
}

Batch ReplayBuffer::sample(std::size_t batch_size) {
  if (size_ == 0) {
    throw std::logic_error("ReplayBuffer::sample: buffer is empty");
  }
  Batch b;
  const auto& first = storage_[0];
  const Eigen::Index obs = first.s.size();
  const Eigen::Index act = first.a.size();
  b.s.resize(batch_size, obs);
  b.a.resize(batch_size, act);
  b.reward.resize(batch_size);
  b.cost.resize(batch_size);
  b.s_next.resize(batch_size, obs);
  b.done.resize(batch_size);
  b.indices.resize(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t k = rng_.uniform_int(size_);
    const Transition& t = storage_[k];
    b.s.row(i) = t.s.transpose();
    b.a.row(i) = t.a.transpose();
    b.reward[i] = t.reward;
    b.cost[i] = t.cost;
    b.s_next.row(i) = t.s_next.transpose();
    b.done[i] = t.done ? 1.0 : 0.0;
    b.indices[i] = k;
  }
  return b;
}

std::size_t RolloutBuffer::total_steps() const {
  std::size_t n = 0;
  for (const auto& w : data_) n += w.size();
  return n;
}

std::vector<std::pair<std::size_t, std::size_t>>
RolloutBuffer::episode_segments(const std::vector<RolloutStep>& steps) {
  std::vector<std::pair<std::size_t, std::size_t>> segments;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].t.kind != DoneKind::None) {
      segments.emplace_back(begin, i + 1);
      begin = i + 1;
    }
  }
  if (begin < steps.size()) {
    segments.emplace_back(begin, steps.size());
  }
  return segments;
}

}  // namespace safemult::cmdp
