#pragma once

#include <vector>

#include "safemult/cmdp.hpp"
#include "safemult/rng.hpp"

namespace safemult::cmdp {

using Matrix = Eigen::MatrixXd;

// Column-batched view of a set of transitions, ready for network input.
struct Batch {
  Matrix s;        // B x obs
  Matrix a;        // B x act
  Vector reward;   // B
  Vector cost;     // B
  Matrix s_next;   // B x obs
  Vector done;     // B, bootstrap flags
  std::vector<std::size_t> indices;
};

// Uniform-sampling ring buffer. Owns its sampling stream; sampling never
// touches uninitialized slots.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, Rng sample_rng);

  void push(Transition t);
  Batch sample(std::size_t batch_size);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return storage_.size(); }
  const Transition& at(std::size_t i) const { return storage_[i]; }

 private:
  std::vector<Transition> storage_;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;
  Rng rng_;
};

// One on-policy rollout step, with the behavior log-probability recorded
// at collection time.
struct RolloutStep {
  Transition t;
  double log_prob = 0.0;
};

// Ordered per-worker trajectories; episode boundaries are recoverable from
// the stored done kinds plus the rollout end.
class RolloutBuffer {
 public:
  explicit RolloutBuffer(int workers)
      : data_(static_cast<std::size_t>(workers)) {}

  void push(int worker, RolloutStep step) { data_[worker].push_back(std::move(step)); }
  void clear() {
    for (auto& w : data_) w.clear();
  }

  int workers() const { return static_cast<int>(data_.size()); }
  const std::vector<RolloutStep>& worker(int i) const { return data_[i]; }
  std::size_t total_steps() const;

  // [begin, end) index pairs of the episode segments within one worker's
  // trajectory; the final segment may be truncated by the rollout end.
  static std::vector<std::pair<std::size_t, std::size_t>> episode_segments(
      const std::vector<RolloutStep>& steps);

 private:
  std::vector<std::vector<RolloutStep>> data_;
};

}  // namespace safemult::cmdp
