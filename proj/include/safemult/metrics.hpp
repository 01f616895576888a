#pragma once

#include <functional>
#include <string>

#include "safemult/cmdp.hpp"

namespace safemult {

// One metrics CSV row. Rates are fractions in [0,1] over the episodes
// finished since the previous row; losses are means over the updates since
// the previous row.
struct MetricsRow {
  long step = 0;
  double episode_reward_mean = 0.0;
  double violation_rate = 0.0;
  double success_rate = 0.0;
  double timeout_rate = 0.0;
  double value_loss = 0.0;
  double safety_loss = 0.0;
  double actor_loss = 0.0;
  double lambda = 0.0;
  double v_min = 0.0;
  double q_min = 0.0;

  static const char* csv_header();
  std::string to_csv() const;
};

// Training callbacks; either may be empty.
struct TrainHooks {
  std::function<void(const MetricsRow&)> on_metrics;
  std::function<void(long step)> on_checkpoint;
};

// Accumulates episode outcomes and losses between metrics rows.
class MetricsAccumulator {
 public:
  void record_episode(double raw_return, cmdp::DoneKind kind);
  void record_losses(double value, double safety, double actor);

  MetricsRow flush(long step, double lambda, double v_min, double q_min);

 private:
  double return_sum_ = 0.0;
  long episodes_ = 0;
  long violations_ = 0;
  long successes_ = 0;
  long timeouts_ = 0;
  double value_sum_ = 0.0;
  double safety_sum_ = 0.0;
  double actor_sum_ = 0.0;
  long updates_ = 0;
};

}  // namespace safemult
