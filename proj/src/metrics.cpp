#include "safemult/metrics.hpp"

#include <cstdio>

namespace safemult {

const char* MetricsRow::csv_header() {
  return "step,episode_reward_mean,violation_rate,success_rate,timeout_rate,"
         "value_loss,safety_loss,actor_loss,lambda,v_min,q_min";
}

std::string MetricsRow::to_csv() const {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%ld,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,"
                "%.12g",
                step, episode_reward_mean, violation_rate, success_rate,
                timeout_rate, value_loss, safety_loss, actor_loss, lambda,
                v_min, q_min);
  return std::string(buf);
}

void MetricsAccumulator::record_episode(double raw_return,
                                        cmdp::DoneKind kind) {
  return_sum_ += raw_return;
  ++episodes_;
  switch (kind) {
    case cmdp::DoneKind::Constraint: ++violations_; break;
    case cmdp::DoneKind::Goal: ++successes_; break;
    case cmdp::DoneKind::Timeout: ++timeouts_; break;
    case cmdp::DoneKind::None: break;
  }
}

void MetricsAccumulator::record_losses(double value, double safety,
                                       double actor) {
  value_sum_ += value;
  safety_sum_ += safety;
  actor_sum_ += actor;
  ++updates_;
}

MetricsRow MetricsAccumulator::flush(long step, double lambda, double v_min,
                                     double q_min) {
  MetricsRow row;
  row.step = step;
  if (episodes_ > 0) {
    const double n = static_cast<double>(episodes_);
    row.episode_reward_mean = return_sum_ / n;
    row.violation_rate = violations_ / n;
    row.success_rate = successes_ / n;
    row.timeout_rate = timeouts_ / n;
  }
  if (updates_ > 0) {
    const double n = static_cast<double>(updates_);
    row.value_loss = value_sum_ / n;
    row.safety_loss = safety_sum_ / n;
    row.actor_loss = actor_sum_ / n;
  }
  row.lambda = lambda;
  row.v_min = v_min;
  row.q_min = q_min;
  *this = MetricsAccumulator{};
  return row;
}

}  // namespace safemult
