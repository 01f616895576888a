#include "safemult/envs/pointnav.hpp"

#include <cmath>
#include <stdexcept>

namespace safemult::envs {

PointNavEnv::PointNavEnv(PointNavConfig config, std::uint64_t seed)
    : config_(config), rng_(Rng(seed).spawn(0x9E)) {
  if (config_.obstacle_count < 0 || config_.grid_cells <= 0) {
    throw std::invalid_argument("PointNavEnv: bad config");
  }
}

double PointNavEnv::reward_floor() const {
  if (config_.reward_mode == RewardMode::Sparse) {
    return config_.step_reward;
  }
  // Dense reward is step_reward * distance; the farthest in-arena point
  // from the goal is a corner.
  const double max_dist = config_.arena_half * std::sqrt(2.0);
  return config_.step_reward * max_dist;
}

bool PointNavEnv::inside_arena(double x, double y) const {
  return std::abs(x) <= config_.arena_half && std::abs(y) <= config_.arena_half;
}

bool PointNavEnv::inside_obstacle(double x, double y) const {
  for (const Rect& r : obstacles_) {
    if (r.contains(x, y)) return true;
  }
  return false;
}

bool PointNavEnv::occupied_for_sensor(double x, double y) const {
  return !inside_arena(x, y) || inside_obstacle(x, y);
}

Vector PointNavEnv::reset() {
  obstacles_.clear();
  const double half = config_.arena_half;
  while (static_cast<int>(obstacles_.size()) < config_.obstacle_count) {
    Rect r;
    r.hw = 0.5 * rng_.uniform(config_.obstacle_min, config_.obstacle_max);
    r.hh = 0.5 * rng_.uniform(config_.obstacle_min, config_.obstacle_max);
    r.cx = rng_.uniform(-half + r.hw, half - r.hw);
    r.cy = rng_.uniform(-half + r.hh, half - r.hh);
    // Keep the goal region reachable: obstacles stay clear of the disk.
    if (r.distance(0.0, 0.0) < config_.goal_radius + 0.05) continue;
    obstacles_.push_back(r);
  }
  do {
    pos_.x() = rng_.uniform(-half, half);
    pos_.y() = rng_.uniform(-half, half);
  } while (inside_obstacle(pos_.x(), pos_.y()) ||
           pos_.norm() <= config_.goal_radius);
  steps_ = 0;
  episode_over_ = false;
  return observation();
}

double PointNavEnv::step_reward_at(double dist_to_goal) const {
  if (config_.reward_mode == RewardMode::Sparse) return config_.step_reward;
  return config_.step_reward * dist_to_goal;
}

StepResult PointNavEnv::step(const Vector& action) {
  if (episode_over_) {
    throw std::logic_error("PointNavEnv::step: episode is over, call reset()");
  }
  if (action.size() != 2) {
    throw std::invalid_argument("PointNavEnv::step: action must be 2-dimensional");
  }
  const double ax = std::clamp(action[0], -1.0, 1.0);
  const double ay = std::clamp(action[1], -1.0, 1.0);
  pos_.x() += config_.step_size * ax;
  pos_.y() += config_.step_size * ay;
  ++steps_;

  StepResult r;
  if (!inside_arena(pos_.x(), pos_.y()) ||
      inside_obstacle(pos_.x(), pos_.y())) {
    r.kind = DoneKind::Constraint;
    r.raw_reward = config_.constraint_reward;
  } else if (pos_.norm() < config_.goal_radius) {
    r.kind = DoneKind::Goal;
    r.raw_reward = config_.goal_reward;
  } else if (steps_ >= config_.horizon) {
    r.kind = DoneKind::Timeout;
    r.raw_reward = step_reward_at(pos_.norm());
  } else {
    r.kind = DoneKind::None;
    r.raw_reward = step_reward_at(pos_.norm());
  }
  episode_over_ = r.episode_over();
  r.obs = observation();
  return r;
}

Vector PointNavEnv::observation() const {
  const int g = config_.grid_cells;
  Vector obs = Vector::Zero(2 + g * g);
  obs[0] = -pos_.x();  // goal sits at the origin
  obs[1] = -pos_.y();
  const double cell = config_.fov / g;
  const double origin = -config_.fov / 2.0 + cell / 2.0;
  for (int gy = 0; gy < g; ++gy) {
    for (int gx = 0; gx < g; ++gx) {
      const double x = pos_.x() + origin + gx * cell;
      const double y = pos_.y() + origin + gy * cell;
      obs[2 + gy * g + gx] = occupied_for_sensor(x, y) ? 1.0 : 0.0;
    }
  }
  return obs;
}

}  // namespace safemult::envs
