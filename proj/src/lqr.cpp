#include "safemult/envs/lqr.hpp"

#include <cmath>

namespace safemult::envs {

LqrLandscapeEnv::LqrLandscapeEnv(LqrConfig config) : config_(std::move(config)) {
  if (config_.obstacles.empty()) {
    config_.obstacles = {
        {0.45, 0.05, 0.12, 0.28},
        {-0.35, 0.42, 0.18, 0.12},
        {-0.15, -0.45, 0.20, 0.10},
    };
  }
}

bool LqrLandscapeEnv::inside_obstacle(double x, double y) const {
  for (const Rect& r : config_.obstacles) {
    if (r.contains(x, y)) return true;
  }
  return false;
}

Eigen::Vector2d LqrLandscapeEnv::policy(const Eigen::Vector2d& pos) const {
  Eigen::Vector2d u = -config_.gain * pos;
  u.x() = std::clamp(u.x(), -1.0, 1.0);
  u.y() = std::clamp(u.y(), -1.0, 1.0);
  return u;
}

LqrCell LqrLandscapeEnv::rollout(double x0, double y0) const {
  LqrCell cell;
  cell.x = x0;
  cell.y = y0;

  Eigen::Vector2d pos(x0, y0);
  const double floor = config_.step_reward;  // sparse constraint-free minimum
  double discount = 1.0;

  auto out_of_bounds = [&](const Eigen::Vector2d& p) {
    return std::abs(p.x()) > config_.arena_half ||
           std::abs(p.y()) > config_.arena_half;
  };

  // Start states already inside an obstacle (or outside) violate
  // immediately, before any motion.
  if (out_of_bounds(pos) || inside_obstacle(pos.x(), pos.y())) {
    cell.violated = true;
    cell.raw_return = config_.constraint_reward;
    cell.clipped_return = floor;
    cell.end_step = 0;
    return cell;
  }
  if (pos.norm() < config_.goal_radius) {
    cell.reached_goal = true;
    cell.raw_return = config_.goal_reward;
    cell.clipped_return = config_.goal_reward;
    cell.end_step = 0;
    return cell;
  }

  for (int t = 0; t < config_.horizon; ++t) {
    pos += config_.step_size * policy(pos);
    cell.end_step = t;
    if (out_of_bounds(pos) || inside_obstacle(pos.x(), pos.y())) {
      cell.violated = true;
      cell.raw_return += discount * config_.constraint_reward;
      cell.clipped_return += discount * floor;
      return cell;
    }
    if (pos.norm() < config_.goal_radius) {
      cell.reached_goal = true;
      cell.raw_return += discount * config_.goal_reward;
      cell.clipped_return += discount * config_.goal_reward;
      return cell;
    }
    cell.raw_return += discount * config_.step_reward;
    cell.clipped_return += discount * config_.step_reward;
    discount *= config_.gamma;
  }
  return cell;
}

std::vector<LqrCell> LqrLandscapeEnv::ground_truth(int grid_n) const {
  std::vector<LqrCell> cells;
  cells.reserve(static_cast<std::size_t>(grid_n) * grid_n);
  const double span = 2.0 * config_.arena_half;
  const double cell = span / grid_n;
  for (int gy = 0; gy < grid_n; ++gy) {
    for (int gx = 0; gx < grid_n; ++gx) {
      const double x = -config_.arena_half + cell / 2.0 + gx * cell;
      const double y = -config_.arena_half + cell / 2.0 + gy * cell;
      cells.push_back(rollout(x, y));
    }
  }
  return cells;
}

}  // namespace safemult::envs
