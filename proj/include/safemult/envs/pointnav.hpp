#pragma once

#include <vector>

#include "safemult/cmdp.hpp"
#include "safemult/envs/rect.hpp"
#include "safemult/rng.hpp"

namespace safemult::envs {

using cmdp::DoneKind;
using cmdp::StepResult;
using cmdp::Vector;

enum class RewardMode { Sparse, Dense };

struct PointNavConfig {
  int obstacle_count = 3;
  int horizon = 200;
  RewardMode reward_mode = RewardMode::Sparse;
  double arena_half = 1.0;       // arena is [-arena_half, arena_half]^2
  double goal_radius = 0.1;
  double step_size = 0.05;       // meters per unit action
  int grid_cells = 11;           // occupancy grid is grid_cells^2
  double fov = 0.4;              // side length of the sensed square
  double obstacle_min = 0.1;     // obstacle side lengths, uniform
  double obstacle_max = 0.3;
  double goal_reward = 40.0;
  double step_reward = -0.1;
  double constraint_reward = -20.0;
};

// Point robot in [-1,1]^2 steering toward a goal disk at the origin while
// avoiding freshly sampled rectangular obstacles. Touching an obstacle or
// leaving the arena ends the episode as a constraint violation.
// Observation: vector to the goal followed by the row-major flattened
// local occupancy grid.
class PointNavEnv : public cmdp::Env {
 public:
  PointNavEnv(PointNavConfig config, std::uint64_t seed);

  int obs_dim() const override {
    return 2 + config_.grid_cells * config_.grid_cells;
  }
  int action_dim() const override { return 2; }
  Vector action_low() const override { return -Vector::Ones(2); }
  Vector action_high() const override { return Vector::Ones(2); }
  double reward_floor() const override;
  Vector reset() override;
  StepResult step(const Vector& action) override;

  // True where the sensor should read "occupied": outside the arena or
  // inside an obstacle. Grid cells carry exactly this test at their centers.
  bool occupied_for_sensor(double x, double y) const;
  bool inside_obstacle(double x, double y) const;
  bool inside_arena(double x, double y) const;

  const std::vector<Rect>& obstacles() const { return obstacles_; }
  Eigen::Vector2d position() const { return pos_; }
  const PointNavConfig& config() const { return config_; }

 private:
  Vector observation() const;
  double step_reward_at(double dist_to_goal) const;

  PointNavConfig config_;
  Rng rng_;
  std::vector<Rect> obstacles_;
  Eigen::Vector2d pos_{0.0, 0.0};
  int steps_ = 0;
  bool episode_over_ = true;
};

}  // namespace safemult::envs
