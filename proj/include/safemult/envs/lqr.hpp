#pragma once

#include <vector>

#include <Eigen/Dense>

#include "safemult/envs/rect.hpp"

namespace safemult::envs {

struct LqrConfig {
  std::vector<Rect> obstacles;   // empty -> default three-rectangle layout
  double gain = 2.0;             // proportional feedback toward the goal
  double arena_half = 1.0;
  double goal_radius = 0.1;
  double step_size = 0.05;
  int horizon = 200;
  double gamma = 0.99;
  double goal_reward = 40.0;
  double step_reward = -0.1;
  double constraint_reward = -20.0;
};

struct LqrCell {
  double x = 0.0, y = 0.0;
  double raw_return = 0.0;      // with the environment's violation penalty
  double clipped_return = 0.0;  // violation step collapsed to the floor
  bool violated = false;
  bool reached_goal = false;
  int end_step = 0;             // index of the terminating transition
};

// Deterministic point robot under a fixed linear goal-seeking policy,
// u = clamp(-gain * position), evaluated from a grid of start states. The
// policy ignores obstacles, so returns are sharply discontinuous across
// obstacle shadows.
class LqrLandscapeEnv {
 public:
  explicit LqrLandscapeEnv(LqrConfig config);

  Eigen::Vector2d policy(const Eigen::Vector2d& pos) const;
  LqrCell rollout(double x0, double y0) const;

  // grid_n x grid_n cell centers over the arena, row-major in y then x.
  std::vector<LqrCell> ground_truth(int grid_n) const;

  bool inside_obstacle(double x, double y) const;
  const LqrConfig& config() const { return config_; }

 private:
  LqrConfig config_;
};

}  // namespace safemult::envs
