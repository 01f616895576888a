#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "safemult/cmdp.hpp"
#include "safemult/envs/chain.hpp"
#include "safemult/envs/lqr.hpp"
#include "safemult/envs/pointnav.hpp"

using namespace safemult;
using namespace safemult::cmdp;
using namespace safemult::envs;

TEST_CASE("chain reachability: moving toward the constraint is certain doom") {
  ChainMdp chain(6, 0.0, 100, 1);
  std::vector<double> always_right(6, 1.0);
  const auto r = chain_reachability(chain, always_right, 1.0);
  for (int s = 1; s < 5; ++s) {
    CHECK(r.phi[s] == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(r.bellman_residual <= 1e-10);
}

TEST_CASE("chain reachability: moving away never violates") {
  ChainMdp chain(6, 0.0, 100, 1);
  std::vector<double> always_left(6, 0.0);
  const auto r = chain_reachability(chain, always_left, 1.0);
  for (int s = 1; s < 5; ++s) {
    CHECK(r.phi[s] == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("chain reachability: gambler's ruin symmetry at the middle state") {
  // Symmetric random walk: uniform policy with symmetric slip.
  ChainMdp chain(5, 0.1, 100, 1);
  std::vector<double> uniform(5, 0.5);
  const auto r = chain_reachability(chain, uniform, 1.0);
  CHECK(r.phi[2] == doctest::Approx(0.5).epsilon(1e-9));
  // Linear profile for the unit-discount symmetric walk.
  CHECK(r.phi[1] == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(r.phi[3] == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(r.bellman_residual <= 1e-10);
}

TEST_CASE("chain reachability: discounted case satisfies the fixed point") {
  ChainMdp chain(7, 0.15, 100, 1);
  std::vector<double> pi = {0.5, 0.3, 0.6, 0.5, 0.7, 0.4, 0.5};
  const auto r = chain_reachability(chain, pi, 0.8);
  CHECK(r.bellman_residual <= 1e-10);
  for (int s = 1; s < 6; ++s) {
    CHECK(r.phi[s] >= 0.0);
    CHECK(r.phi[s] <= 1.0);
  }
}

TEST_CASE("chain rejects non-stochastic transition rows") {
  ChainMdp chain(5, 0.1, 100, 1);
  chain.set_move_probs(2, 0, 0.7, 0.7);
  std::vector<double> uniform(5, 0.5);
  CHECK_THROWS_AS(chain_reachability(chain, uniform, 1.0), std::logic_error);
}

TEST_CASE("chain env steps and terminates consistently") {
  ChainMdp chain(5, 0.0, 10, 7);
  Vector obs = chain.reset();
  CHECK(obs.sum() == 1.0);
  Vector right = Vector::Ones(1);
  bool over = false;
  for (int i = 0; i < 10 && !over; ++i) {
    const StepResult r = chain.step(right);
    over = r.episode_over();
    if (over) {
      CHECK(r.kind == DoneKind::Constraint);
      CHECK(r.cost() == 1.0);
    }
  }
  CHECK(over);
  CHECK_THROWS_AS(chain.step(right), std::logic_error);
}

TEST_CASE("pointnav: moving into the goal region pays the goal reward") {
  PointNavConfig cfg;
  cfg.obstacle_count = 0;
  PointNavEnv env(cfg, 3);
  env.reset();
  // Walk straight toward the origin using the goal vector observation.
  Vector obs = env.reset();
  bool reached = false;
  for (int i = 0; i < 200; ++i) {
    Eigen::Vector2d d(obs[0], obs[1]);
    Vector a(2);
    const double n = std::max(d.norm(), 1e-9);
    a << d.x() / n, d.y() / n;
    const StepResult r = env.step(a);
    obs = r.obs;
    if (r.episode_over()) {
      CHECK(r.kind == DoneKind::Goal);
      CHECK(r.raw_reward == 40.0);
      reached = true;
      break;
    }
    CHECK(r.raw_reward == -0.1);
  }
  CHECK(reached);
}

TEST_CASE("pointnav: walking into an obstacle is constraint-terminal") {
  PointNavConfig cfg;
  cfg.obstacle_count = 2;
  PointNavEnv env(cfg, 11);
  int constraint_endings = 0;
  for (int episode = 0; episode < 30; ++episode) {
    env.reset();
    REQUIRE(!env.obstacles().empty());
    // Head straight for the first obstacle's center.
    const Rect target = env.obstacles()[0];
    bool over = false;
    for (int i = 0; i < 400 && !over; ++i) {
      const Eigen::Vector2d pos = env.position();
      Eigen::Vector2d d(target.cx - pos.x(), target.cy - pos.y());
      const double n = std::max(d.norm(), 1e-9);
      Vector a(2);
      a << d.x() / n, d.y() / n;
      const StepResult r = env.step(a);
      over = r.episode_over();
      if (over && r.kind == DoneKind::Constraint) {
        ++constraint_endings;
        CHECK(r.raw_reward == -20.0);
        CHECK(r.cost() == 1.0);
        CHECK(clip_reward(r.raw_reward, r.kind, env) == -0.1);
      }
    }
    CHECK(over);
  }
  CHECK(constraint_endings >= 10);
}

TEST_CASE("pointnav: zero action from a free state is a plain step") {
  PointNavConfig cfg;
  cfg.obstacle_count = 0;
  PointNavEnv env(cfg, 5);
  env.reset();
  const StepResult r = env.step(Vector::Zero(2));
  CHECK(r.kind == DoneKind::None);
  CHECK(r.raw_reward == -0.1);
}

TEST_CASE("pointnav: leaving the arena is constraint-terminal") {
  PointNavConfig cfg;
  cfg.obstacle_count = 0;
  PointNavEnv env(cfg, 13);
  env.reset();
  Vector right = Vector::Ones(2);
  StepResult last;
  for (int i = 0; i < 100; ++i) {
    last = env.step(right);
    if (last.episode_over()) break;
  }
  CHECK(last.kind == DoneKind::Constraint);
  CHECK(last.raw_reward == -20.0);
}

TEST_CASE("pointnav: episodes terminate within the horizon") {
  PointNavConfig cfg;
  cfg.obstacle_count = 3;
  cfg.horizon = 50;
  PointNavEnv env(cfg, 17);
  Rng rng(23);
  for (int episode = 0; episode < 20; ++episode) {
    env.reset();
    int steps = 0;
    while (true) {
      Vector a(2);
      a << rng.uniform(-1, 1), rng.uniform(-1, 1);
      const StepResult r = env.step(a);
      ++steps;
      if (r.episode_over()) {
        if (r.kind == DoneKind::Constraint) {
          CHECK(r.cost() == 1.0);
          CHECK(r.raw_reward == -20.0);
        }
        break;
      }
      REQUIRE(steps <= 50);
    }
    CHECK(steps <= 50);
  }
}

TEST_CASE("pointnav: occupancy grid agrees with the sensor test at cell centers") {
  PointNavConfig cfg;
  cfg.obstacle_count = 3;
  PointNavEnv env(cfg, 29);
  Rng rng(31);
  for (int episode = 0; episode < 10; ++episode) {
    Vector obs = env.reset();
    for (int move = 0; move < 5; ++move) {
      const Eigen::Vector2d pos = env.position();
      const int g = cfg.grid_cells;
      const double cell = cfg.fov / g;
      const double origin = -cfg.fov / 2.0 + cell / 2.0;
      for (int gy = 0; gy < g; ++gy) {
        for (int gx = 0; gx < g; ++gx) {
          const double x = pos.x() + origin + gx * cell;
          const double y = pos.y() + origin + gy * cell;
          const double v = obs[2 + gy * g + gx];
          CHECK((v == 0.0 || v == 1.0));
          CHECK(v == (env.occupied_for_sensor(x, y) ? 1.0 : 0.0));
        }
      }
      Vector a(2);
      a << rng.uniform(-1, 1), rng.uniform(-1, 1);
      const StepResult r = env.step(a);
      if (r.episode_over()) break;
      obs = r.obs;
    }
  }
}

TEST_CASE("pointnav: start is never inside an obstacle or the goal") {
  PointNavConfig cfg;
  cfg.obstacle_count = 4;
  PointNavEnv env(cfg, 37);
  for (int i = 0; i < 200; ++i) {
    env.reset();
    const Eigen::Vector2d pos = env.position();
    CHECK(!env.inside_obstacle(pos.x(), pos.y()));
    CHECK(pos.norm() > cfg.goal_radius);
    CHECK(env.inside_arena(pos.x(), pos.y()));
  }
}

TEST_CASE("pointnav dense mode scales the step penalty by goal distance") {
  PointNavConfig cfg;
  cfg.obstacle_count = 0;
  cfg.reward_mode = RewardMode::Dense;
  PointNavEnv env(cfg, 41);
  env.reset();
  const StepResult r = env.step(Vector::Zero(2));
  const double dist = env.position().norm();
  CHECK(r.raw_reward == doctest::Approx(-0.1 * dist));
  CHECK(env.reward_floor() == doctest::Approx(-0.1 * std::sqrt(2.0)));
  CHECK(r.raw_reward >= env.reward_floor());
}

TEST_CASE("lqr landscape: start inside the goal pays out immediately") {
  LqrLandscapeEnv env(LqrConfig{});
  const LqrCell c = env.rollout(0.02, -0.03);
  CHECK(c.reached_goal);
  CHECK(c.raw_return == 40.0);
}

TEST_CASE("lqr landscape: start inside an obstacle carries the floor return") {
  LqrLandscapeEnv env(LqrConfig{});
  const Rect r = env.config().obstacles[0];
  const LqrCell c = env.rollout(r.cx, r.cy);
  CHECK(c.violated);
  CHECK(c.raw_return == -20.0);
  CHECK(c.clipped_return == -0.1);
}

TEST_CASE("lqr landscape is deterministic and discontinuous at shadows") {
  LqrLandscapeEnv env(LqrConfig{});
  const auto a = env.ground_truth(64);
  const auto b = env.ground_truth(64);
  REQUIRE(a.size() == 64 * 64);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].raw_return == b[i].raw_return);  // bit-identical
  }

  int violated = 0, reached = 0;
  for (const auto& c : a) {
    violated += c.violated ? 1 : 0;
    reached += c.reached_goal ? 1 : 0;
    CHECK((c.violated || c.reached_goal));  // horizon never binds here
  }
  CHECK(violated > 100);
  CHECK(reached > 1000);

  // Return jumps across violation-flag boundaries dominate jumps inside
  //same-flag regions.
  double min_boundary_gap = 1e9, max_safe_gap = 0.0;
  auto at = [&](int gx, int gy) -> const LqrCell& { return a[gy * 64 + gx]; };
  for (int gy = 0; gy < 64; ++gy) {
    for (int gx = 0; gx + 1 < 64; ++gx) {
      const auto &l = at(gx, gy), &r = at(gx + 1, gy);
      const double gap = std::abs(l.raw_return - r.raw_return);
      if (l.violated != r.violated) {
        min_boundary_gap = std::min(min_boundary_gap, gap);
      } else if (!l.violated) {
        max_safe_gap = std::max(max_safe_gap, gap);
      }
    }
  }
  CHECK(min_boundary_gap >= 3.0);
  CHECK(max_safe_gap < min_boundary_gap + 40.0);  // sanity on magnitudes
}
