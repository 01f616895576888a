#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace safemult::cmdp {

using Vector = Eigen::VectorXd;

enum class DoneKind { None, Goal, Constraint, Timeout };

const char* to_string(DoneKind k);

struct StepResult {
  Vector obs;           // observation after the step
  double raw_reward;    // environment reward before any clipping
  DoneKind kind = DoneKind::None;

  bool episode_over() const { return kind != DoneKind::None; }
  double cost() const { return kind == DoneKind::Constraint ? 1.0 : 0.0; }
};

// CMDP environment contract. Every step flags exactly one DoneKind;
// constraint-terminal steps carry cost 1, all others cost 0. Stepping a
// finished episode throws.
class Env {
 public:
  virtual ~Env() = default;

  virtual int obs_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual Vector action_low() const = 0;
  virtual Vector action_high() const = 0;

  // Smallest constraint-free reward the environment can emit; the clipped
  // reward of a constraint-terminal step.
  virtual double reward_floor() const = 0;

  // Suggested discounts for this task.
  virtual double gamma_hint() const { return 0.99; }
  virtual double gamma_c_hint() const { return 0.8; }

  virtual Vector reset() = 0;
  virtual StepResult step(const Vector& action) = 0;
};

// One stored environment step.
struct Transition {
  Vector s;
  Vector a;
  double reward = 0.0;  // clipped when the algorithm clips, raw otherwise
  double cost = 0.0;    // 1 iff kind == Constraint
  Vector s_next;
  bool done = false;    // bootstrap flag: timeouts keep done = false
  DoneKind kind = DoneKind::None;
};

// Clipped reward per the bounded reward structure: constraint-terminal
// steps collapse to the declared floor, everything else passes through.
// A constraint-free reward below the declared floor is a contract
// violation by the environment.
double clip_reward(double raw_reward, DoneKind kind, const Env& env);

// Builds the stored transition from a step, applying the bootstrap
// convention (done only for goal/constraint ends) and optional clipping.
Transition make_transition(const Vector& s, const Vector& a,
                           const StepResult& r, bool clip, const Env& env);

// Discounted constraint cost-to-go over one episode: gamma_c^(k-t) when
// transition k is the constraint-terminal one, zero everywhere otherwise.
std::vector<double> cost_to_go(std::span<const Transition> episode,
                               double gamma_c);

// Discounted reward-to-go; bootstrap_value seeds the tail for episodes cut
// off by a timeout or rollout boundary (pass 0 for true terminals).
std::vector<double> reward_to_go(std::span<const double> rewards, double gamma,
                                 double bootstrap_value);

// Append-only text log of transitions, one line each, for offline
// debugging. Columns follow the Transition field order.
class TransitionLogger {
 public:
  explicit TransitionLogger(const std::string& path);
  void log(const Transition& t);

 private:
  std::ofstream out_;
  bool wrote_header_ = false;
  int obs_dim_ = 0;
  int act_dim_ = 0;
};

}  // namespace safemult::cmdp
