#pragma once

#include <vector>

#include "safemult/cmdp.hpp"
#include "safemult/rng.hpp"

namespace safemult::envs {

using cmdp::DoneKind;
using cmdp::StepResult;
using cmdp::Vector;

// Finite chain of n states. State 0 is the safe terminal, state n-1 the
// constraint terminal; the two actions nudge the walker left or right with
// a slip probability. Observations are one-hot; the single action
// coordinate selects "left" when negative.
class ChainMdp : public cmdp::Env {
 public:
  ChainMdp(int n, double slip, int horizon, std::uint64_t seed);

  // Move distribution of (state, action): probabilities of stepping left
  // and right. Rows must stay stochastic; validate() enforces it.
  void set_move_probs(int state, int action, double p_left, double p_right);
  double p_right(int state, int action) const { return p_right_[idx(state, action)]; }
  double p_left(int state, int action) const { return p_left_[idx(state, action)]; }
  void validate() const;

  int n() const { return n_; }
  int horizon() const { return horizon_; }

  Vector one_hot(int state) const;
  int current_state() const { return state_; }

  // cmdp::Env surface -------------------------------------------------------
  int obs_dim() const override { return n_; }
  int action_dim() const override { return 1; }
  Vector action_low() const override { return -Vector::Ones(1); }
  Vector action_high() const override { return Vector::Ones(1); }
  double reward_floor() const override { return 0.0; }
  double gamma_c_hint() const override { return 1.0; }
  Vector reset() override;
  StepResult step(const Vector& action) override;

 private:
  std::size_t idx(int state, int action) const {
    return static_cast<std::size_t>(state) * 2 + static_cast<std::size_t>(action);
  }

  int n_;
  int horizon_;
  std::vector<double> p_left_, p_right_;
  Rng rng_;
  int state_ = 1;
  int steps_ = 0;
  bool episode_over_ = true;
};

struct ChainReachability {
  Vector phi;             // per state, terminals by convention 0 / 1
  Eigen::MatrixXd psi;    // n x 2, rows for terminals are zero
  double bellman_residual = 0.0;
};

// Exact discounted reachability of the constraint terminal under a fixed
// policy, by value iteration to a 1e-12 fixed point. pi_right[s] is the
// probability of choosing the "right" action in state s.
ChainReachability chain_reachability(const ChainMdp& chain,
                                     const std::vector<double>& pi_right,
                                     double gamma_c);

}  // namespace safemult::envs
