#pragma once

#include <memory>
#include <optional>

#include "safemult/adam.hpp"
#include "safemult/buffers.hpp"
#include "safemult/cmdp.hpp"
#include "safemult/critics.hpp"
#include "safemult/metrics.hpp"
#include "safemult/policy.hpp"
#include "safemult/snapshot.hpp"

namespace safemult::sac {

// Actor objectives. Base and Lagrange are the unmodified SAC and
// SAC-Lagrange baselines (they train on unclipped rewards and the safety
// critic stays severed from, respectively penalizes, the actor); the three
// Mult variants differ in how the safety-critic gradient is weighted.
enum class SacVariant { Base, Lagrange, Mult, MultClipped, MultLagrange };

SacVariant parse_sac_variant(const std::string& name);
bool variant_clips_rewards(SacVariant v);

struct SacConfig {
  SacVariant variant = SacVariant::MultLagrange;
  std::vector<int> hidden = {64, 64};
  nn::Activation activation = nn::Activation::Relu;
  double lr = 3e-4;
  double alpha_ent = 0.05;
  double gamma = 0.99;
  double gamma_c = 0.8;
  double rho = 0.995;
  double rho_c = 0.995;
  double lambda_max = 5.0;    // MultClipped
  double lambda_init = 5.0;   // Lagrange variants
  double dual_lr = 0.01;      // Lagrange variants
  double c_max = 0.0;
  std::size_t buffer_capacity = 100000;
  int batch_size = 128;
  long warmup = 1000;
  int update_every = 1;
  int grad_steps = 1;
  long metrics_every = 500;
  long eval_every = 0;  // 0 disables checkpoint callbacks

  void validate() const;
};

struct SacLosses {
  double reward_critic = 0.0;
  double safety_critic = 0.0;
  double actor = 0.0;
};

// Algorithm: off-policy actor-critic with twin reward critics, twin safety
// critics and their polyak targets; one loop owns all mutable state.
class SacTrainer {
 public:
  SacTrainer(SacConfig config, cmdp::Env& env, std::uint64_t seed);

  // Regression step for both critic pairs on one batch; returns the mean
  // losses. Target values come from the target networks and the current
  // policy, with no gradient flow.
  SacLosses critic_update(const cmdp::Batch& batch);

  // One actor ascent step on the variant objective; returns the loss.
  // Lagrange variants also ascend the dual variable.
  double actor_update(const cmdp::Batch& batch);

  // Full interaction/update loop for `budget` environment steps.
  void train(long budget, const TrainHooks& hooks = {});

  const SquashedGaussianPolicy& policy() const { return policy_; }
  const critics::TwinRewardCritic& reward_critic() const { return reward_; }
  const critics::SafetyCritic& safety_critic() const { return safety_; }
  critics::SafetyCritic& safety_critic() { return safety_; }
  double q_min() const { return q_min_.value(); }
  double lambda() const { return lagrange_ ? lagrange_->value() : 0.0; }
  cmdp::ReplayBuffer& buffer() { return buffer_; }
  long steps_done() const { return steps_done_; }
  long updates_done() const { return updates_done_; }
  const SacConfig& config() const { return config_; }

  nn::Snapshot snapshot() const;

 private:
  double critic_loss_step(nn::Mlp& net, nn::MlpOptimizer& opt,
                          const nn::Matrix& input, const nn::Vector& target,
                          bool is_safety, const cmdp::Batch& batch);
  void check_finite(double loss, const char* what, const cmdp::Batch& batch);

  SacConfig config_;
  cmdp::Env* env_;
  SquashedGaussianPolicy policy_;
  critics::TwinRewardCritic reward_;
  critics::SafetyCritic safety_;
  critics::RunningMin q_min_;
  std::optional<critics::LagrangeMultiplier> lagrange_;
  cmdp::ReplayBuffer buffer_;
  Rng act_rng_;
  Rng update_rng_;
  nn::MlpOptimizer opt_policy_, opt_q1_, opt_q2_, opt_psi1_, opt_psi2_;
  long steps_done_ = 0;
  long updates_done_ = 0;
};

}  // namespace safemult::sac
