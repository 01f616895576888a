#pragma once

#include "safemult/mlp.hpp"
#include "safemult/rng.hpp"

namespace safemult {

// Stochastic tanh-squashed Gaussian policy. The network maps an observation
// to per-dimension mean and log-std; samples are squashed through tanh and
// rescaled into the action box, with the change-of-variables correction
// folded into the log-probability.
class SquashedGaussianPolicy {
 public:
  SquashedGaussianPolicy() = default;
  SquashedGaussianPolicy(const std::vector<int>& obs_hidden, int action_dim,
                         nn::Activation act, const nn::Vector& low,
                         const nn::Vector& high, Rng& rng);
  SquashedGaussianPolicy(nn::Mlp net, const nn::Vector& low,
                         const nn::Vector& high);

  int action_dim() const { return static_cast<int>(half_.size()); }

  // Stochastic action for environment interaction.
  nn::Vector act_stochastic(const nn::Vector& obs, Rng& rng) const;
  // Deterministic action (squashed mean), used for evaluation.
  nn::Vector act_mean(const nn::Vector& obs) const;

  // Batched sampling without a tape; fills actions (B x d) and per-sample
  // log-probabilities (B).
  void sample(const nn::Matrix& obs, Rng& rng, nn::Matrix& actions,
              nn::Vector& log_probs) const;

  // Log-probability of given squashed actions under the current parameters.
  nn::Vector log_prob(const nn::Matrix& obs, const nn::Matrix& actions) const;

  struct TapedSample {
    nn::Val action;    // B x d, inside the action box
    nn::Val log_prob;  // B x 1
  };

  // Reparameterized sample on a tape: noise is a fixed standard-normal
  // matrix, gradients flow into the policy parameters through the taped
  // network.
  TapedSample rsample(nn::Tape& tape, const nn::TapedMlp& taped, nn::Val obs,
                      const nn::Matrix& noise) const;

  // Taped log-probability of constant actions (PPO ratio path).
  nn::Val log_prob_taped(nn::Tape& tape, const nn::TapedMlp& taped, nn::Val obs,
                         const nn::Matrix& actions) const;

  nn::Mlp& net() { return net_; }
  const nn::Mlp& net() const { return net_; }
  const nn::Vector& center() const { return center_; }
  const nn::Vector& half() const { return half_; }

  static constexpr double kLogStdMin = -20.0;
  static constexpr double kLogStdMax = 2.0;

 private:
  void split(const nn::Matrix& out, nn::Matrix& mean, nn::Matrix& log_std) const;

  nn::Mlp net_;
  nn::Vector center_;
  nn::Vector half_;
  double log_half_sum_ = 0.0;
};

}  // namespace safemult
