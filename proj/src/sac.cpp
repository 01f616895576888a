#include "safemult/sac.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace safemult::sac {

using nn::Matrix;
using nn::Tape;
using nn::TapedMlp;
using nn::Val;
using nn::Vector;

SacVariant parse_sac_variant(const std::string& name) {
  if (name == "base") return SacVariant::Base;
  if (name == "lagrange") return SacVariant::Lagrange;
  if (name == "mult") return SacVariant::Mult;
  if (name == "mult_clipped" || name == "clipped") return SacVariant::MultClipped;
  if (name == "mult_lagrange") return SacVariant::MultLagrange;
  throw std::invalid_argument("unknown SAC variant '" + name + "'");
}

bool variant_clips_rewards(SacVariant v) {
  return v == SacVariant::Mult || v == SacVariant::MultClipped ||
         v == SacVariant::MultLagrange;
}

void SacConfig::validate() const {
  if (variant == SacVariant::MultClipped && !(lambda_max > 0.0)) {
    throw std::invalid_argument(
        "SacConfig: the clipped variant requires lambda_max > 0");
  }
  if ((variant == SacVariant::Lagrange ||
       variant == SacVariant::MultLagrange) &&
      lambda_init < 0.0) {
    throw std::invalid_argument("SacConfig: lambda_init must be >= 0");
  }
  if (batch_size <= 0 || grad_steps < 0 || update_every <= 0) {
    throw std::invalid_argument("SacConfig: bad update cadence");
  }
}

namespace {

std::vector<int> with_io(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes;
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

Matrix hstack(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

}  // namespace

SacTrainer::SacTrainer(SacConfig config, cmdp::Env& env, std::uint64_t seed)
    : config_(config),
      env_(&env),
      buffer_(config.buffer_capacity, Rng(seed).spawn(1)),
      act_rng_(Rng(seed).spawn(2)),
      update_rng_(Rng(seed).spawn(3)) {
  config_.validate();
  Rng init = Rng(seed).spawn(0);
  const int obs = env.obs_dim();
  const int act = env.action_dim();
  std::vector<int> trunk;
  trunk.push_back(obs);
  trunk.insert(trunk.end(), config_.hidden.begin(), config_.hidden.end());
  policy_ = SquashedGaussianPolicy(trunk, act, config_.activation,
                                   env.action_low(), env.action_high(), init);
  const auto critic_sizes = with_io(obs + act, config_.hidden, 1);
  reward_ = critics::TwinRewardCritic(critic_sizes, config_.activation,
                                      config_.rho, config_.gamma, init);
  safety_ = critics::SafetyCritic(critic_sizes, config_.activation,
                                  config_.rho_c, config_.gamma_c, init);
  if (config_.variant == SacVariant::Lagrange ||
      config_.variant == SacVariant::MultLagrange) {
    lagrange_.emplace(config_.lambda_init, config_.dual_lr, config_.c_max);
  }
  opt_policy_ = nn::MlpOptimizer(policy_.net(), config_.lr, "policy");
  opt_q1_ = nn::MlpOptimizer(reward_.q1, config_.lr, "q1");
  opt_q2_ = nn::MlpOptimizer(reward_.q2, config_.lr, "q2");
  opt_psi1_ = nn::MlpOptimizer(safety_.psi1, config_.lr, "psi1");
  opt_psi2_ = nn::MlpOptimizer(safety_.psi2, config_.lr, "psi2");
}

void SacTrainer::check_finite(double loss, const char* what,
                              const cmdp::Batch& batch) {
  if (std::isfinite(loss)) return;
  std::ostringstream os;
  os << "SacTrainer: non-finite " << what << " loss " << loss << " on batch of "
     << batch.s.rows() << " (reward range [" << batch.reward.minCoeff() << ", "
     << batch.reward.maxCoeff() << "], first indices";
  for (std::size_t i = 0; i < std::min<std::size_t>(4, batch.indices.size()); ++i) {
    os << ' ' << batch.indices[i];
  }
  os << ")";
  throw std::runtime_error(os.str());
}

double SacTrainer::critic_loss_step(nn::Mlp& net, nn::MlpOptimizer& opt,
                                    const Matrix& input, const Vector& target,
                                    bool is_safety, const cmdp::Batch& batch) {
  Tape tape;
  TapedMlp taped(tape, net, true);
  Val pred = taped.forward(tape.constant(input));
  Val loss = is_safety
                 ? critics::bce_mean(pred, Matrix(target))
                 : nn::mean(nn::square(pred - tape.constant(Matrix(target))));
  const double value = loss.scalar();
  check_finite(value, is_safety ? "safety-critic" : "reward-critic", batch);
  tape.backward(loss);
  opt.step(net, taped);
  if (!is_safety) {
    q_min_.observe(pred.value());
  }
  return value;
}

SacLosses SacTrainer::critic_update(const cmdp::Batch& batch) {
  const Eigen::Index b = batch.s.rows();

  // Targets from the frozen side: next actions from the current policy,
  // values from the target networks.
  Matrix a_next;
  Vector logp_next;
  policy_.sample(batch.s_next, update_rng_, a_next, logp_next);
  const Matrix sa_next = hstack(batch.s_next, a_next);
  const Matrix q_targ = reward_.min_target(sa_next);
  const Matrix psi_targ = safety_.max_target(sa_next);

  Vector y(b), y_c(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    const double keep = 1.0 - batch.done[i];
    y[i] = batch.reward[i] +
           config_.gamma * keep *
               (q_targ(i, 0) - config_.alpha_ent * logp_next[i]);
    y_c[i] = critics::safety_target(batch.cost[i], batch.done[i],
                                    config_.gamma_c, psi_targ(i, 0));
  }

  const Matrix sa = hstack(batch.s, batch.a);
  SacLosses losses;
  losses.reward_critic = 0.5 * (critic_loss_step(reward_.q1, opt_q1_, sa, y,
                                                 false, batch) +
                                critic_loss_step(reward_.q2, opt_q2_, sa, y,
                                                 false, batch));
  losses.safety_critic = 0.5 * (critic_loss_step(safety_.psi1, opt_psi1_, sa,
                                                 y_c, true, batch) +
                                critic_loss_step(safety_.psi2, opt_psi2_, sa,
                                                 y_c, true, batch));
  return losses;
}

double SacTrainer::actor_update(const cmdp::Batch& batch) {
  const Eigen::Index b = batch.s.rows();
  const int d = env_->action_dim();
  Matrix noise(b, d);
  for (Eigen::Index i = 0; i < noise.size(); ++i) {
    noise.data()[i] = update_rng_.normal();
  }

  Tape tape;
  TapedMlp actor(tape, policy_.net(), true);
  Val obs = tape.constant(batch.s);
  const auto sampled = policy_.rsample(tape, actor, obs, noise);
  Val sa = nn::concat_cols(obs, sampled.action);

  TapedMlp q1(tape, reward_.q1, false), q2(tape, reward_.q2, false);
  Val q = nn::minimum(q1.forward(sa), q2.forward(sa));
  TapedMlp p1(tape, safety_.psi1, false), p2(tape, safety_.psi2, false);
  Val psi = nn::maximum(p1.forward(sa), p2.forward(sa));

  q_min_.observe(q.value());
  const double q_floor = q_min_.value();

  Val entropy_cost = config_.alpha_ent * sampled.log_prob;
  Val objective = q;  // overwritten per variant
  switch (config_.variant) {
    case SacVariant::Base:
      objective = q;
      break;
    case SacVariant::Lagrange:
      objective = q - lagrange_->value() * (psi - lagrange_->c_max());
      break;
    case SacVariant::Mult:
      objective = critics::q_mult(q, q_floor, psi);
      break;
    case SacVariant::MultClipped: {
      Val weight = nn::stop_gradient(
          nn::minimum(q - q_floor, tape.constant(Matrix::Constant(
                                       b, 1, config_.lambda_max))));
      objective = nn::stop_gradient(1.0 - psi) * q - weight * psi;
      break;
    }
    case SacVariant::MultLagrange:
      objective = nn::stop_gradient(1.0 - psi) * q -
                  lagrange_->value() * (psi - lagrange_->c_max());
      break;
  }
  Val loss = nn::mean(entropy_cost - objective);
  const double loss_value = loss.scalar();
  check_finite(loss_value, "actor", batch);
  tape.backward(loss);
  opt_policy_.step(policy_.net(), actor);

  if (lagrange_) {
    const double level = psi.value().mean() - lagrange_->c_max();
    lagrange_->ascend(level);
    if (lagrange_->value() < 0.0) {
      throw std::logic_error("SacTrainer: dual variable went negative");
    }
  }
  return loss_value;
}

void SacTrainer::train(long budget, const TrainHooks& hooks) {
  const bool clip = variant_clips_rewards(config_.variant);
  MetricsAccumulator acc;
  Vector obs = env_->reset();
  double episode_return = 0.0;

  for (long step = 1; step <= budget; ++step) {
    Vector action(env_->action_dim());
    if (step <= config_.warmup) {
      const Vector low = env_->action_low();
      const Vector high = env_->action_high();
      for (int j = 0; j < env_->action_dim(); ++j) {
        action[j] = act_rng_.uniform(low[j], high[j]);
      }
    } else {
      action = policy_.act_stochastic(obs, act_rng_);
    }
    const cmdp::StepResult result = env_->step(action);
    buffer_.push(cmdp::make_transition(obs, action, result, clip, *env_));
    episode_return += result.raw_reward;
    if (result.episode_over()) {
      acc.record_episode(episode_return, result.kind);
      episode_return = 0.0;
      obs = env_->reset();
    } else {
      obs = result.obs;
    }

    if (step > config_.warmup && step % config_.update_every == 0) {
      for (int g = 0; g < config_.grad_steps; ++g) {
        const cmdp::Batch batch =
            buffer_.sample(static_cast<std::size_t>(config_.batch_size));
        const SacLosses closs = critic_update(batch);
        const double aloss = actor_update(batch);
        reward_.polyak_update();
        safety_.polyak_update();
        acc.record_losses(closs.reward_critic, closs.safety_critic, aloss);
        ++updates_done_;
      }
    }

    ++steps_done_;
    if (hooks.on_metrics && config_.metrics_every > 0 &&
        step % config_.metrics_every == 0) {
      hooks.on_metrics(acc.flush(step, lambda(), 0.0, q_min_.value()));
    }
    if (hooks.on_checkpoint && config_.eval_every > 0 &&
        step % config_.eval_every == 0) {
      hooks.on_checkpoint(step);
    }
  }
}

nn::Snapshot SacTrainer::snapshot() const {
  nn::Snapshot snap;
  snap.put("policy", policy_.net());
  snap.put("q1", reward_.q1);
  snap.put("q2", reward_.q2);
  snap.put("q1_targ", reward_.targ1);
  snap.put("q2_targ", reward_.targ2);
  snap.put("psi1", safety_.psi1);
  snap.put("psi2", safety_.psi2);
  snap.put("psi1_targ", safety_.targ1);
  snap.put("psi2_targ", safety_.targ2);
  snap.put("q_min", q_min_.value());
  snap.put("lambda", lambda());
  snap.put("steps", static_cast<double>(steps_done_));
  return snap;
}

}  // namespace safemult::sac
