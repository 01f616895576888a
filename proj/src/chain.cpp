#include "safemult/envs/chain.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace safemult::envs {

ChainMdp::ChainMdp(int n, double slip, int horizon, std::uint64_t seed)
    : n_(n), horizon_(horizon), rng_(Rng(seed).spawn(0x51)) {
  if (n < 3) throw std::invalid_argument("ChainMdp: need at least 3 states");
  if (slip < 0.0 || slip > 1.0) {
    throw std::invalid_argument("ChainMdp: slip must be in [0,1]");
  }
  p_left_.assign(static_cast<std::size_t>(n) * 2, 0.0);
  p_right_.assign(static_cast<std::size_t>(n) * 2, 0.0);
  for (int s = 0; s < n; ++s) {
    // action 0 aims left, action 1 aims right
    p_left_[idx(s, 0)] = 1.0 - slip;
    p_right_[idx(s, 0)] = slip;
    p_left_[idx(s, 1)] = slip;
    p_right_[idx(s, 1)] = 1.0 - slip;
  }
}

void ChainMdp::set_move_probs(int state, int action, double p_left,
                              double p_right) {
  p_left_[idx(state, action)] = p_left;
  p_right_[idx(state, action)] = p_right;
}

void ChainMdp::validate() const {
  for (int s = 0; s < n_; ++s) {
    for (int a = 0; a < 2; ++a) {
      const double pl = p_left_[idx(s, a)];
      const double pr = p_right_[idx(s, a)];
      if (pl < 0.0 || pr < 0.0 || std::abs(pl + pr - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "ChainMdp: transition row (state " << s << ", action " << a
           << ") is not stochastic: p_left=" << pl << ", p_right=" << pr;
        throw std::logic_error(os.str());
      }
    }
  }
}

Vector ChainMdp::one_hot(int state) const {
  Vector v = Vector::Zero(n_);
  v[state] = 1.0;
  return v;
}

Vector ChainMdp::reset() {
  state_ = 1 + static_cast<int>(rng_.uniform_int(
                   static_cast<std::uint64_t>(n_ - 2)));
  steps_ = 0;
  episode_over_ = false;
  return one_hot(state_);
}

StepResult ChainMdp::step(const Vector& action) {
  if (episode_over_) {
    throw std::logic_error("ChainMdp::step: episode is over, call reset()");
  }
  if (action.size() != 1) {
    throw std::invalid_argument("ChainMdp::step: action must be 1-dimensional");
  }
  const int a = action[0] < 0.0 ? 0 : 1;
  const bool right = rng_.uniform() < p_right_[idx(state_, a)];
  state_ += right ? 1 : -1;
  ++steps_;

  StepResult r;
  r.obs = one_hot(state_);
  if (state_ == n_ - 1) {
    r.kind = DoneKind::Constraint;
    r.raw_reward = -1.0;
  } else if (state_ == 0) {
    r.kind = DoneKind::Goal;
    r.raw_reward = 0.0;
  } else if (steps_ >= horizon_) {
    r.kind = DoneKind::Timeout;
    r.raw_reward = 0.0;
  } else {
    r.kind = DoneKind::None;
    r.raw_reward = 0.0;
  }
  episode_over_ = r.episode_over();
  return r;
}

ChainReachability chain_reachability(const ChainMdp& chain,
                                     const std::vector<double>& pi_right,
                                     double gamma_c) {
  chain.validate();
  const int n = chain.n();
  if (static_cast<int>(pi_right.size()) != n) {
    throw std::invalid_argument(
        "chain_reachability: policy must cover every state");
  }

  ChainReachability out;
  out.phi = Vector::Zero(n);
  out.phi[n - 1] = 1.0;
  out.psi = Eigen::MatrixXd::Zero(n, 2);

  auto backup = [&](const Vector& phi, int s, int a) {
    double v = 0.0;
    for (int dir = 0; dir < 2; ++dir) {
      const double p = dir == 0 ? chain.p_left(s, a) : chain.p_right(s, a);
      const int sn = s + (dir == 0 ? -1 : 1);
      if (sn == n - 1) {
        v += p * 1.0;  // transition cost of landing in the constraint set
      } else if (sn > 0) {
        v += p * gamma_c * phi[sn];
      }
      // sn == 0 is the safe terminal: contributes 0
    }
    return v;
  };

  double delta = 1.0;
  while (delta > 1e-12) {
    delta = 0.0;
    Vector next = out.phi;
    for (int s = 1; s < n - 1; ++s) {
      const double pr = pi_right[s];
      const double v = (1.0 - pr) * backup(out.phi, s, 0) +
                       pr * backup(out.phi, s, 1);
      delta = std::max(delta, std::abs(v - out.phi[s]));
      next[s] = v;
    }
    out.phi = next;
  }

  double residual = 0.0;
  for (int s = 1; s < n - 1; ++s) {
    for (int a = 0; a < 2; ++a) {
      out.psi(s, a) = backup(out.phi, s, a);
    }
    const double expect = (1.0 - pi_right[s]) * out.psi(s, 0) +
                          pi_right[s] * out.psi(s, 1);
    residual = std::max(residual, std::abs(expect - out.phi[s]));
  }
  out.bellman_residual = residual;
  return out;
}

}  // namespace safemult::envs
