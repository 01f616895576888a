#include "safemult/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace safemult {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5*log(2*pi)

double atanh_clipped(double a) {
  const double x = std::clamp(a, -1.0 + 1e-12, 1.0 - 1e-12);
  return 0.5 * std::log((1.0 + x) / (1.0 - x));
}

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

// log(1 - tanh(u)^2), evaluated without forming tanh.
double log_sech2(double u) {
  return 2.0 * (std::log(2.0) - u - softplus(-2.0 * u));
}
}  // namespace

SquashedGaussianPolicy::SquashedGaussianPolicy(
    const std::vector<int>& obs_hidden, int action_dim, nn::Activation act,
    const nn::Vector& low, const nn::Vector& high, Rng& rng) {
  std::vector<int> sizes = obs_hidden;
  sizes.push_back(2 * action_dim);
  net_ = nn::Mlp(sizes, act, nn::Head::Identity, rng);
  center_ = 0.5 * (high + low);
  half_ = 0.5 * (high - low);
  log_half_sum_ = half_.array().log().sum();
}

SquashedGaussianPolicy::SquashedGaussianPolicy(nn::Mlp net,
                                               const nn::Vector& low,
                                               const nn::Vector& high)
    : net_(std::move(net)) {
  center_ = 0.5 * (high + low);
  half_ = 0.5 * (high - low);
  log_half_sum_ = half_.array().log().sum();
}

void SquashedGaussianPolicy::split(const nn::Matrix& out, nn::Matrix& mean,
                                   nn::Matrix& log_std) const {
  const int d = action_dim();
  if (out.cols() != 2 * d) {
    throw std::logic_error("SquashedGaussianPolicy: head width mismatch");
  }
  mean = out.leftCols(d);
  log_std = out.rightCols(d).cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

nn::Vector SquashedGaussianPolicy::act_stochastic(const nn::Vector& obs,
                                                  Rng& rng) const {
  nn::Matrix actions;
  nn::Vector logp;
  nn::Matrix row = obs.transpose();
  sample(row, rng, actions, logp);
  return actions.row(0).transpose();
}

nn::Vector SquashedGaussianPolicy::act_mean(const nn::Vector& obs) const {
  const nn::Matrix out = net_.eval(nn::Matrix(obs.transpose()));
  nn::Matrix mean, log_std;
  split(out, mean, log_std);
  nn::Vector a(action_dim());
  for (int j = 0; j < action_dim(); ++j) {
    a[j] = center_[j] + half_[j] * std::tanh(mean(0, j));
  }
  return a;
}

void SquashedGaussianPolicy::sample(const nn::Matrix& obs, Rng& rng,
                                    nn::Matrix& actions,
                                    nn::Vector& log_probs) const {
  const nn::Matrix out = net_.eval(obs);
  nn::Matrix mean, log_std;
  split(out, mean, log_std);
  const Eigen::Index b = obs.rows();
  const int d = action_dim();
  actions.resize(b, d);
  log_probs = nn::Vector::Zero(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    double lp = 0.0;
    for (int j = 0; j < d; ++j) {
      const double eps = rng.normal();
      const double u = mean(i, j) + std::exp(log_std(i, j)) * eps;
      // Gaussian density of u, minus the tanh-and-rescale volume change.
      lp += -0.5 * eps * eps - log_std(i, j) - kHalfLog2Pi;
      lp -= std::log(half_[j]) + log_sech2(u);
      actions(i, j) = center_[j] + half_[j] * std::tanh(u);
    }
    log_probs[i] = lp;
  }
}

nn::Vector SquashedGaussianPolicy::log_prob(const nn::Matrix& obs,
                                            const nn::Matrix& actions) const {
  const nn::Matrix out = net_.eval(obs);
  nn::Matrix mean, log_std;
  split(out, mean, log_std);
  const Eigen::Index b = obs.rows();
  const int d = action_dim();
  nn::Vector lp = nn::Vector::Zero(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    for (int j = 0; j < d; ++j) {
      const double raw = (actions(i, j) - center_[j]) / half_[j];
      const double u = atanh_clipped(raw);
      const double sigma = std::exp(log_std(i, j));
      const double z = (u - mean(i, j)) / sigma;
      lp[i] += -0.5 * z * z - log_std(i, j) - kHalfLog2Pi;
      lp[i] -= std::log(half_[j]) + log_sech2(u);
    }
  }
  return lp;
}

SquashedGaussianPolicy::TapedSample SquashedGaussianPolicy::rsample(
    nn::Tape& tape, const nn::TapedMlp& taped, nn::Val obs,
    const nn::Matrix& noise) const {
  const int d = action_dim();
  nn::Val out = taped.forward(obs);
  nn::Val mean = nn::cols(out, 0, d);
  nn::Val log_std = nn::clamp(nn::cols(out, d, d), kLogStdMin, kLogStdMax);
  nn::Val sigma = nn::exp(log_std);
  nn::Val eps = tape.constant(noise);
  nn::Val u = mean + sigma * eps;

  // log N(u; mean, sigma): eps is the standardized residual by construction.
  nn::Val gauss = -0.5 * square(eps) - log_std - kHalfLog2Pi;
  // log|d action / d u| = log(half) + 2*(log 2 - u - softplus(-2u)).
  nn::Val squash_corr = 2.0 * ((-1.0 * u) - softplus(-2.0 * u) + std::log(2.0));
  nn::Val lp = row_sum(gauss - squash_corr) - log_half_sum_;

  const Eigen::Index b = noise.rows();
  nn::Val halfm = tape.constant(half_.transpose().replicate(b, 1));
  nn::Val centerm = tape.constant(center_.transpose().replicate(b, 1));
  nn::Val action = centerm + halfm * nn::tanh(u);
  return {action, lp};
}

nn::Val SquashedGaussianPolicy::log_prob_taped(nn::Tape& tape,
                                               const nn::TapedMlp& taped,
                                               nn::Val obs,
                                               const nn::Matrix& actions) const {
  const int d = action_dim();
  const Eigen::Index b = actions.rows();
  nn::Val out = taped.forward(obs);
  nn::Val mean = nn::cols(out, 0, d);
  nn::Val log_std = nn::clamp(nn::cols(out, d, d), kLogStdMin, kLogStdMax);
  nn::Val sigma = nn::exp(log_std);

  nn::Matrix u_const(b, d);
  for (Eigen::Index i = 0; i < b; ++i) {
    for (int j = 0; j < d; ++j) {
      u_const(i, j) = atanh_clipped((actions(i, j) - center_[j]) / half_[j]);
    }
  }
  nn::Val u = tape.constant(u_const);
  nn::Val z = (u - mean) * nn::exp(-1.0 * log_std);
  nn::Val gauss = -0.5 * square(z) - log_std - kHalfLog2Pi;
  nn::Val squash_corr = 2.0 * ((-1.0 * u) - softplus(-2.0 * u) + std::log(2.0));
  return row_sum(gauss - squash_corr) - log_half_sum_;
}

}  // namespace safemult
