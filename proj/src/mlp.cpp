#include "safemult/mlp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace safemult::nn {

Mlp::Mlp(std::vector<int> sizes, Activation act, Head head, Rng& rng)
    : sizes_(std::move(sizes)), act_(act), head_(head) {
  if (sizes_.size() < 2) {
    throw std::invalid_argument("Mlp: need at least input and output sizes");
  }
  for (int s : sizes_) {
    if (s <= 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int fan_in = sizes_[l];
    const int fan_out = sizes_[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Matrix w(fan_out, fan_in);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        w(i, j) = rng.uniform(-bound, bound);
      }
    }
    weights.push_back(std::move(w));
    biases.push_back(Vector::Zero(fan_out));
  }
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size()) +
         static_cast<std::size_t>(biases[l].size());
  }
  return n;
}

Vector Mlp::flatten() const {
  Vector flat(param_count());
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const Matrix& w = weights[l];
    flat.segment(at, w.size()) = Eigen::Map<const Vector>(w.data(), w.size());
    at += w.size();
    flat.segment(at, biases[l].size()) = biases[l];
    at += biases[l].size();
  }
  return flat;
}

void Mlp::set_from_flat(const Vector& flat) {
  if (static_cast<std::size_t>(flat.size()) != param_count()) {
    std::ostringstream os;
    os << "Mlp::set_from_flat: expected " << param_count() << " values, got "
       << flat.size();
    throw std::invalid_argument(os.str());
  }
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Matrix& w = weights[l];
    Eigen::Map<Vector>(w.data(), w.size()) = flat.segment(at, w.size());
    at += w.size();
    biases[l] = flat.segment(at, biases[l].size());
    at += biases[l].size();
  }
}

void Mlp::check_input(Eigen::Index got) const {
  if (got != sizes_.front()) {
    std::ostringstream os;
    os << "Mlp: input has " << got << " features, network expects "
       << sizes_.front();
    throw std::invalid_argument(os.str());
  }
}

Matrix Mlp::eval(const Matrix& x) const {
  check_input(x.cols());
  Matrix h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Matrix z = h * weights[l].transpose();
    z.rowwise() += biases[l].transpose();
    const bool last = (l + 1 == weights.size());
    if (!last) {
      if (act_ == Activation::Tanh) {
        h = z.array().tanh().matrix();
      } else {
        h = z.cwiseMax(0.0);
      }
    } else {
      switch (head_) {
        case Head::Identity:
          h = std::move(z);
          break;
        case Head::Sigmoid:
          h = z.unaryExpr(&detail::sigmoid_clamped);
          break;
        case Head::Squash:
          h = z.array().tanh().matrix();
          break;
      }
    }
  }
  return h;
}

Vector Mlp::eval(const Vector& x) const {
  Matrix row = x.transpose();
  return eval(row).row(0).transpose();
}

TapedMlp::TapedMlp(Tape& tape, const Mlp& net, bool trainable)
    : tape_(&tape), net_(&net), trainable_(trainable) {
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    if (trainable) {
      w_.push_back(tape.leaf(net.weights[l]));
      b_.push_back(tape.leaf(net.biases[l]));
    } else {
      w_.push_back(tape.constant(net.weights[l]));
      b_.push_back(tape.constant(net.biases[l]));
    }
  }
}

Val TapedMlp::forward(Val x) const {
  net_->check_input(x.value().cols());
  Val h = x;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    Val z = linear(h, w_[l], b_[l]);
    const bool last = (l + 1 == w_.size());
    if (!last) {
      h = (net_->act_ == Activation::Tanh) ? nn::tanh(z) : relu(z);
    } else {
      switch (net_->head_) {
        case Head::Identity:
          h = z;
          break;
        case Head::Sigmoid:
          h = sigmoid(z);
          break;
        case Head::Squash:
          h = nn::tanh(z);
          break;
      }
    }
  }
  return h;
}

Vector TapedMlp::flat_grad() const {
  if (!trainable_) {
    throw std::logic_error("TapedMlp::flat_grad: network was put on tape as constant");
  }
  Vector flat(net_->param_count());
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    const Matrix& gw = tape_->grad(w_[l]);
    flat.segment(at, gw.size()) =
        Eigen::Map<const Vector>(gw.data(), gw.size());
    at += gw.size();
    const Matrix& gb = tape_->grad(b_[l]);
    flat.segment(at, gb.size()) =
        Eigen::Map<const Vector>(gb.data(), gb.size());
    at += gb.size();
  }
  return flat;
}

void polyak(Mlp& target, const Mlp& online, double rho) {
  if (target.param_count() != online.param_count()) {
    throw std::invalid_argument("polyak: parameter shapes do not match");
  }
  for (std::size_t l = 0; l < target.weights.size(); ++l) {
    target.weights[l] = rho * target.weights[l] + (1.0 - rho) * online.weights[l];
    target.biases[l] = rho * target.biases[l] + (1.0 - rho) * online.biases[l];
  }
}

}  // namespace safemult::nn
