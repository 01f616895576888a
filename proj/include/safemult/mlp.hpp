#pragma once

#include <string>
#include <vector>

#include "safemult/rng.hpp"
#include "safemult/tape.hpp"

namespace safemult::nn {

enum class Activation { Tanh, Relu };
enum class Head { Identity, Sigmoid, Squash };

// Fully connected network with a configurable hidden activation and output
// head. Parameters are plain dense matrices; gradients are produced by
// putting the network on a Tape via on_tape().
class Mlp {
 public:
  Mlp() = default;
  // sizes = {in, hidden..., out}; weights Glorot-uniform, biases zero.
  Mlp(std::vector<int> sizes, Activation act, Head head, Rng& rng);

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  Activation activation() const { return act_; }
  Head head() const { return head_; }

  std::size_t param_count() const;
  Vector flatten() const;
  void set_from_flat(const Vector& flat);

  // Straight evaluation without recording; x is batch x input_dim.
  Matrix eval(const Matrix& x) const;
  Vector eval(const Vector& x) const;

  std::vector<Matrix> weights;  // layer l: sizes[l+1] x sizes[l]
  std::vector<Vector> biases;   // layer l: sizes[l+1]

 private:
  std::vector<int> sizes_;
  Activation act_ = Activation::Tanh;
  Head head_ = Head::Identity;

  void check_input(Eigen::Index got) const;
  friend class TapedMlp;
};

// The network's parameters materialized as leaves on one tape. Repeated
// forward() calls share the same leaves, so gradients from several
// evaluation sites accumulate into one place.
class TapedMlp {
 public:
  // trainable=false registers the parameters as constants; gradients then
  // flow through the inputs only.
  TapedMlp(Tape& tape, const Mlp& net, bool trainable);

  Val forward(Val x) const;

  // Flat gradient in the same order as Mlp::flatten(). Only valid after
  // backward(); requires trainable construction.
  Vector flat_grad() const;

  const Mlp& net() const { return *net_; }

 private:
  Tape* tape_;
  const Mlp* net_;
  bool trainable_;
  std::vector<Val> w_;
  std::vector<Val> b_;
};

// Convex parameter blend: target <- rho * target + (1 - rho) * online.
void polyak(Mlp& target, const Mlp& online, double rho);

}  // namespace safemult::nn
