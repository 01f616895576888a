#pragma once

#include <string_view>

#include "safemult/mlp.hpp"
#include "safemult/tape.hpp"

namespace safemult::nn {

struct AdamState {
  Vector m;
  Vector v;
  long step = 0;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  AdamState(std::size_t n, double learning_rate)
      : m(Vector::Zero(n)), v(Vector::Zero(n)), lr(learning_rate) {}
};

// Standard Adam with bias correction, applied in place. Throws if the
// gradient contains NaN, naming the offending parameter block and index.
void adam_step(AdamState& state, Vector& params, const Vector& grads,
               std::string_view block_name);

// Adam bound to one network: flattens the gradient off a tape, steps, and
// writes the parameters back.
class MlpOptimizer {
 public:
  MlpOptimizer() = default;
  MlpOptimizer(const Mlp& net, double lr, std::string name)
      : state_(net.param_count(), lr), name_(std::move(name)) {}

  void step(Mlp& net, const TapedMlp& taped) {
    Vector params = net.flatten();
    adam_step(state_, params, taped.flat_grad(), name_);
    net.set_from_flat(params);
  }

  AdamState& state() { return state_; }

 private:
  AdamState state_;
  std::string name_;
};

}  // namespace safemult::nn
