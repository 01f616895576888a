#include "safemult/adam.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace safemult::nn {

void adam_step(AdamState& state, Vector& params, const Vector& grads,
               std::string_view block_name) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    std::ostringstream os;
    os << "adam_step[" << block_name << "]: size mismatch, params "
       << params.size() << ", grads " << grads.size() << ", moments "
       << state.m.size();
    throw std::invalid_argument(os.str());
  }
  for (Eigen::Index i = 0; i < grads.size(); ++i) {
    if (std::isnan(grads[i])) {
      std::ostringstream os;
      os << "adam_step[" << block_name << "]: NaN gradient at index " << i;
      throw std::runtime_error(os.str());
    }
  }
  state.step += 1;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
  state.v = state.beta2 * state.v +
            (1.0 - state.beta2) * grads.cwiseProduct(grads);
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  params.array() -= state.lr * (state.m.array() / bc1) /
                    ((state.v.array() / bc2).sqrt() + state.eps);
}

}  // namespace safemult::nn
