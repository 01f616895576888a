#include "safemult/critics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace safemult::critics {

LagrangeMultiplier::LagrangeMultiplier(double init, double dual_lr,
                                       double c_max)
    : lambda_(init), dual_lr_(dual_lr), c_max_(c_max) {
  if (init < 0.0) {
    throw std::invalid_argument("LagrangeMultiplier: lambda_init must be >= 0");
  }
}

void LagrangeMultiplier::ascend(double constraint_level) {
  lambda_ = std::max(0.0, lambda_ + dual_lr_ * constraint_level);
}

double v_mult(double v, double v_min, double phi) {
  if (!(phi >= 0.0 && phi <= 1.0)) {
    std::ostringstream os;
    os << "v_mult: constraint-violation probability " << phi
       << " outside [0,1]";
    throw std::invalid_argument(os.str());
  }
  return (v - v_min) * (1.0 - phi) + v_min;
}

Val v_mult(Val v, double v_min, Val phi) {
  return (v - v_min) * (1.0 - phi) + v_min;
}

AdvantageVersion parse_advantage_version(const std::string& name) {
  if (name == "v1" || name == "V1") return AdvantageVersion::V1;
  if (name == "v2" || name == "V2") return AdvantageVersion::V2;
  if (name == "v3" || name == "V3") return AdvantageVersion::V3;
  throw std::invalid_argument("unknown advantage version '" + name + "'");
}

double advantage(AdvantageVersion version, const AdvantageInputs& in) {
  const double keep = 1.0 - in.done;
  switch (version) {
    case AdvantageVersion::V1:
      return in.reward + in.gamma * keep * in.v_mult_next - in.v_mult_s;
    case AdvantageVersion::V2:
      return in.q_mult_sa - in.v_mult_s;
    case AdvantageVersion::V3: {
      const double bootstrap =
          std::clamp(in.cost + in.gamma_c * keep * in.phi_next, 0.0, 1.0);
      return (in.q_bar - in.q_min) * (1.0 - bootstrap) + in.q_min -
             in.v_mult_s;
    }
  }
  throw std::invalid_argument("advantage: unknown version tag");
}

std::vector<double> gae(std::span<const double> deltas,
                        std::span<const double> done, double gamma,
                        double lambda_gae) {
  if (deltas.size() != done.size()) {
    throw std::invalid_argument("gae: deltas and done flags differ in length");
  }
  std::vector<double> adv(deltas.size(), 0.0);
  double carry = 0.0;
  for (std::size_t i = deltas.size(); i-- > 0;) {
    carry = deltas[i] + gamma * lambda_gae * (1.0 - done[i]) * carry;
    adv[i] = carry;
  }
  return adv;
}

double safety_target(double cost, double done, double gamma_c,
                     double psi_targ_max) {
  const double y = cost + gamma_c * (1.0 - done) * psi_targ_max;
  if (y < -1e-9 || y > 1.0 + 1e-9) {
    std::ostringstream os;
    os << "safety_target: target " << y
       << " outside [0,1]; upstream critic or cost contract is broken";
    throw std::logic_error(os.str());
  }
  return std::clamp(y, 0.0, 1.0);
}

double bce(double prediction, double target) {
  if (!(prediction > 0.0 && prediction < 1.0)) {
    std::ostringstream os;
    os << "bce: prediction " << prediction << " is not strictly inside (0,1)";
    throw std::invalid_argument(os.str());
  }
  return -(target * std::log(prediction) +
           (1.0 - target) * std::log(1.0 - prediction));
}

Val bce_mean(Val predictions, const Matrix& targets) {
  nn::Tape& tape = *predictions.tape;
  Val y = tape.constant(targets);
  return -1.0 * mean(y * nn::log(predictions) +
                     (1.0 - y) * nn::log(1.0 - predictions));
}

SafetyCritic::SafetyCritic(const std::vector<int>& sizes, nn::Activation act,
                           double rho_c, double gamma_c, Rng& rng)
    : psi1(sizes, act, nn::Head::Sigmoid, rng),
      psi2(sizes, act, nn::Head::Sigmoid, rng),
      targ1(psi1),
      targ2(psi2),
      rho_c(rho_c),
      gamma_c(gamma_c) {}

Matrix SafetyCritic::max_online(const Matrix& input) const {
  return psi1.eval(input).cwiseMax(psi2.eval(input));
}

Matrix SafetyCritic::max_target(const Matrix& input) const {
  return targ1.eval(input).cwiseMax(targ2.eval(input));
}

void SafetyCritic::polyak_update() {
  nn::polyak(targ1, psi1, rho_c);
  nn::polyak(targ2, psi2, rho_c);
}

TwinRewardCritic::TwinRewardCritic(const std::vector<int>& sizes,
                                   nn::Activation act, double rho,
                                   double gamma, Rng& rng)
    : q1(sizes, act, nn::Head::Identity, rng),
      q2(sizes, act, nn::Head::Identity, rng),
      targ1(q1),
      targ2(q2),
      rho(rho),
      gamma(gamma) {}

Matrix TwinRewardCritic::min_online(const Matrix& input) const {
  return q1.eval(input).cwiseMin(q2.eval(input));
}

Matrix TwinRewardCritic::min_target(const Matrix& input) const {
  return targ1.eval(input).cwiseMin(targ2.eval(input));
}

void TwinRewardCritic::polyak_update() {
  nn::polyak(targ1, q1, rho);
  nn::polyak(targ2, q2, rho);
}

}  // namespace safemult::critics
