#pragma once

#include <span>
#include <vector>

#include "safemult/mlp.hpp"
#include "safemult/rng.hpp"

namespace safemult::critics {

using nn::Matrix;
using nn::Mlp;
using nn::Val;
using nn::Vector;

// Running lower bound on a critic. Starts at 0 and only ever decreases.
class RunningMin {
 public:
  double value() const { return min_; }
  void observe(double v) {
    if (v < min_) min_ = v;
  }
  void observe(const Matrix& values) {
    if (values.size() > 0) observe(values.minCoeff());
  }

 private:
  double min_ = 0.0;
};

// Nonnegative dual variable with projected gradient ascent.
class LagrangeMultiplier {
 public:
  LagrangeMultiplier() = default;
  LagrangeMultiplier(double init, double dual_lr, double c_max);

  // lambda <- max(0, lambda + dual_lr * constraint_level).
  void ascend(double constraint_level);

  double value() const { return lambda_; }
  double c_max() const { return c_max_; }
  double dual_lr() const { return dual_lr_; }

 private:
  double lambda_ = 0.0;
  double dual_lr_ = 0.0;
  double c_max_ = 0.0;
};

// Multiplicative fusion of a reward critic value with the probability of
// constraint satisfaction: (v - floor) * (1 - phi) + floor. phi outside
// [0,1] is a contract break; v below the floor is handled by observing it
// into the RunningMin first.
double v_mult(double v, double v_min, double phi);
inline double q_mult(double q, double q_min, double psi) {
  return v_mult(q, q_min, psi);
}

// Observes v into the running floor first, so a value below the current
// minimum lowers the floor instead of failing the precondition.
inline double v_mult(double v, RunningMin& floor, double phi) {
  floor.observe(v);
  return v_mult(v, floor.value(), phi);
}

// Taped variant used inside actor objectives; the floor enters as a
// constant.
Val v_mult(Val v, double v_min, Val phi);
inline Val q_mult(Val q, double q_min, Val psi) { return v_mult(q, q_min, psi); }

enum class AdvantageVersion { V1, V2, V3 };

AdvantageVersion parse_advantage_version(const std::string& name);

// Everything a one-step multiplicative advantage can need; fill the fields
// relevant to the chosen version.
struct AdvantageInputs {
  double reward = 0.0;      // clipped reward of the transition
  double cost = 0.0;        // r_c
  double done = 0.0;        // bootstrap flag
  double gamma = 0.99;
  double gamma_c = 0.8;
  double v_mult_s = 0.0;    // V_mult at s
  double v_mult_next = 0.0; // V_mult at s'
  double q_mult_sa = 0.0;   // Q_mult at (s,a), V2 only
  double q_bar = 0.0;       // raw reward critic at (s,a), V3 only
  double q_min = 0.0;       // floor paired with q_bar, V3 only
  double phi_next = 0.0;    // safety critic at s', V3 only
};

double advantage(AdvantageVersion version, const AdvantageInputs& in);

// GAE recursion over per-step one-step advantages within one episode
// segment; `done` suppresses nothing here beyond what the deltas already
// encode, the lambda chain simply stops at the segment end.
std::vector<double> gae(std::span<const double> deltas,
                        std::span<const double> done, double gamma,
                        double lambda_gae);

// TD target for the safety critic: r_c + gamma_c * (1-d) * psi_targ_max,
// which must land in [0,1] up to 1e-9 or the upstream contract is broken.
double safety_target(double cost, double done, double gamma_c,
                     double psi_targ_max);

// Binary cross-entropy of an interior prediction against a soft label.
double bce(double prediction, double target);
// Batch-mean BCE on the tape; targets are a constant matrix.
Val bce_mean(Val predictions, const Matrix& targets);

// Twin safety critics with target copies. Inputs are (s) or (s,a)
// depending on the input dimension the networks were built with; the
// pessimistic aggregate is the max over the twins.
struct SafetyCritic {
  Mlp psi1, psi2;
  Mlp targ1, targ2;
  double rho_c = 0.995;
  double gamma_c = 0.8;

  SafetyCritic() = default;
  SafetyCritic(const std::vector<int>& sizes, nn::Activation act, double rho_c,
               double gamma_c, Rng& rng);

  Matrix max_online(const Matrix& input) const;
  Matrix max_target(const Matrix& input) const;
  void polyak_update();
};

// Twin reward critics (s,a) -> Q with target copies; the pessimistic
// aggregate is the min over the twins.
struct TwinRewardCritic {
  Mlp q1, q2;
  Mlp targ1, targ2;
  double rho = 0.995;
  double gamma = 0.99;

  TwinRewardCritic() = default;
  TwinRewardCritic(const std::vector<int>& sizes, nn::Activation act,
                   double rho, double gamma, Rng& rng);

  Matrix min_online(const Matrix& input) const;
  Matrix min_target(const Matrix& input) const;
  void polyak_update();
};

}  // namespace safemult::critics
