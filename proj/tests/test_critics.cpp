#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "safemult/adam.hpp"
#include "safemult/critics.hpp"

using namespace safemult;
using namespace safemult::critics;
using namespace safemult::nn;

TEST_CASE("v_mult endpoint identities and direct arithmetic") {
  CHECK(v_mult(10.0, -5.0, 1.0) == -5.0);   // fully unsafe collapses to floor
  CHECK(v_mult(10.0, -5.0, 0.0) == 10.0);   // fully safe passes through
  CHECK(v_mult(10.0, -5.0, 0.4) == doctest::Approx(4.0));
  CHECK(q_mult(2.0, 0.0, 0.25) == doctest::Approx(1.5));
  CHECK(q_mult(2.0, 0.0, 1.0) == 0.0);
  CHECK(q_mult(2.0, 0.0, 0.0) == 2.0);
}

TEST_CASE("v_mult rejects probabilities outside [0,1]") {
  CHECK_THROWS_AS(v_mult(1.0, 0.0, -0.01), std::invalid_argument);
  CHECK_THROWS_AS(v_mult(1.0, 0.0, 1.01), std::invalid_argument);
  CHECK_THROWS_AS(v_mult(1.0, 0.0, std::nan("")), std::invalid_argument);
}

TEST_CASE("v_mult below the floor lowers the running floor instead of failing") {
  RunningMin floor;
  floor.observe(-1.0);
  const double out = v_mult(-3.0, floor, 0.5);
  CHECK(floor.value() == -3.0);
  CHECK(out == doctest::Approx(-3.0));  // v == new floor, phi irrelevant
}

TEST_CASE("v_mult boundedness and monotonicity over random inputs") {
  Rng rng(31);
  for (int i = 0; i < 10000; ++i) {
    const double v_min = rng.uniform(-50, 10);
    const double v = v_min + rng.uniform(0, 60);
    const double phi = rng.uniform(0, 1);
    const double out = v_mult(v, v_min, phi);
    CHECK(out >= v_min - 1e-12);
    CHECK(out <= v + 1e-12);
    const double phi2 = std::min(1.0, phi + rng.uniform(0, 1 - phi));
    CHECK(v_mult(v, v_min, phi2) <= out + 1e-12);
  }
}

TEST_CASE("taped v_mult agrees with the scalar form") {
  Matrix vv(3, 1), pp(3, 1);
  vv << 10.0, 2.0, -1.0;
  pp << 0.4, 0.25, 0.0;
  Tape tape;
  Val v = tape.leaf(vv);
  Val p = tape.leaf(pp);
  Val out = v_mult(v, -5.0, p);
  CHECK(out.value()(0, 0) == doctest::Approx(v_mult(10.0, -5.0, 0.4)));
  CHECK(out.value()(1, 0) == doctest::Approx(v_mult(2.0, -5.0, 0.25)));
  CHECK(out.value()(2, 0) == doctest::Approx(v_mult(-1.0, -5.0, 0.0)));
}

TEST_CASE("advantages reduce to the standard advantage when safety vanishes") {
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    AdvantageInputs in;
    in.reward = rng.uniform(-1, 1);
    in.done = 0.0;
    in.gamma = 0.99;
    in.gamma_c = 0.8;
    const double v_s = rng.uniform(-5, 5);
    const double v_next = rng.uniform(-5, 5);
    // Consistent critics with no clipping and zero violation probability.
    in.v_mult_s = v_s;
    in.v_mult_next = v_next;
    in.q_bar = in.reward + in.gamma * v_next;
    in.q_mult_sa = in.q_bar;
    in.q_min = rng.uniform(-10, -6);
    in.phi_next = 0.0;
    in.cost = 0.0;
    const double standard = in.reward + in.gamma * v_next - v_s;
    CHECK(advantage(AdvantageVersion::V1, in) ==
          doctest::Approx(standard).epsilon(1e-12));
    CHECK(advantage(AdvantageVersion::V2, in) ==
          doctest::Approx(standard).epsilon(1e-12));
    // V3 couples q_min into the bracket; with phi == 0 and cost == 0 the
    // bracket is 1 and the q_min terms cancel exactly.
    CHECK(advantage(AdvantageVersion::V3, in) ==
          doctest::Approx(standard).epsilon(1e-12));
  }
}

TEST_CASE("V3 on a constraint-terminal step collapses to q_min minus V_mult") {
  AdvantageInputs in;
  in.cost = 1.0;
  in.done = 1.0;
  in.q_bar = 7.0;
  in.q_min = -2.0;
  in.v_mult_s = 1.5;
  in.phi_next = 0.9;  // ignored: (1-d) kills the bootstrap
  CHECK(advantage(AdvantageVersion::V3, in) ==
        doctest::Approx(-2.0 - 1.5));
}

TEST_CASE("V1 direct arithmetic example") {
  AdvantageInputs in;
  in.reward = -0.1;
  in.gamma = 0.99;
  in.v_mult_next = 4.0;
  in.v_mult_s = 3.0;
  in.done = 0.0;
  CHECK(advantage(AdvantageVersion::V1, in) == doctest::Approx(0.86));
}

TEST_CASE("gae with lambda 0 returns the one-step deltas") {
  const std::vector<double> deltas = {0.5, -1.0, 2.0};
  const std::vector<double> done = {0, 0, 1};
  const auto adv = gae(deltas, done, 0.99, 0.0);
  CHECK(adv[0] == 0.5);
  CHECK(adv[1] == -1.0);
  CHECK(adv[2] == 2.0);
}

TEST_CASE("gae with lambda 1 telescopes to return minus value") {
  // V1 deltas with gamma-discounted V_mult bootstrap; lambda = 1 must give
  // sum of discounted rewards minus V_mult(s_t) on a terminal episode.
  const double gamma = 0.95;
  const std::vector<double> rewards = {-0.1, -0.1, -0.1, 40.0};
  const std::vector<double> vmult = {1.0, 2.0, -0.5, 3.0};
  std::vector<double> deltas(4), done = {0, 0, 0, 1};
  for (int i = 0; i < 4; ++i) {
    const double v_next = (i < 3) ? vmult[i + 1] : 0.0;
    deltas[i] = rewards[i] + gamma * (1.0 - done[i]) * v_next - vmult[i];
  }
  const auto adv = gae(deltas, done, gamma, 1.0);
  double ret = 0.0;
  for (int i = 3; i >= 0; --i) ret = rewards[i] + gamma * ret;
  CHECK(adv[0] == doctest::Approx(ret - vmult[0]).epsilon(1e-12));
}

TEST_CASE("gae three-step hand recursion") {
  const std::vector<double> deltas = {1.0, -2.0, 0.5};
  const std::vector<double> done = {0, 0, 0};
  const double gamma = 0.9, lam = 0.8;
  // Hand evaluation, back to front.
  const double a2 = 0.5;
  const double a1 = -2.0 + gamma * lam * a2;
  const double a0 = 1.0 + gamma * lam * a1;
  const auto adv = gae(deltas, done, gamma, lam);
  CHECK(adv[2] == doctest::Approx(a2));
  CHECK(adv[1] == doctest::Approx(a1));
  CHECK(adv[0] == doctest::Approx(a0));
}

TEST_CASE("safety_target arithmetic and range guard") {
  CHECK(safety_target(1.0, 1.0, 0.8, 0.7) == 1.0);
  CHECK(safety_target(0.0, 1.0, 0.8, 0.7) == 0.0);
  CHECK(safety_target(0.0, 0.0, 0.8, 0.5) == doctest::Approx(0.4));
  CHECK_THROWS_AS(safety_target(0.0, 0.0, 0.8, 1.3), std::logic_error);
  CHECK_THROWS_AS(safety_target(1.0, 0.0, 0.8, 0.5), std::logic_error);
}

TEST_CASE("bce values") {
  CHECK(bce(0.5, 0.5) == doctest::Approx(std::log(2.0)));
  CHECK(bce(0.9, 1.0) == doctest::Approx(-std::log(0.9)));
  CHECK(bce(1e-9, 0.0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(bce(1.0 - 1e-12, 1.0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK_THROWS_AS(bce(0.0, 0.5), std::invalid_argument);
}

TEST_CASE("taped bce matches the scalar mean") {
  Tape tape;
  Matrix p(3, 1), y(3, 1);
  p << 0.5, 0.9, 0.2;
  y << 0.5, 1.0, 0.0;
  Val pred = tape.leaf(p);
  const double expected = (bce(0.5, 0.5) + bce(0.9, 1.0) + bce(0.2, 0.0)) / 3.0;
  CHECK(bce_mean(pred, y).scalar() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("dual ascent examples and projection") {
  LagrangeMultiplier lm(1.0, 0.1, 0.0);
  lm.ascend(0.3);
  CHECK(lm.value() == doctest::Approx(1.03).epsilon(1e-12));

  LagrangeMultiplier small(0.05, 0.1, 0.0);
  small.ascend(-10.0);
  CHECK(small.value() == 0.0);

  LagrangeMultiplier fixed(2.0, 0.1, 0.0);
  fixed.ascend(0.0);
  CHECK(fixed.value() == 2.0);
}

TEST_CASE("dual variable stays nonnegative for any input sequence") {
  Rng rng(3);
  LagrangeMultiplier lm(rng.uniform(0, 5), 0.5, 0.0);
  for (int i = 0; i < 1000; ++i) {
    lm.ascend(rng.uniform(-20, 20));
    CHECK(lm.value() >= 0.0);
  }
}

TEST_CASE("polyak blending endpoints and rate") {
  Rng rng(41);
  Mlp online({2, 3, 1}, Activation::Tanh, Head::Identity, rng);
  Mlp target({2, 3, 1}, Activation::Tanh, Head::Identity, rng);

  Mlp t1 = target;
  polyak(t1, online, 1.0);
  CHECK((t1.flatten() - target.flatten()).cwiseAbs().maxCoeff() == 0.0);

  Mlp t0 = target;
  polyak(t0, online, 0.0);
  CHECK((t0.flatten() - online.flatten()).cwiseAbs().maxCoeff() == 0.0);

  // Scalar check: target 0, online 1, rho 0.995 -> 0.005.
  Mlp a = online, b = online;
  a.weights[0].setZero();
  b.weights[0].setOnes();
  polyak(a, b, 0.995);
  CHECK(a.weights[0](0, 0) == doctest::Approx(0.005));
}

TEST_CASE("target drift shrinks by rho^n with frozen online nets") {
  Rng rng(43);
  Mlp online({2, 4, 1}, Activation::Tanh, Head::Identity, rng);
  Mlp target({2, 4, 1}, Activation::Tanh, Head::Identity, rng);
  const double rho = 0.9;
  const double d0 = (target.flatten() - online.flatten()).norm();
  const int n = 17;
  for (int i = 0; i < n; ++i) polyak(target, online, rho);
  const double dn = (target.flatten() - online.flatten()).norm();
  CHECK(dn == doctest::Approx(d0 * std::pow(rho, n)).epsilon(1e-9));
}

TEST_CASE("running minimum never increases") {
  Rng rng(47);
  RunningMin m;
  double prev = m.value();
  for (int i = 0; i < 1000; ++i) {
    m.observe(rng.uniform(-100, 100));
    CHECK(m.value() <= prev);
    prev = m.value();
  }
}

TEST_CASE("gradient decomposition of q_mult") {
  // d/dtheta of mean q_mult must equal the (1-Psi)-weighted Q-gradient
  // minus the (Q - q_min)-weighted Psi-gradient, with theta entering both
  // critics through the action input.
  Rng rng(53);
  for (int trial = 0; trial < 5; ++trial) {
    Mlp actor({3, 8, 2}, Activation::Tanh, Head::Squash, rng);
    Mlp qnet({5, 8, 1}, Activation::Tanh, Head::Identity, rng);
    Mlp pnet({5, 8, 1}, Activation::Tanh, Head::Sigmoid, rng);
    Matrix obs(4, 3);
    for (Eigen::Index i = 0; i < obs.size(); ++i) {
      obs.data()[i] = rng.uniform(-1, 1);
    }
    const double q_min = -2.5;

    auto build = [&](Tape& tape, TapedMlp& ta) {
      Val o = tape.constant(obs);
      Val act = ta.forward(o);
      TapedMlp tq(tape, qnet, false);
      TapedMlp tp(tape, pnet, false);
      Val sa = concat_cols(o, act);
      return std::pair{tq.forward(sa), tp.forward(sa)};
    };

    Tape t1;
    TapedMlp a1(t1, actor, true);
    auto [q_a, psi_a] = build(t1, a1);
    t1.backward(mean(q_mult(q_a, q_min, psi_a)));
    const Vector composite = a1.flat_grad();

    Tape t2;
    TapedMlp a2(t2, actor, true);
    auto [q_b, psi_b] = build(t2, a2);
    t2.backward(mean(stop_gradient(1.0 - psi_b) * q_b));
    const Vector term1 = a2.flat_grad();

    Tape t3;
    TapedMlp a3(t3, actor, true);
    auto [q_c, psi_c] = build(t3, a3);
    t3.backward(mean(stop_gradient(q_c - q_min) * psi_c));
    const Vector term2 = a3.flat_grad();

    CHECK((composite - (term1 - term2)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("pessimistic aggregation of critic bundles") {
  Rng rng(59);
  SafetyCritic sc({3, 4, 1}, Activation::Tanh, 0.99, 0.8, rng);
  TwinRewardCritic rc({3, 4, 1}, Activation::Tanh, 0.99, 0.99, rng);
  Matrix x = Matrix::Random(6, 3);
  const Matrix m1 = sc.psi1.eval(x), m2 = sc.psi2.eval(x);
  const Matrix mx = sc.max_online(x);
  const Matrix q1 = rc.q1.eval(x), q2 = rc.q2.eval(x);
  const Matrix qn = rc.min_online(x);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    CHECK(mx(i, 0) == std::max(m1(i, 0), m2(i, 0)));
    CHECK(qn(i, 0) == std::min(q1(i, 0), q2(i, 0)));
    CHECK(mx(i, 0) > 0.0);
    CHECK(mx(i, 0) < 1.0);
  }
  // Targets start as exact copies.
  CHECK((sc.max_target(x) - mx).cwiseAbs().maxCoeff() == 0.0);
  CHECK((rc.min_target(x) - qn).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("parse_advantage_version rejects unknown tags") {
  CHECK(parse_advantage_version("v1") == AdvantageVersion::V1);
  CHECK(parse_advantage_version("V3") == AdvantageVersion::V3);
  CHECK_THROWS_AS(parse_advantage_version("v4"), std::invalid_argument);
}
