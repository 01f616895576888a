#include "safemult/cmdp.hpp"

#include <sstream>
#include <stdexcept>

namespace safemult::cmdp {

const char* to_string(DoneKind k) {
  switch (k) {
    case DoneKind::None: return "none";
    case DoneKind::Goal: return "goal";
    case DoneKind::Constraint: return "constraint";
    case DoneKind::Timeout: return "timeout";
  }
  return "?";
}

double clip_reward(double raw_reward, DoneKind kind, const Env& env) {
  const double floor = env.reward_floor();
  if (kind == DoneKind::Constraint) {
    return floor;
  }
  if (raw_reward < floor - 1e-12) {
    std::ostringstream os;
    os << "clip_reward: constraint-free reward " << raw_reward
       << " lies below the declared floor " << floor;
    throw std::logic_error(os.str());
  }
  return raw_reward;
}

Transition make_transition(const Vector& s, const Vector& a,
                           const StepResult& r, bool clip, const Env& env) {
  Transition t;
  t.s = s;
  t.a = a;
  t.reward = clip ? clip_reward(r.raw_reward, r.kind, env) : r.raw_reward;
  t.cost = r.cost();
  t.s_next = r.obs;
  t.done = (r.kind == DoneKind::Goal || r.kind == DoneKind::Constraint);
  t.kind = r.kind;
  return t;
}

std::vector<double> cost_to_go(std::span<const Transition> episode,
                               double gamma_c) {
  std::vector<double> c(episode.size(), 0.0);
  if (episode.empty()) return c;
  const std::size_t last = episode.size() - 1;
  if (episode[last].kind != DoneKind::Constraint) return c;
  double pow = 1.0;
  for (std::size_t i = 0; i <= last; ++i) {
    c[last - i] = pow;
    pow *= gamma_c;
  }
  return c;
}

std::vector<double> reward_to_go(std::span<const double> rewards, double gamma,
                                 double bootstrap_value) {
  std::vector<double> r(rewards.size(), 0.0);
  double acc = bootstrap_value;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    r[i] = acc;
  }
  return r;
}

TransitionLogger::TransitionLogger(const std::string& path)
    : out_(path, std::ios::app) {
  if (!out_) {
    throw std::runtime_error("TransitionLogger: cannot open '" + path + "'");
  }
}

void TransitionLogger::log(const Transition& t) {
  if (!wrote_header_) {
    obs_dim_ = static_cast<int>(t.s.size());
    act_dim_ = static_cast<int>(t.a.size());
    out_ << "# s[" << obs_dim_ << "] a[" << act_dim_
         << "] reward cost s_next[" << obs_dim_ << "] done done_kind\n";
    wrote_header_ = true;
  }
  auto put = [&](const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out_ << v[i] << ' ';
  };
  put(t.s);
  put(t.a);
  out_ << t.reward << ' ' << t.cost << ' ';
  put(t.s_next);
  out_ << (t.done ? 1 : 0) << ' ' << to_string(t.kind) << '\n';
}

}  // namespace safemult::cmdp
