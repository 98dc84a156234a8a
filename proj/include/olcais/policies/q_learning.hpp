#pragma once

// RL-agent policy: tabular Q-learning over a rounded greenness/resilience
// state, epsilon-greedy, with episodes that end on the first autonomous action.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "olcais/types.hpp"

namespace olcais::policy {

struct ActionObservation {
  ActionKind action = ActionKind::Autonomous;
  double co2 = 0.0;
  double run_time = 0.0;
  double p_hat = 0.0;
};

using ActionVector = std::vector<ActionObservation>;

/// States are kept as integer hundredths; 1.65 is key 165.
using StateKey = long long;

/// Rounds half-up to two decimals. The tiny relative nudge absorbs binary
/// representation error so that a decimal 1.655 rounds to 1.66.
inline StateKey round_state(double raw) {
  const double scaled = raw * 100.0;
  return static_cast<StateKey>(std::floor(scaled + 0.5 + 1e-9 * std::max(1.0, std::abs(scaled))));
}

inline double state_value(StateKey key) { return static_cast<double>(key) / 100.0; }

struct StateWeights {
  double greenness = 0.5;
  double resilience = 0.5;
};

inline StateKey rl_state(const ActionVector& av, StateWeights w = {}) {
  double sum_c = 0.0;
  double sum_t = 0.0;
  for (const auto& o : av) {
    sum_c += o.co2;
    sum_t += o.run_time;
  }
  return round_state(w.greenness * sum_c + w.resilience * sum_t);
}

/// Product of all p_hat in the vector divided by its length.
inline double rl_reward(const ActionVector& av) {
  if (av.empty()) throw DomainError("reward needs a nonempty action vector");
  double prod = 1.0;
  for (const auto& o : av) prod *= o.p_hat;
  return prod / static_cast<double>(av.size());
}

struct QParams {
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon = 0.1;
};

/// Sparse Q-table; unseen entries read as zero.
class QTable {
 public:
  double get(StateKey s, ActionKind a) const {
    const auto it = q_.find(s);
    return it == q_.end() ? 0.0 : it->second[index_of(a)];
  }
  void set(StateKey s, ActionKind a, double v) { q_[s][index_of(a)] = v; }
  double max_value(StateKey s) const {
    const auto it = q_.find(s);
    return it == q_.end() ? 0.0 : std::max(it->second[0], it->second[1]);
  }
  /// Greedy action; ties go to Autonomous.
  ActionKind greedy(StateKey s) const {
    return get(s, ActionKind::Human) > get(s, ActionKind::Autonomous) ? ActionKind::Human
                                                                      : ActionKind::Autonomous;
  }
  std::size_t size() const { return q_.size(); }
  const std::map<StateKey, std::array<double, 2>>& entries() const { return q_; }

  void write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(9);
    out << "state,q_autonomous,q_human\n";
    char buf[32];
    for (const auto& [s, q] : q_) {
      std::snprintf(buf, sizeof buf, "%.2f", state_value(s));
      out << buf << ',' << q[0] << ',' << q[1] << '\n';
    }
  }

 private:
  std::map<StateKey, std::array<double, 2>> q_;
};

/// Temporal-difference update of Q(s, a).
inline void q_update(QTable& table, StateKey s, ActionKind a, double reward, StateKey s_next,
                     const QParams& params) {
  const double old = table.get(s, a);
  const double target = reward + params.gamma * table.max_value(s_next);
  table.set(s, a, old + params.alpha * (target - old));
}

/// Episode/step bookkeeping around the Q-table. The environment loop calls
/// select() then observe() once per actuated step.
class RlAgent {
 public:
  RlAgent(QParams params, StateWeights weights, std::uint64_t seed)
      : params_(params), weights_(weights), rng_(seed) {
    if (!(params.alpha > 0.0 && params.alpha <= 1.0)) throw DomainError("rl alpha must lie in (0, 1]");
    if (!(params.gamma >= 0.0 && params.gamma <= 1.0)) throw DomainError("gamma must lie in [0, 1]");
    if (!(params.epsilon >= 0.0 && params.epsilon <= 1.0)) throw DomainError("epsilon must lie in [0, 1]");
  }

  /// Starts supporting a recovery: initial state from the degradation-window
  /// actions, and a fresh episode.
  void begin(const ActionVector& degradation_actions, std::size_t steady_duration) {
    state_ = rl_state(degradation_actions, weights_);
    steady_duration_ = std::max<std::size_t>(steady_duration, 1);
    start_episode();
  }

  ActionKind select() {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng_) < params_.epsilon) {
      std::uniform_int_distribution<int> coin(0, 1);
      return static_cast<ActionKind>(coin(rng_));
    }
    return table_.greedy(state_);
  }

  /// Feeds back the outcome of the actuated step.
  void observe(const ActionObservation& obs) {
    av_.push_back(obs);
    const StateKey next = rl_state(av_, weights_);
    q_update(table_, state_, obs.action, rl_reward(av_), next, params_);
    state_ = next;
    ++episode_steps_;
    if (obs.action == ActionKind::Autonomous) {
      last_episode_length_ = episode_steps_;
      start_episode();
      return;
    }
    if (++human_steps_ >= steady_duration_) {
      last_episode_length_ = episode_steps_;
      start_episode();
    }
  }

  const QTable& table() const { return table_; }
  QTable& table() { return table_; }
  StateKey state() const { return state_; }
  const ActionVector& action_vector() const { return av_; }
  std::size_t episodes() const { return episodes_; }
  std::size_t last_episode_length() const { return last_episode_length_; }
  const QParams& params() const { return params_; }

 private:
  void start_episode() {
    av_.clear();
    human_steps_ = 0;
    episode_steps_ = 0;
    ++episodes_;
  }

  QParams params_;
  StateWeights weights_;
  std::mt19937_64 rng_;
  QTable table_;
  ActionVector av_;
  StateKey state_ = 0;
  std::size_t steady_duration_ = 1;
  std::size_t human_steps_ = 0;
  std::size_t episode_steps_ = 0;
  std::size_t last_episode_length_ = 0;
  std::size_t episodes_ = 0;
};

}  // namespace olcais::policy
