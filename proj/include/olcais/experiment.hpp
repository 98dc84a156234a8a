#pragma once

// The experiment loop: one instance per iteration, classifier confidence,
// acting policy, actuation, ACR/state tracking and the disruption protocol.

#include <algorithm>
#include <array>
#include <atomic>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "olcais/config.hpp"
#include "olcais/evaluator.hpp"
#include "olcais/learner.hpp"
#include "olcais/measurements.hpp"
#include "olcais/policies/game.hpp"
#include "olcais/policies/internal.hpp"
#include "olcais/policies/q_learning.hpp"
#include "olcais/policies/weighted_sum.hpp"
#include "olcais/record.hpp"
#include "olcais/resilience.hpp"
#include "olcais/simulator.hpp"

namespace olcais {

enum class RunStatus { Running, Completed, BudgetExhausted };

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<IterationRecord> records;
  metrics::StateSegments segments;
  std::vector<metrics::MetricsReport> metrics;
  std::vector<bool> recovered;  // per state-machine cycle with a degradation
  std::vector<std::size_t> inject_iterations;
  std::vector<std::size_t> fix_iterations;
  std::optional<double> acr_threshold;
  RunStatus status = RunStatus::Completed;
};

/// Independent random streams derived from the run seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

/// Step-wise experiment. Commands (inject/fix/switch policy) are only applied
/// between steps, so a run driven by commands and one driven by the automatic
/// protocol produce the same records when the commands land on the same
/// iterations.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config)
      : config_(validated(std::move(config))),
        feeder_(derive_seed(config_.seed, 1), planned_windows(config_), config_.class_order,
                config_.generator),
        model_(config_.n_classes, sim::kFeatureDim, config_.learning_rate, config_.l2_penalty),
        window_(config_.m),
        tracker_(config_.satisfactory),
        evaluator_(config_.energy, config_.smoothing_alpha, config_.h_max),
        attr_rng_(derive_seed(config_.seed, 2)),
        agent_(config_.rl, config_.rl_state_weights, derive_seed(config_.seed, 3)),
        k_(learn::confidence_threshold(static_cast<int>(config_.n_classes))),
        support_policy_(config_.policy) {}

  const ExperimentConfig& config() const { return config_; }
  std::size_t next_iteration() const { return feeder_.iteration(); }
  bool finished() const { return status_ != RunStatus::Running; }
  RunStatus status() const { return status_; }
  double confidence_threshold() const { return k_; }
  const std::vector<IterationRecord>& records() const { return records_; }
  const resilience::StateTracker& tracker() const { return tracker_; }
  const learn::LinearModel& model() const { return model_; }
  const policy::RlAgent& agent() const { return agent_; }
  policy::PolicyKind support_policy() const { return support_policy_; }
  bool support_active() const { return support_active_; }
  bool disrupted() const { return feeder_.disrupted(); }
  const std::vector<std::size_t>& inject_iterations() const { return injects_; }
  const std::vector<std::size_t>& fix_iterations() const { return fixes_; }

  // -- commands (take effect at the next iteration) ------------------------

  void switch_policy(policy::PolicyKind p) { support_policy_ = p; }

  /// Returns false if a disruption is already active.
  bool inject(const sim::Disruptor& d) {
    if (feeder_.disrupted()) return false;
    feeder_.inject(d);
    injects_.push_back(next_iteration());
    return true;
  }

  /// Returns false if no disruption is active.
  bool fix() {
    if (!feeder_.disrupted()) return false;
    feeder_.fix();
    fixes_.push_back(next_iteration());
    return true;
  }

  /// Runs one iteration. Returns the new record, or nullopt when finished.
  std::optional<IterationRecord> step() {
    if (finished()) return std::nullopt;
    if (config_.auto_schedule) apply_protocol();
    if (finished()) return std::nullopt;

    const std::size_t i = next_iteration();
    const auto planned_before = feeder_.disrupted();
    auto inst = feeder_.next_instance();
    if (!inst) {
      status_ = RunStatus::BudgetExhausted;
      return std::nullopt;
    }
    note_planned_transition(i, planned_before);

    const auto est = model_.predict_proba(inst->features);
    const bool standalone = policy::internal_select(est.p_hat, k_) == ActionKind::Autonomous;
    const auto state_before = tracker_.current();

    const bool supported = state_before == resilience::State::Recovering && support_active_;
    const policy::PolicyKind acting = supported ? support_policy_ : policy::PolicyKind::Internal;
    const ActionKind action = choose(acting, est.p_hat);

    const std::size_t label = index_of(inst->true_class);
    double p_hat_after = est.p_hat;
    if (action == ActionKind::Human) {
      model_.update(inst->features, label);
      p_hat_after = model_.predict_proba(inst->features).p_hat;
    }

    const auto attrs = eval::sample_attributes(action, config_.energy, attr_rng_);
    evaluator_.observe(action, attrs);
    const policy::ActionObservation obs{action, attrs.co2, attrs.run_time, p_hat_after};
    if (acting == policy::PolicyKind::RlAgent) agent_.observe(obs);

    const double acr = window_.record(standalone);
    const auto state = tracker_.observe(acr);
    track_transitions(state_before, state, acr, obs);

    if (supported) {
      consecutive_standalone_ = standalone ? consecutive_standalone_ + 1 : 0;
      if (consecutive_standalone_ >= config_.effective_stop_support_after()) support_active_ = false;
    }

    IterationRecord rec;
    rec.iteration = i;
    rec.mode = inst->mode;
    rec.policy_active = std::string(policy::to_string(acting));
    rec.action = action;
    rec.t = attrs.run_time;
    rec.c = attrs.co2;
    rec.h = attrs.human_interactions;
    rec.p_hat = est.p_hat;
    rec.predicted = static_cast<ColorClass>(est.predicted);
    rec.true_class = inst->true_class;
    rec.acr = acr;
    rec.state = state;
    rec.cycle = tracker_.cycle();
    records_.push_back(rec);

    if (records_.size() >= config_.iteration_budget() && !finished())
      status_ = RunStatus::BudgetExhausted;
    return rec;
  }

  void run_to_end() {
    while (step()) {
    }
  }

  ExperimentResult result() const {
    ExperimentResult r;
    r.config = config_;
    r.records = records_;
    r.inject_iterations = injects_;
    r.fix_iterations = fixes_;
    r.segments = metrics::segment_states(records_, fixes_);
    r.acr_threshold = tracker_.threshold_fixed() ? tracker_.acr_threshold() : std::nullopt;
    if (r.acr_threshold)
      r.metrics = metrics::measure(records_, r.segments, *r.acr_threshold,
                                   std::string(policy::to_string(config_.policy)), config_.seed);
    for (const auto& seg : r.segments)
      if (seg.degradation) r.recovered.push_back(seg.recovered.has_value());
    r.status = status_ == RunStatus::Running ? RunStatus::Completed : status_;
    return r;
  }

 private:
  static ExperimentConfig validated(ExperimentConfig c) {
    if (auto errs = c.validate(); !errs.empty()) throw ConfigError(std::move(errs));
    return c;
  }

  static std::vector<sim::DisruptionWindow> planned_windows(const ExperimentConfig& c) {
    if (!c.auto_schedule || !c.fix_at) return {};
    sim::FeedSchedule s{c.steady_len, c.effective_disrupt_start(), c.fix_at, c.make_disruptor(), c.cycles};
    return s.windows();
  }

  // Planned windows toggle inside the feeder; mirror them into the
  // inject/fix bookkeeping.
  void note_planned_transition(std::size_t i, bool before) {
    const bool after = feeder_.disrupted();
    if (!before && after) injects_.push_back(i);
    if (before && !after) fixes_.push_back(i);
  }

  ActionKind choose(policy::PolicyKind acting, double p_hat) {
    try {
      switch (acting) {
        case policy::PolicyKind::Internal: return policy::internal_select(p_hat, k_);
        case policy::PolicyKind::OneAgent:
          return policy::wsm_select(p_hat, evaluator_.estimates(), config_.weights);
        case policy::PolicyKind::TwoAgent:
          return policy::game_select(policy::build_payoff_matrix(p_hat, evaluator_.estimates()), p_hat, k_)
              .action;
        case policy::PolicyKind::RlAgent:
          if (!agent_started_) start_agent();
          return agent_.select();
      }
    } catch (const DegenerateColumn&) {
    }
    return policy::internal_select(p_hat, k_);
  }

  void start_agent() {
    const auto steady = tracker_.steady_length().value_or(config_.steady_len);
    agent_.begin(degradation_actions_, steady > 0 ? steady : config_.steady_len);
    agent_started_ = true;
  }

  void track_transitions(resilience::State before, resilience::State after, double acr,
                         const policy::ActionObservation& obs) {
    using resilience::State;
    if (before == State::Steady) {
      if (acr >= config_.satisfactory) pending_degradation_.clear();
      else pending_degradation_.push_back(obs);
    }
    if (after == State::PerformanceDegradation && before != State::PerformanceDegradation) {
      degradation_actions_ = pending_degradation_;
      if (degradation_actions_.empty()) degradation_actions_.push_back(obs);
      pending_degradation_.clear();
    }
    if (after == State::Recovering && before != State::Recovering) {
      support_active_ = true;
      consecutive_standalone_ = 0;
      agent_started_ = false;
    }
    if (after == State::Recovered && before != State::Recovered) last_recovered_ = records_.size();
  }

  // Automatic disruption protocol: inject at disrupt_start, fix after
  // recovery + steady_len or at inject + 2 * steady_len if unrecovered, and
  // after the last fix let the final state settle before stopping.
  void apply_protocol() {
    const std::size_t i = next_iteration();
    const std::size_t L = config_.steady_len;
    if (config_.fix_at) {
      // static windows live in the feeder; only decide when to stop
      const auto windows = planned_windows(config_);
      const std::size_t last_fix = *windows.back().end;
      if (i >= last_fix && settled_since(last_fix, i)) status_ = RunStatus::Completed;
      return;
    }
    if (!feeder_.disrupted()) {
      if (injects_.empty()) {
        if (i >= config_.effective_disrupt_start()) inject(config_.make_disruptor());
        return;
      }
      if (settled_since(fixes_.back(), i)) {
        if (injects_.size() < config_.cycles) inject(config_.make_disruptor());
        else status_ = RunStatus::Completed;
      }
      return;
    }
    const std::size_t started = injects_.back();
    const bool recovered_here = last_recovered_ && *last_recovered_ > started;
    if (recovered_here ? i >= *last_recovered_ + L : i >= started + 2 * L) fix();
  }

  /// The system is back in Steady after `since`: either it recovered after
  /// `since` and held for steady_len, or it never degraded for 2 * steady_len.
  bool settled_since(std::size_t since, std::size_t i) const {
    if (tracker_.current() != resilience::State::Steady) return false;
    const std::size_t L = config_.steady_len;
    if (last_recovered_ && *last_recovered_ >= since) return i >= *last_recovered_ + L;
    return i >= since + 2 * L;
  }

  ExperimentConfig config_;
  sim::Feeder feeder_;
  learn::LinearModel model_;
  resilience::AcrWindow window_;
  resilience::StateTracker tracker_;
  eval::ActionEvaluator evaluator_;
  std::mt19937_64 attr_rng_;
  policy::RlAgent agent_;
  double k_;
  policy::PolicyKind support_policy_;

  bool support_active_ = false;
  std::size_t consecutive_standalone_ = 0;
  bool agent_started_ = false;
  policy::ActionVector pending_degradation_;
  policy::ActionVector degradation_actions_;
  std::optional<std::size_t> last_recovered_;
  std::vector<std::size_t> injects_;
  std::vector<std::size_t> fixes_;
  std::vector<IterationRecord> records_;
  RunStatus status_ = RunStatus::Running;
};

inline ExperimentResult run_experiment(const ExperimentConfig& config) {
  Experiment exp(config);
  exp.run_to_end();
  return exp.result();
}

/// Multi-disruption scenario: the same loop with cycles >= 2.
inline ExperimentResult run_multi_disruption(const ExperimentConfig& config) {
  if (config.cycles < 2) throw ConfigError("cycles", "multi-disruption needs cycles >= 2");
  return run_experiment(config);
}

// ---------------------------------------------------------------------------
// Replications

struct StateLengths {
  double steady = 0.0;
  double performance_degradation = 0.0;
  double recovering = 0.0;
  double recovered = 0.0;
};

struct ReplicationBatch {
  std::vector<ExperimentResult> results;  // policy-major, then seed order
  metrics::Comparison comparison;
  std::map<std::string, StateLengths> mean_state_lengths;
};

inline StateLengths state_lengths(const std::vector<IterationRecord>& records) {
  StateLengths s;
  for (const auto& r : records) {
    switch (r.state) {
      case resilience::State::Steady: s.steady += 1; break;
      case resilience::State::PerformanceDegradation: s.performance_degradation += 1; break;
      case resilience::State::Recovering: s.recovering += 1; break;
      case resilience::State::Recovered: s.recovered += 1; break;
      default: break;
    }
  }
  return s;
}

/// Replication i of each policy runs with seed = config.seed + i. Runs are
/// independent and execute on up to `workers` threads.
inline ReplicationBatch run_replications(const ExperimentConfig& config, std::size_t count,
                                         std::vector<policy::PolicyKind> policies = {},
                                         unsigned workers = 0) {
  if (count < 1) throw ConfigError("count", "must be >= 1");
  if (policies.empty()) policies.push_back(config.policy);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());

  std::vector<ExperimentConfig> jobs;
  for (auto p : policies)
    for (std::size_t i = 0; i < count; ++i) {
      ExperimentConfig c = config;
      c.policy = p;
      c.seed = config.seed + i;
      jobs.push_back(c);
    }

  ReplicationBatch batch;
  batch.results.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) batch.results[j] = run_experiment(jobs[j]);
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < std::min<std::size_t>(workers, jobs.size()); ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::map<std::string, std::vector<metrics::MetricsReport>> groups;
  std::map<std::string, std::size_t> runs;
  for (const auto& r : batch.results) {
    const std::string name(policy::to_string(r.config.policy));
    auto& g = groups[name];
    g.insert(g.end(), r.metrics.begin(), r.metrics.end());
    auto& acc = batch.mean_state_lengths[name];
    const auto s = state_lengths(r.records);
    acc.steady += s.steady;
    acc.performance_degradation += s.performance_degradation;
    acc.recovering += s.recovering;
    acc.recovered += s.recovered;
    ++runs[name];
  }
  for (auto& [name, acc] : batch.mean_state_lengths) {
    const double n = static_cast<double>(runs[name]);
    acc.steady /= n;
    acc.performance_degradation /= n;
    acc.recovering /= n;
    acc.recovered /= n;
  }
  batch.comparison = metrics::compare_policies(groups);
  return batch;
}

}  // namespace olcais
