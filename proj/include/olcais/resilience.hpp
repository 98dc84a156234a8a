#pragma once

// Autonomous classification ratio (ACR) over a sliding window and the
// operational-state machine that reads the ACR time series.

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "olcais/types.hpp"

namespace olcais::resilience {

/// FIFO of the last m standalone flags, initialised with m zeros.
class AcrWindow {
 public:
  explicit AcrWindow(std::size_t m) : flags_(m, 0) {
    if (m < 1) throw DomainError("window size m must be >= 1");
  }

  double record(bool standalone) {
    sum_ -= flags_.front();
    flags_.pop_front();
    flags_.push_back(standalone ? 1 : 0);
    sum_ += flags_.back();
    return value();
  }

  double value() const { return static_cast<double>(sum_) / static_cast<double>(flags_.size()); }
  std::size_t size() const { return flags_.size(); }
  std::size_t sum() const { return sum_; }
  const std::deque<int>& flags() const { return flags_; }

 private:
  std::deque<int> flags_;
  std::size_t sum_ = 0;
};

enum class State : int {
  Unstarted = -1,
  Steady = 0,
  PerformanceDegradation = 1,
  Recovering = 2,
  Recovered = 3,
};

inline std::string_view to_string(State s) {
  switch (s) {
    case State::Unstarted: return "unstarted";
    case State::Steady: return "steady";
    case State::PerformanceDegradation: return "performance_degradation";
    case State::Recovering: return "recovering";
    case State::Recovered: return "recovered";
  }
  return "?";
}

inline std::optional<State> parse_state(std::string_view s) {
  for (State st : {State::Unstarted, State::Steady, State::PerformanceDegradation,
                   State::Recovering, State::Recovered})
    if (to_string(st) == s) return st;
  return std::nullopt;
}

/// Human-facing label; cycles >= 1 are the "second" (final-state) phases.
inline std::string display_name(State s, std::size_t cycle) {
  if (cycle == 0 || s == State::Unstarted) return std::string(to_string(s));
  switch (s) {
    case State::Steady: return "second_steady";
    case State::PerformanceDegradation: return "second_performance_degradation";
    case State::Recovering: return "second_disruptive";
    case State::Recovered: return "second_recovered";
    default: return std::string(to_string(s));
  }
}

struct TracePoint {
  std::size_t iteration = 0;
  double acr = 0.0;
  State state = State::Unstarted;
  std::size_t cycle = 0;
};

/// Append-only ACR series with the state assigned at each point.
using AcrTrace = std::vector<TracePoint>;

/// Incremental state evaluation over the ACR series.
///
/// Follows the state function closely with three adjustments:
///  - in Steady the ACR == 0 test runs before the below-satisfactory test,
///    otherwise degradation can never be entered;
///  - if no below-satisfactory point preceded the zero, the threshold is the
///    minimum over the whole steady segment and the event time is the zero;
///  - the recovered candidate is re-armed when Recovering starts and the
///    required run length (te - t0) is measured once, at the first degradation.
class StateTracker {
 public:
  explicit StateTracker(double satisfactory = 0.5) : satisfactory_(satisfactory) {
    if (!(satisfactory >= 0.0 && satisfactory <= 1.0))
      throw DomainError("satisfactory level must lie in [0, 1]");
  }

  State observe(double acr) {
    const std::size_t i = trace_.size();
    trace_.push_back({i, acr, state_, cycle_});
    switch (state_) {
      case State::Unstarted:
        if (acr == 1.0) {
          state_ = State::Steady;
          t0_ = i;
        }
        break;
      case State::Steady:
        if (acr == 0.0) {
          state_ = State::PerformanceDegradation;
          if (!threshold_) fix_threshold(i);
          if (!te_) te_ = i;
        } else if (acr >= satisfactory_) {
          te_.reset();
        } else {
          te_ = i;
        }
        break;
      case State::PerformanceDegradation:
        state_ = State::Recovering;
        ta_ = i;
        tr_.reset();
        recovered_flag_ = i + 1;
        break;
      case State::Recovering:
        if (acr < *threshold_) {
          tr_.reset();
          recovered_flag_ = i + 1;
        } else {
          tr_ = i;
          if (*tr_ - recovered_flag_ == required_run_) state_ = State::Recovered;
        }
        break;
      case State::Recovered:
        state_ = State::Steady;
        ++cycle_;
        t0_ = i;
        te_.reset();
        break;
    }
    trace_.back().state = state_;
    trace_.back().cycle = cycle_;
    return state_;
  }

  State current() const { return state_; }
  std::size_t cycle() const { return cycle_; }
  double satisfactory() const { return satisfactory_; }
  const AcrTrace& trace() const { return trace_; }
  std::optional<std::size_t> t0() const { return state_ == State::Unstarted ? std::nullopt : std::optional(t0_); }
  std::optional<std::size_t> te() const { return te_; }
  std::optional<std::size_t> ta() const { return ta_; }
  std::optional<std::size_t> tr() const { return tr_; }
  std::size_t recovered_flag() const { return recovered_flag_; }
  /// Length te - t0 of the first steady state, once measured.
  std::optional<std::size_t> steady_length() const {
    return threshold_ ? std::optional(required_run_) : std::nullopt;
  }
  bool threshold_fixed() const { return threshold_.has_value(); }

  /// The ACR threshold. Before the first degradation it is provisional: the
  /// minimum over the current steady segment. Unavailable before Steady.
  std::optional<double> acr_threshold() const {
    if (threshold_) return threshold_;
    if (state_ != State::Steady) return std::nullopt;
    const std::size_t last = te_ ? *te_ : trace_.size() - 1;
    return segment_min(t0_, last + 1);
  }

 private:
  double segment_min(std::size_t first, std::size_t end) const {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t k = first; k < end && k < trace_.size(); ++k) lo = std::min(lo, trace_[k].acr);
    return lo;
  }

  void fix_threshold(std::size_t i) {
    if (te_) {
      threshold_ = segment_min(t0_, *te_ + 1);
      required_run_ = *te_ - t0_;
    } else {
      threshold_ = segment_min(t0_, i);
      required_run_ = i - t0_;
    }
  }

  double satisfactory_;
  State state_ = State::Unstarted;
  std::size_t cycle_ = 0;
  std::size_t t0_ = 0;
  std::optional<std::size_t> te_;
  std::optional<std::size_t> ta_;
  std::optional<std::size_t> tr_;
  std::size_t recovered_flag_ = 0;
  std::optional<double> threshold_;
  std::size_t required_run_ = 0;
  AcrTrace trace_;
};

/// Replays a whole ACR series and returns the state after each point.
inline std::vector<State> evaluate_states(const std::vector<double>& acr, double satisfactory = 0.5) {
  StateTracker tracker(satisfactory);
  std::vector<State> out;
  out.reserve(acr.size());
  for (double v : acr) out.push_back(tracker.observe(v));
  return out;
}

}  // namespace olcais::resilience
