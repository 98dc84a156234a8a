#pragma once

// Hand-built ACR traces with their expected state sequences. Shared by the
// unit tests and the acceptance binary.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "olcais/resilience.hpp"

namespace traces {

using olcais::resilience::State;

struct Expected {
  State state;
  std::size_t cycle;
};

struct Case {
  std::string name;
  std::vector<double> acr;
  std::vector<Expected> states;
  std::optional<double> threshold;  // after the whole trace
};

inline void PrintTo(const Case& c, std::ostream* os) { *os << c.name; }

inline constexpr State U = State::Unstarted;
inline constexpr State S = State::Steady;
inline constexpr State D = State::PerformanceDegradation;
inline constexpr State R = State::Recovering;
inline constexpr State V = State::Recovered;

inline std::vector<Case> table() {
  return {
      {"never_steady", {0, 0.2, 0.8, 0.6}, {{U, 0}, {U, 0}, {U, 0}, {U, 0}}, std::nullopt},
      {"steady_only",
       {0, 0.2, 1, 1, 0.8, 1},
       {{U, 0}, {U, 0}, {S, 0}, {S, 0}, {S, 0}, {S, 0}},
       0.8},
      // no sub-satisfactory point before the zero: threshold over [t0, zero)
      {"straight_to_zero",
       {1, 1, 1, 0, 0, 0, 1, 1, 1, 1, 1},
       {{S, 0}, {S, 0}, {S, 0}, {D, 0}, {R, 0}, {R, 0}, {R, 0}, {R, 0}, {R, 0}, {V, 0}, {S, 1}},
       1.0},
      // te = 4, threshold = min over [0, 4] = 0.2, required run 4; the dip at
      // 9 restarts the run
      {"fluctuating_recovery",
       {1, 1, 0.8, 0.4, 0.2, 0, 0, 0.4, 0.6, 0, 0.6, 0.8, 1, 1, 1, 1},
       {{S, 0}, {S, 0}, {S, 0}, {S, 0}, {S, 0}, {D, 0}, {R, 0}, {R, 0}, {R, 0}, {R, 0}, {R, 0}, {R, 0},
        {R, 0}, {R, 0}, {V, 0}, {S, 1}},
       0.2},
      {"never_recovered",
       {1, 1, 0, 0, 0, 0, 0, 0},
       {{S, 0}, {S, 0}, {D, 0}, {R, 0}, {R, 0}, {R, 0}, {R, 0}, {R, 0}},
       1.0},
      // the second degradation reuses the first threshold and run length
      {"two_cycle",
       {1, 1, 0, 1, 1, 1, 1, 0, 0, 1, 1, 1, 1, 1},
       {{S, 0}, {S, 0}, {D, 0}, {R, 0}, {R, 0}, {R, 0}, {V, 0}, {S, 1}, {D, 1}, {R, 1}, {R, 1}, {R, 1}, {V, 1},
        {S, 2}},
       1.0},
      // a satisfactory point clears te, so the zero measures from t0
      {"te_cleared",
       {1, 0.4, 1, 0.6, 0.2, 1, 0},
       {{S, 0}, {S, 0}, {S, 0}, {S, 0}, {S, 0}, {S, 0}, {D, 0}},
       0.2},
  };
}

}  // namespace traces
