#pragma once

// Random but well-formed iteration traces for measurement tests.

#include <optional>
#include <random>
#include <vector>

#include "olcais/record.hpp"
#include "olcais/resilience.hpp"

namespace fixture {

struct Trace {
  std::vector<olcais::IterationRecord> records;
  std::vector<std::size_t> fixes;
  std::size_t cycles = 0;
  // Where the last cycle's window closes when it never recovers.
  std::optional<std::size_t> open_close;
};

// unstarted* (steady+ degradation recovering+ recovered)+, optionally ending
// in a cycle that never recovers.
inline Trace random_trace(std::mt19937_64& rng) {
  using olcais::resilience::State;
  std::uniform_int_distribution<int> len(1, 12), coin(0, 1), few(0, 4), acr_pick(0, 5);
  std::uniform_real_distribution<double> co2(1e-7, 2e-6);
  Trace t;
  std::size_t cycle = 0;
  const auto push = [&](State s) {
    olcais::IterationRecord r;
    r.iteration = t.records.size();
    r.state = s;
    r.cycle = cycle;
    r.acr = acr_pick(rng) / 5.0;
    r.h = coin(rng);
    r.action = r.h ? olcais::ActionKind::Human : olcais::ActionKind::Autonomous;
    r.c = co2(rng);
    t.records.push_back(r);
  };

  for (int k = few(rng); k > 0; --k) push(State::Unstarted);
  const int cycles = 1 + few(rng) / 2;
  const bool open_end = coin(rng) == 1;
  for (int c = 0; c < cycles; ++c) {
    for (int k = len(rng); k > 0; --k) push(State::Steady);
    push(State::PerformanceDegradation);
    const bool last = c + 1 == cycles;
    if (last && open_end) {
      const int n = len(rng) + 2;
      const std::size_t deg = t.records.size() - 1;
      for (int k = 0; k < n; ++k) push(State::Recovering);
      if (coin(rng)) {
        const std::size_t fix = deg + 1 + static_cast<std::size_t>(few(rng));
        t.fixes.push_back(fix);
        t.open_close = fix - 1;
      } else {
        t.open_close = t.records.size() - 1;
      }
      break;
    }
    for (int k = len(rng); k > 0; --k) push(State::Recovering);
    push(State::Recovered);
    ++cycle;
  }
  for (int k = few(rng); k > 0 && !(open_end); --k) push(State::Steady);
  t.cycles = open_end ? cycle + 1 : cycle;
  return t;
}

}  // namespace fixture
