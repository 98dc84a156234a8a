#pragma once

// Independent reference computations for the test suite and the acceptance
// binary. None of these call into the code they check.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "olcais/evaluator.hpp"
#include "olcais/policies/game.hpp"
#include "olcais/record.hpp"
#include "olcais/resilience.hpp"

namespace oracle {

// K(n) by counting decimal digits of n as text.
inline double confidence_threshold(int n) {
  const auto digits = static_cast<int>(std::to_string(n).size());
  double tail = 0.5;
  for (int d = 0; d < digits; ++d) tail /= 10.0;
  return 1.0 / n + tail;
}

// Pure equilibria by trying every unilateral deviation.
inline std::vector<olcais::policy::Cell> pure_equilibria(const olcais::policy::PayoffMatrix& m) {
  std::vector<olcais::policy::Cell> out;
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 2; ++c) {
      bool stable = true;
      for (std::size_t dev = 0; dev < 2 && stable; ++dev) {
        if (m.cells[dev][c].row > m.cells[r][c].row) stable = false;
        if (m.cells[r][dev].col > m.cells[r][c].col) stable = false;
      }
      if (stable) out.push_back({r, c});
    }
  }
  return out;
}

// Row player's payoff advantage of a1 over a2 when the column player plays a1 with q.
inline double row_advantage(const olcais::policy::PayoffMatrix& m, double q) {
  const auto& x = m.cells;
  return (q * x[0][0].row + (1 - q) * x[0][1].row) - (q * x[1][0].row + (1 - q) * x[1][1].row);
}

// Column player's advantage of a1 over a2 when the row player plays a1 with p.
inline double col_advantage(const olcais::policy::PayoffMatrix& m, double p) {
  const auto& x = m.cells;
  return (p * x[0][0].col + (1 - p) * x[1][0].col) - (p * x[0][1].col + (1 - p) * x[1][1].col);
}

// Best-response switch point on a grid of the given step: the midpoint of the
// first grid cell over which the advantage changes sign. nullopt if none.
template <typename Advantage>
std::optional<double> grid_switch_point(Advantage adv, double step = 1e-3) {
  const int n = static_cast<int>(std::lround(1.0 / step));
  double prev = adv(0.0);
  if (prev == 0.0) return 0.0;
  for (int k = 1; k <= n; ++k) {
    const double x = k * step;
    const double cur = adv(x);
    if (cur == 0.0) return x;
    if ((prev < 0) != (cur < 0)) return x - step / 2;
    prev = cur;
  }
  return std::nullopt;
}

inline olcais::eval::EstimateSet random_estimates(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> t(0.1, 10.0), c(1e-8, 1e-5);
  std::uniform_int_distribution<long> h(1, 1000);
  olcais::eval::EstimateSet est;
  for (auto& e : est) {
    e.t_hat = t(rng);
    e.c_hat = c(rng);
    e.h_remaining = h(rng);
  }
  return est;
}

// Geometric error of exponential smoothing toward a constant.
inline double smoothing_error(double initial_error, double alpha, int steps) {
  return initial_error * std::pow(1.0 - alpha, steps);
}

// Q* for a deterministic MDP by value iteration.
template <std::size_t S, std::size_t A>
std::array<std::array<double, A>, S> value_iteration(const std::array<std::array<std::size_t, A>, S>& next,
                                                     const std::array<std::array<double, A>, S>& reward,
                                                     double gamma, int sweeps = 5000) {
  std::array<std::array<double, A>, S> q{};
  for (int it = 0; it < sweeps; ++it) {
    auto fresh = q;
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t a = 0; a < A; ++a) {
        double best = q[next[s][a]][0];
        for (std::size_t b = 1; b < A; ++b) best = std::max(best, q[next[s][a]][b]);
        fresh[s][a] = reward[s][a] + gamma * best;
      }
    q = fresh;
  }
  return q;
}

// Four metrics of one disruptive window, computed directly from the records:
// the window runs from the first degradation of `cycle` through its last
// recovered point, or up to `close` when it never recovers.
struct Metrics {
  double duration_ratio = 0;
  double fluctuation_ratio = 0;
  double co2_mean = 0;
  double human_dependency = 0;
};

inline std::optional<Metrics> cycle_metrics(const std::vector<olcais::IterationRecord>& recs, std::size_t cycle,
                                            double threshold, std::optional<std::size_t> close) {
  using olcais::resilience::State;
  std::optional<std::size_t> first, last_recovered;
  for (const auto& r : recs) {
    if (r.cycle != cycle) continue;
    if (r.state == State::PerformanceDegradation && !first) first = r.iteration;
    if (r.state == State::Recovered) last_recovered = r.iteration;
  }
  if (!first) return std::nullopt;
  const std::size_t last = last_recovered ? *last_recovered : (close ? *close : recs.back().iteration);
  double n = 0, recovering = 0, below = 0, above = 0, co2 = 0, h = 0;
  for (const auto& r : recs) {
    if (r.iteration < *first || r.iteration > last) continue;
    n += 1;
    if (r.state == State::Recovering && r.cycle == cycle) recovering += 1;
    if (r.acr < threshold) below += 1;
    else above += 1;
    co2 += r.c;
    h += r.h;
  }
  return Metrics{recovering / n, below / std::max(above, 1.0), co2 / n, h / n};
}

}  // namespace oracle
