#pragma once

// Two-agent policy: the resilience player (rows) and the greenness player
// (columns) play a 2x2 coordination game over {Autonomous, Human}.

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "olcais/evaluator.hpp"
#include "olcais/policies/internal.hpp"
#include "olcais/policies/policy.hpp"
#include "olcais/policies/weighted_sum.hpp"
#include "olcais/types.hpp"

namespace olcais::policy {

struct Payoff {
  double row = 0.0;  // resilience player
  double col = 0.0;  // greenness player
};

/// cells[r][c]: r is the row (resilience) player's action, c the column
/// (greenness) player's action, both indexed by index_of(ActionKind).
struct PayoffMatrix {
  std::array<std::array<Payoff, 2>, 2> cells{};

  static PayoffMatrix from_bimatrix(const std::array<std::array<double, 2>, 2>& row,
                                    const std::array<std::array<double, 2>, 2>& col) {
    PayoffMatrix m;
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t c = 0; c < 2; ++c) m.cells[r][c] = {row[r][c], col[r][c]};
    return m;
  }
};

struct Cell {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Mixed equilibrium: the row player plays a1 (Autonomous) with p, the
/// column player plays a1 with q.
struct MixedEquilibrium {
  double p = 0.0;
  double q = 0.0;
};

inline constexpr double kMatchingBeta = 2.0;
inline constexpr double kMismatchBeta = 1.0;

inline PayoffMatrix build_payoff_matrix(double p_hat, const eval::EstimateSet& est) {
  std::array<double, 2> inv_t{}, inv_h{}, inv_c{};
  for (ActionKind a : kActionKinds) {
    const auto& e = est[index_of(a)];
    inv_t[index_of(a)] = guarded_inverse(e.t_hat);
    inv_h[index_of(a)] = guarded_inverse(static_cast<double>(e.h_remaining));
    inv_c[index_of(a)] = guarded_inverse(e.c_hat);
  }
  const auto n_t = l2_normalize_column(inv_t);
  const auto n_h = l2_normalize_column(inv_h);
  const auto n_c = l2_normalize_column(inv_c);

  PayoffMatrix m;
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c) {
      const double beta = r == c ? kMatchingBeta : kMismatchBeta;
      m.cells[r][c].row = beta * p_hat * n_t[r];
      m.cells[r][c].col = beta * (1.0 - p_hat) * n_h[c] * n_c[c];
    }
  return m;
}

/// All cells where no player strictly gains by deviating alone.
inline std::vector<Cell> find_psne(const PayoffMatrix& m) {
  std::vector<Cell> out;
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c) {
      const bool row_ok = m.cells[r][c].row >= m.cells[1 - r][c].row;
      const bool col_ok = m.cells[r][c].col >= m.cells[r][1 - c].col;
      if (row_ok && col_ok) out.push_back({r, c});
    }
  return out;
}

/// Indifference solution. q makes the row player indifferent, p makes the
/// column player indifferent. nullopt when either is undefined or outside [0, 1].
inline std::optional<MixedEquilibrium> solve_msne(const PayoffMatrix& m) {
  const auto& x = m.cells;
  const double q_den = x[0][0].row - x[0][1].row - x[1][0].row + x[1][1].row;
  const double p_den = x[0][0].col - x[1][0].col - x[0][1].col + x[1][1].col;
  if (q_den == 0.0 || p_den == 0.0) return std::nullopt;
  const double q = (x[1][1].row - x[0][1].row) / q_den;
  const double p = (x[1][1].col - x[1][0].col) / p_den;
  if (!(q >= 0.0 && q <= 1.0 && p >= 0.0 && p <= 1.0)) return std::nullopt;
  return MixedEquilibrium{p, q};
}

/// Joint probability of each cell under a mixed equilibrium.
inline std::array<std::array<double, 2>, 2> joint_probabilities(const MixedEquilibrium& eq) {
  return {{{eq.p * eq.q, eq.p * (1.0 - eq.q)}, {(1.0 - eq.p) * eq.q, (1.0 - eq.p) * (1.0 - eq.q)}}};
}

struct GameDecision {
  ActionKind action = ActionKind::Autonomous;
  enum class Route { Pure, Mixed, Fallback } route = Route::Pure;
};

/// Diagonal PSNE with the largest combined payoff; else the cell with the
/// largest joint MSNE probability (ties by combined payoff, then Autonomous);
/// else the internal rule.
inline GameDecision game_select(const PayoffMatrix& m, double p_hat, double k) {
  const auto sum = [&](std::size_t r, std::size_t c) { return m.cells[r][c].row + m.cells[r][c].col; };

  std::optional<std::size_t> best_diag;
  for (const auto& cell : find_psne(m)) {
    if (cell.row != cell.col) continue;
    if (!best_diag || sum(cell.row, cell.row) > sum(*best_diag, *best_diag)) best_diag = cell.row;
  }
  if (best_diag) return {static_cast<ActionKind>(*best_diag), GameDecision::Route::Pure};

  if (const auto eq = solve_msne(m)) {
    const auto joint = joint_probabilities(*eq);
    Cell best{0, 0};
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t c = 0; c < 2; ++c) {
        const double pj = joint[r][c];
        const double pb = joint[best.row][best.col];
        if (pj > pb || (pj == pb && sum(r, c) > sum(best.row, best.col))) best = {r, c};
      }
    return {static_cast<ActionKind>(best.row), GameDecision::Route::Mixed};
  }
  return {internal_select(p_hat, k), GameDecision::Route::Fallback};
}

}  // namespace olcais::policy
