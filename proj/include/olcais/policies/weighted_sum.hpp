#pragma once

// One-agent policy: weighted sum model over L2-normalised action metrics,
// plus AHP weight derivation for the objective weights.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "olcais/evaluator.hpp"
#include "olcais/policies/policy.hpp"
#include "olcais/types.hpp"

namespace olcais::policy {

inline std::vector<double> l2_normalize_column(std::span<const double> values) {
  if (values.empty()) throw DegenerateColumn("cannot normalise an empty column");
  double sq = 0.0;
  for (double v : values) sq += v * v;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw DegenerateColumn("column has zero or non-finite norm");
  std::vector<double> out(values.begin(), values.end());
  for (auto& v : out) v /= norm;
  return out;
}

inline double guarded_inverse(double x) { return 1.0 / std::max(x, kInverseFloor); }

struct ObjectiveWeights {
  double resilience = 0.5;
  double greenness = 0.5;
};

struct DecisionRow {
  double obj_res = 0.0;
  double obj_gre = 0.0;
};

/// One row per action (index_of(ActionKind)).
struct DecisionMatrix {
  std::array<DecisionRow, 2> rows{};
  ObjectiveWeights weights{};

  double score(ActionKind a) const {
    const auto& r = rows[index_of(a)];
    return weights.resilience * r.obj_res + weights.greenness * r.obj_gre;
  }
};

inline DecisionMatrix build_decision_matrix(double p_hat, const eval::EstimateSet& est,
                                            ObjectiveWeights weights = {}) {
  std::array<double, 2> inv_t{}, h{}, inv_c{};
  for (ActionKind a : kActionKinds) {
    const auto& e = est[index_of(a)];
    inv_t[index_of(a)] = guarded_inverse(e.t_hat);
    h[index_of(a)] = static_cast<double>(e.h_remaining);
    inv_c[index_of(a)] = guarded_inverse(e.c_hat);
  }
  const auto n_t = l2_normalize_column(inv_t);
  const auto n_h = l2_normalize_column(h);
  const auto n_c = l2_normalize_column(inv_c);

  DecisionMatrix dm;
  dm.weights = weights;
  for (std::size_t i = 0; i < 2; ++i) {
    dm.rows[i].obj_res = p_hat * n_t[i];
    dm.rows[i].obj_gre = (1.0 - p_hat) * (n_h[i] + n_c[i]);
  }
  return dm;
}

/// Highest weighted score wins; ties go to Autonomous.
inline ActionKind wsm_select(double p_hat, const eval::EstimateSet& est, ObjectiveWeights weights = {}) {
  const auto dm = build_decision_matrix(p_hat, est, weights);
  return dm.score(ActionKind::Human) > dm.score(ActionKind::Autonomous) ? ActionKind::Human
                                                                        : ActionKind::Autonomous;
}

// ---------------------------------------------------------------------------
// AHP

struct AhpResult {
  std::vector<double> weights;
  double consistency_ratio = 0.0;
  double lambda_max = 0.0;
};

/// Saaty's random index for n = 1..10.
inline double random_index(std::size_t n) {
  static constexpr std::array<double, 11> ri{0.0, 0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49};
  if (n == 0 || n >= ri.size()) throw DomainError("AHP supports 1 to 10 criteria");
  return ri[n];
}

inline AhpResult ahp_weights(const std::vector<std::vector<double>>& cmp) {
  const std::size_t n = cmp.size();
  if (n == 0 || n > 10) throw DomainError("AHP supports 1 to 10 criteria");
  for (const auto& row : cmp)
    if (row.size() != n) throw DomainError("comparison matrix must be square");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double a = cmp[i][j];
      if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("comparison entries must be positive");
      if (std::abs(a * cmp[j][i] - 1.0) > 1e-9) throw DomainError("comparison matrix is not reciprocal");
    }

  std::vector<double> col_sum(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) col_sum[j] += cmp[i][j];

  AhpResult res;
  res.weights.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) res.weights[i] += cmp[i][j] / col_sum[j];
    res.weights[i] /= static_cast<double>(n);
  }

  double lambda = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double aw = 0.0;
    for (std::size_t j = 0; j < n; ++j) aw += cmp[i][j] * res.weights[j];
    lambda += aw / res.weights[i];
  }
  res.lambda_max = lambda / static_cast<double>(n);
  if (n > 2) {
    const double ci = (res.lambda_max - static_cast<double>(n)) / static_cast<double>(n - 1);
    res.consistency_ratio = ci / random_index(n);
  }
  return res;
}

}  // namespace olcais::policy
