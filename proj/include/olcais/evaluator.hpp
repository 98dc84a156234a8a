#pragma once

// Action evaluator: per-action attribute sampling (run time, CO2, human
// interactions) and exponentially smoothed estimates fed to the policies.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <random>

#include "olcais/types.hpp"

namespace olcais::eval {

inline constexpr double kDefaultCarbonIntensity = 330.718;  // gCO2 per kWh
inline constexpr double kMinPositive = 1e-12;

struct ActionAttributes {
  double run_time = 0.0;  // seconds
  double co2 = 0.0;       // kgCO2eq
  int human_interactions = 0;
};

struct ActionEstimate {
  double t_hat = 0.0;
  double c_hat = 0.0;
  long h_remaining = 0;
  bool budget_exceeded() const { return h_remaining < 0; }
};

using EstimateSet = std::array<ActionEstimate, 2>;  // indexed by index_of(ActionKind)

struct SamplingParams {
  double time_mean = 1.0;
  double time_sd = 0.0;
  double energy_mean = 1e-6;  // kWh
  double energy_sd = 0.0;
};

struct EnergyModel {
  double carbon_intensity = kDefaultCarbonIntensity;
  SamplingParams autonomous{1.0, 0.05, 1e-6, 1e-7};
  SamplingParams human{5.0, 0.25, 3e-6, 3e-7};

  const SamplingParams& params(ActionKind k) const {
    return k == ActionKind::Autonomous ? autonomous : human;
  }
};

/// kWh -> kgCO2eq for the given carbon intensity (g/kWh).
inline double co2_from_energy(double energy_kwh, double carbon_intensity) {
  return energy_kwh * carbon_intensity / 1000.0;
}

inline double smooth(double prev_estimate, double observed, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("smoothing alpha must lie in (0, 1]");
  return prev_estimate + alpha * (observed - prev_estimate);
}

inline long remaining_interactions(long h_max, long h_done, long h) { return h_max - h_done - h; }

namespace detail {
// Normal draw floored at a small positive value. The draw is always taken so
// the random stream advances identically whatever the parameters are.
inline double floored_normal(std::mt19937_64& rng, double mean, double sd) {
  std::normal_distribution<double> dist(0.0, 1.0);
  const double z = dist(rng);
  return std::max(mean + sd * z, kMinPositive);
}
}  // namespace detail

inline ActionAttributes sample_attributes(ActionKind kind, const EnergyModel& energy,
                                          std::mt19937_64& rng) {
  const auto& p = energy.params(kind);
  ActionAttributes a;
  a.run_time = detail::floored_normal(rng, p.time_mean, p.time_sd);
  const double kwh = detail::floored_normal(rng, p.energy_mean, p.energy_sd);
  a.co2 = co2_from_energy(kwh, energy.carbon_intensity);
  a.human_interactions = kind == ActionKind::Human ? 1 : 0;
  return a;
}

/// Per-run smoothed estimates for both actions. An action's estimates are
/// seeded by its first observation; until then the configured means stand in.
class ActionEvaluator {
 public:
  ActionEvaluator(EnergyModel energy, double alpha = 0.5, long h_max = 1000)
      : energy_(energy), alpha_(alpha), h_max_(h_max) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("smoothing alpha must lie in (0, 1]");
    if (!(energy.carbon_intensity > 0.0)) throw DomainError("carbon intensity must be positive");
  }

  void observe(ActionKind kind, const ActionAttributes& attrs) {
    auto& slot = slots_[index_of(kind)];
    if (!slot) {
      slot = Smoothed{attrs.run_time, attrs.co2};
    } else {
      slot->t_hat = smooth(slot->t_hat, attrs.run_time, alpha_);
      slot->c_hat = smooth(slot->c_hat, attrs.co2, alpha_);
    }
    h_done_[index_of(kind)] += attrs.human_interactions;
  }

  EstimateSet estimates() const {
    EstimateSet out;
    for (ActionKind k : kActionKinds) {
      const auto& slot = slots_[index_of(k)];
      const auto& p = energy_.params(k);
      auto& e = out[index_of(k)];
      e.t_hat = slot ? slot->t_hat : p.time_mean;
      e.c_hat = slot ? slot->c_hat : co2_from_energy(p.energy_mean, energy_.carbon_intensity);
      e.h_remaining = remaining_interactions(h_max_, h_done_[index_of(k)], interactions_needed(k));
    }
    return out;
  }

  long human_interactions_done() const { return h_done_[index_of(ActionKind::Human)]; }
  const EnergyModel& energy() const { return energy_; }
  double alpha() const { return alpha_; }
  long h_max() const { return h_max_; }

  static int interactions_needed(ActionKind k) { return k == ActionKind::Human ? 1 : 0; }

 private:
  struct Smoothed {
    double t_hat;
    double c_hat;
  };
  EnergyModel energy_;
  double alpha_;
  long h_max_;
  std::array<std::optional<Smoothed>, 2> slots_{};
  std::array<long, 2> h_done_{};
};

}  // namespace olcais::eval
