#pragma once

#include <string>

#include "olcais/resilience.hpp"
#include "olcais/types.hpp"

namespace olcais {

/// One audit row per iteration.
struct IterationRecord {
  std::size_t iteration = 0;
  FeedMode mode = FeedMode::Normal;
  std::string policy_active = "internal";
  ActionKind action = ActionKind::Autonomous;
  double t = 0.0;
  double c = 0.0;
  int h = 0;
  double p_hat = 0.0;
  ColorClass predicted = ColorClass::Red;
  ColorClass true_class = ColorClass::Red;
  double acr = 0.0;
  resilience::State state = resilience::State::Unstarted;
  std::size_t cycle = 0;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

}  // namespace olcais
