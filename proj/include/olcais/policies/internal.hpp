#pragma once

#include "olcais/types.hpp"

namespace olcais::policy {

/// Act autonomously iff the classifier's top probability reaches K.
inline ActionKind internal_select(double p_hat, double k) {
  return p_hat >= k ? ActionKind::Autonomous : ActionKind::Human;
}

}  // namespace olcais::policy
