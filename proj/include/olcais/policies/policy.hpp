#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace olcais::policy {

enum class PolicyKind { Internal, OneAgent, TwoAgent, RlAgent };

inline constexpr std::array<PolicyKind, 4> kAllPolicies{PolicyKind::Internal, PolicyKind::OneAgent,
                                                       PolicyKind::TwoAgent, PolicyKind::RlAgent};

inline std::string_view to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::Internal: return "internal";
    case PolicyKind::OneAgent: return "one-agent";
    case PolicyKind::TwoAgent: return "two-agent";
    case PolicyKind::RlAgent: return "rl-agent";
  }
  return "?";
}

inline std::optional<PolicyKind> parse_policy(std::string_view name) {
  for (auto p : kAllPolicies)
    if (to_string(p) == name) return p;
  return std::nullopt;
}

/// Inverse guard shared by the one- and two-agent kernels.
inline constexpr double kInverseFloor = 1e-9;

}  // namespace olcais::policy
