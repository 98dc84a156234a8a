#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace olcais {

/// Object colour classes emitted by the simulator.
enum class ColorClass : std::uint8_t { Red = 0, Green = 1, Blue = 2 };

inline constexpr std::size_t kNumColorClasses = 3;

/// Feed mode of a streamed instance.
enum class FeedMode : std::uint8_t { Normal, Disrupted };

/// The two feasible actions per iteration.
enum class ActionKind : std::uint8_t { Autonomous = 0, Human = 1 };

inline constexpr std::array<ActionKind, 2> kActionKinds{ActionKind::Autonomous,
                                                       ActionKind::Human};

// Errors. Contract violations are reported by exception, matching the rest
// of the codebase; "no result" outcomes are std::optional.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateColumn : std::domain_error {
  using std::domain_error::domain_error;
};

struct EmptyStateError : std::domain_error {
  using std::domain_error::domain_error;
};

inline std::string_view to_string(ColorClass c) {
  switch (c) {
    case ColorClass::Red: return "red";
    case ColorClass::Green: return "green";
    case ColorClass::Blue: return "blue";
  }
  return "?";
}

inline std::string_view to_string(FeedMode m) {
  return m == FeedMode::Normal ? "normal" : "disrupted";
}

inline std::string_view to_string(ActionKind a) {
  return a == ActionKind::Autonomous ? "autonomous" : "human";
}

inline std::optional<ColorClass> parse_color_class(std::string_view s) {
  if (s == "red") return ColorClass::Red;
  if (s == "green") return ColorClass::Green;
  if (s == "blue") return ColorClass::Blue;
  return std::nullopt;
}

inline std::optional<FeedMode> parse_feed_mode(std::string_view s) {
  if (s == "normal") return FeedMode::Normal;
  if (s == "disrupted") return FeedMode::Disrupted;
  return std::nullopt;
}

inline std::optional<ActionKind> parse_action_kind(std::string_view s) {
  if (s == "autonomous") return ActionKind::Autonomous;
  if (s == "human") return ActionKind::Human;
  return std::nullopt;
}

constexpr std::size_t index_of(ActionKind a) { return static_cast<std::size_t>(a); }
constexpr std::size_t index_of(ColorClass c) { return static_cast<std::size_t>(c); }

}  // namespace olcais
