#pragma once

// Measurement framework over the disruptive state of a finished trace:
// recovery speed, performance steadiness, green efficiency and autonomy.

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "olcais/record.hpp"
#include "olcais/resilience.hpp"

namespace olcais::metrics {

/// Inclusive iteration range.
struct Range {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t length() const { return last - first + 1; }
  bool contains(std::size_t i) const { return i >= first && i <= last; }
  friend bool operator==(const Range&, const Range&) = default;
};

struct CycleSegments {
  std::size_t cycle = 0;
  std::optional<Range> steady;
  std::optional<Range> degradation;
  std::optional<Range> recovering;
  std::optional<Range> recovered;
  std::optional<Range> disruptive;  // degradation start .. recovered end
};

using StateSegments = std::vector<CycleSegments>;

namespace detail {
inline void extend(std::optional<Range>& r, std::size_t i) {
  if (!r) r = Range{i, i};
  else r->last = std::max(r->last, i), r->first = std::min(r->first, i);
}
}  // namespace detail

/// Builds per-cycle segments from the state column. A cycle that never
/// reaches Recovered closes its disruptive state just before the first fix
/// event that follows its degradation (or at the end of the trace).
inline StateSegments segment_states(std::span<const IterationRecord> records,
                                    std::span<const std::size_t> fix_iterations = {}) {
  StateSegments out;
  for (const auto& r : records) {
    if (r.state == resilience::State::Unstarted) continue;
    while (out.size() <= r.cycle) {
      CycleSegments fresh;
      fresh.cycle = out.size();
      out.push_back(fresh);
    }
    auto& seg = out[r.cycle];
    switch (r.state) {
      case resilience::State::Steady: detail::extend(seg.steady, r.iteration); break;
      case resilience::State::PerformanceDegradation: detail::extend(seg.degradation, r.iteration); break;
      case resilience::State::Recovering: detail::extend(seg.recovering, r.iteration); break;
      case resilience::State::Recovered: detail::extend(seg.recovered, r.iteration); break;
      default: break;
    }
  }
  const std::size_t trace_last = records.empty() ? 0 : records.back().iteration;
  for (auto& seg : out) {
    if (!seg.degradation) continue;
    std::size_t last = trace_last;
    if (seg.recovered) {
      last = seg.recovered->last;
    } else {
      for (std::size_t fix : fix_iterations)
        if (fix > seg.degradation->first) {
          last = std::min(last, fix - 1);
          break;
        }
    }
    seg.disruptive = Range{seg.degradation->first, last};
  }
  return out;
}

inline double duration_ratio(std::size_t recovering_len, std::size_t disruptive_len) {
  if (disruptive_len == 0) throw EmptyStateError("disruptive state is empty");
  return static_cast<double>(recovering_len) / static_cast<double>(disruptive_len);
}

inline double duration_ratio(const CycleSegments& seg) {
  if (!seg.disruptive) throw EmptyStateError("disruptive state is empty");
  std::size_t rec = 0;
  if (seg.recovering) {
    const auto lo = std::max(seg.recovering->first, seg.disruptive->first);
    const auto hi = std::min(seg.recovering->last, seg.disruptive->last);
    if (lo <= hi) rec = hi - lo + 1;
  }
  return duration_ratio(rec, seg.disruptive->length());
}

/// Points below threshold over points at or above it; the denominator is
/// floored at one.
inline double fluctuation_ratio(std::span<const double> acr, double threshold) {
  std::size_t below = 0;
  for (double v : acr) below += v < threshold ? 1 : 0;
  const std::size_t above = acr.size() - below;
  return static_cast<double>(below) / static_cast<double>(std::max<std::size_t>(above, 1));
}

inline double co2_mean(std::span<const double> co2) {
  if (co2.empty()) throw EmptyStateError("disruptive state is empty");
  double sum = 0.0;
  for (double c : co2) sum += c;
  return sum / static_cast<double>(co2.size());
}

inline double human_dependency(std::span<const int> interactions) {
  if (interactions.empty()) throw EmptyStateError("disruptive state is empty");
  long total = 0;
  for (int h : interactions) total += h;
  return static_cast<double>(total) / static_cast<double>(interactions.size());
}

struct MetricsReport {
  std::string policy;
  std::uint64_t seed = 0;
  std::size_t cycle = 0;
  double duration_ratio = 0.0;
  double fluctuation_ratio = 0.0;
  double co2_mean = 0.0;
  double human_dependency = 0.0;
};

/// One report per cycle that has a disruptive state.
inline std::vector<MetricsReport> measure(std::span<const IterationRecord> records,
                                          const StateSegments& segments, double threshold,
                                          const std::string& policy, std::uint64_t seed) {
  std::vector<MetricsReport> out;
  for (const auto& seg : segments) {
    if (!seg.disruptive) continue;
    std::vector<double> acr, co2;
    std::vector<int> h;
    for (const auto& r : records)
      if (seg.disruptive->contains(r.iteration)) {
        acr.push_back(r.acr);
        co2.push_back(r.c);
        h.push_back(r.h);
      }
    if (acr.empty()) continue;
    MetricsReport m;
    m.policy = policy;
    m.seed = seed;
    m.cycle = seg.cycle;
    m.duration_ratio = duration_ratio(seg);
    m.fluctuation_ratio = fluctuation_ratio(acr, threshold);
    m.co2_mean = co2_mean(co2);
    m.human_dependency = human_dependency(h);
    out.push_back(m);
  }
  return out;
}

struct ComparisonRow {
  std::string policy;
  std::size_t count = 0;
  double duration_ratio = 0.0;
  double fluctuation_ratio = 0.0;
  double co2_mean = 0.0;
  double human_dependency = 0.0;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  std::vector<std::string> warnings;
};

/// Per-policy means. Lower is better on every metric.
inline Comparison compare_policies(const std::map<std::string, std::vector<MetricsReport>>& groups) {
  Comparison out;
  for (const auto& [policy, reports] : groups) {
    if (reports.empty()) {
      out.warnings.push_back("policy '" + policy + "' has no reports; excluded");
      continue;
    }
    ComparisonRow row;
    row.policy = policy;
    row.count = reports.size();
    for (const auto& r : reports) {
      row.duration_ratio += r.duration_ratio;
      row.fluctuation_ratio += r.fluctuation_ratio;
      row.co2_mean += r.co2_mean;
      row.human_dependency += r.human_dependency;
    }
    const double n = static_cast<double>(reports.size());
    row.duration_ratio /= n;
    row.fluctuation_ratio /= n;
    row.co2_mean /= n;
    row.human_dependency /= n;
    out.rows.push_back(row);
  }
  return out;
}

inline Comparison compare_policies(std::span<const MetricsReport> reports) {
  std::map<std::string, std::vector<MetricsReport>> groups;
  for (const auto& r : reports) groups[r.policy].push_back(r);
  return compare_policies(groups);
}

}  // namespace olcais::metrics
