#pragma once

// CSV persistence for runs: iterations.csv, metrics.csv, segments.csv.
// RFC 4180 quoting; reals use the shortest round-trip representation.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "olcais/experiment.hpp"
#include "olcais/measurements.hpp"
#include "olcais/record.hpp"

namespace olcais::csv {

inline constexpr std::string_view kIterationsHeader =
    "iteration,mode,policy_active,action_kind,t,c,h,p_hat,predicted_class,true_class,acr,state_name,cycle";
inline constexpr std::string_view kMetricsHeader =
    "policy,seed,cycle,duration_ratio,fluctuation_ratio,co2_mean,human_dependency";
inline constexpr std::string_view kSegmentsHeader = "cycle,segment,first_iteration,last_iteration";

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shortest text that parses back to the same double.
inline std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

/// Splits one CSV document into rows of fields (quoted fields may span lines).
inline std::vector<std::vector<std::string>> parse(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"': quoted = true; any = true; break;
      case ',': row.push_back(std::move(field)); field.clear(); any = true; break;
      case '\r': break;
      case '\n':
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        any = false;
        break;
      default: field += ch; any = true;
    }
  }
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// -- writers ----------------------------------------------------------------

inline std::string iterations_csv(const std::vector<IterationRecord>& records) {
  std::string out(kIterationsHeader);
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.iteration) + ',' + std::string(to_string(r.mode)) + ',' + escape(r.policy_active) +
           ',' + std::string(to_string(r.action)) + ',' + format_real(r.t) + ',' + format_real(r.c) + ',' +
           std::to_string(r.h) + ',' + format_real(r.p_hat) + ',' + std::string(to_string(r.predicted)) + ',' +
           std::string(to_string(r.true_class)) + ',' + format_real(r.acr) + ',' +
           std::string(resilience::to_string(r.state)) + ',' + std::to_string(r.cycle) + '\n';
  }
  return out;
}

inline std::string metrics_csv(const std::vector<metrics::MetricsReport>& reports) {
  std::string out(kMetricsHeader);
  out += '\n';
  for (const auto& m : reports)
    out += escape(m.policy) + ',' + std::to_string(m.seed) + ',' + std::to_string(m.cycle) + ',' +
           format_real(m.duration_ratio) + ',' + format_real(m.fluctuation_ratio) + ',' +
           format_real(m.co2_mean) + ',' + format_real(m.human_dependency) + '\n';
  return out;
}

inline std::string segments_csv(const metrics::StateSegments& segments) {
  std::string out(kSegmentsHeader);
  out += '\n';
  const auto row = [&](std::size_t cycle, std::string_view name, const std::optional<metrics::Range>& r) {
    if (!r) return;
    out += std::to_string(cycle) + ',' + std::string(name) + ',' + std::to_string(r->first) + ',' +
           std::to_string(r->last) + '\n';
  };
  for (const auto& s : segments) {
    row(s.cycle, "steady", s.steady);
    row(s.cycle, "performance_degradation", s.degradation);
    row(s.cycle, "recovering", s.recovering);
    row(s.cycle, "recovered", s.recovered);
    row(s.cycle, "disruptive", s.disruptive);
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

struct DumpPaths {
  std::filesystem::path iterations;
  std::filesystem::path metrics;
  std::filesystem::path segments;
};

inline DumpPaths dump_csv(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  DumpPaths p{dir / "iterations.csv", dir / "metrics.csv", dir / "segments.csv"};
  write_file(p.iterations, iterations_csv(result.records));
  write_file(p.metrics, metrics_csv(result.metrics));
  write_file(p.segments, segments_csv(result.segments));
  return p;
}

// -- readers ----------------------------------------------------------------

namespace detail {
inline void expect_header(const std::vector<std::vector<std::string>>& rows, std::string_view header,
                          const std::string& what) {
  if (rows.empty()) throw IoError(what + ": missing header");
  std::string joined;
  for (std::size_t i = 0; i < rows[0].size(); ++i) joined += (i ? "," : "") + rows[0][i];
  if (joined != header) throw IoError(what + ": unexpected header '" + joined + "'");
}

template <typename T>
T required(std::optional<T> v, const std::string& what) {
  if (!v) throw IoError("bad value in " + what);
  return *v;
}
}  // namespace detail

inline std::vector<IterationRecord> parse_iterations(std::string_view text) {
  const auto rows = parse(text);
  detail::expect_header(rows, kIterationsHeader, "iterations.csv");
  std::vector<IterationRecord> out;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto& f = rows[k];
    if (f.size() != 13) throw IoError("iterations.csv: row " + std::to_string(k) + " has wrong width");
    IterationRecord r;
    r.iteration = std::stoull(f[0]);
    r.mode = detail::required(parse_feed_mode(f[1]), "mode");
    r.policy_active = f[2];
    r.action = detail::required(parse_action_kind(f[3]), "action_kind");
    r.t = std::stod(f[4]);
    r.c = std::stod(f[5]);
    r.h = std::stoi(f[6]);
    r.p_hat = std::stod(f[7]);
    r.predicted = detail::required(parse_color_class(f[8]), "predicted_class");
    r.true_class = detail::required(parse_color_class(f[9]), "true_class");
    r.acr = std::stod(f[10]);
    r.state = detail::required(resilience::parse_state(f[11]), "state_name");
    r.cycle = std::stoull(f[12]);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<metrics::MetricsReport> parse_metrics(std::string_view text) {
  const auto rows = parse(text);
  detail::expect_header(rows, kMetricsHeader, "metrics.csv");
  std::vector<metrics::MetricsReport> out;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto& f = rows[k];
    if (f.size() != 7) throw IoError("metrics.csv: row " + std::to_string(k) + " has wrong width");
    metrics::MetricsReport m;
    m.policy = f[0];
    m.seed = std::stoull(f[1]);
    m.cycle = std::stoull(f[2]);
    m.duration_ratio = std::stod(f[3]);
    m.fluctuation_ratio = std::stod(f[4]);
    m.co2_mean = std::stod(f[5]);
    m.human_dependency = std::stod(f[6]);
    out.push_back(std::move(m));
  }
  return out;
}

inline std::vector<IterationRecord> read_iterations(const std::filesystem::path& path) {
  return parse_iterations(read_file(path));
}

inline std::vector<metrics::MetricsReport> read_metrics(const std::filesystem::path& path) {
  return parse_metrics(read_file(path));
}

}  // namespace olcais::csv
