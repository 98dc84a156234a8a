// olcais: batch runs, replication batches, the HTTP service and reports.
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "olcais/config.hpp"
#include "olcais/csv.hpp"
#include "olcais/experiment.hpp"
#include "olcais/report.hpp"
#include "olcais/service.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// -o wins, then OLCAIS_OUTPUT_DIR, then the config's output_dir.
fs::path output_dir(const std::string& flag, const olcais::ExperimentConfig& cfg) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("OLCAIS_OUTPUT_DIR"); env && *env) return env;
  return cfg.output_dir;
}

std::vector<olcais::policy::PolicyKind> parse_policies(const std::string& list) {
  std::vector<olcais::policy::PolicyKind> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto p = olcais::policy::parse_policy(item);
    if (!p) throw CLI::ValidationError("--policies", "unknown policy '" + item + "'");
    out.push_back(*p);
  }
  return out;
}

void print_comparison(const olcais::metrics::Comparison& cmp) {
  std::cout << olcais::report::comparison_csv(cmp);
  for (const auto& w : cmp.warnings) std::cerr << "warning: " << w << '\n';
}

int cmd_run(const std::string& config_path, const std::string& out_flag) {
  const auto cfg = olcais::load_config(config_path);
  const auto result = olcais::run_experiment(cfg);
  const auto dir = output_dir(out_flag, cfg);
  const auto paths = olcais::csv::dump_csv(result, dir);
  std::cout << "iterations: " << result.records.size() << '\n';
  std::cout << "wrote " << paths.iterations.string() << ", " << paths.metrics.string() << ", "
            << paths.segments.string() << '\n';
  if (result.status == olcais::RunStatus::BudgetExhausted)
    std::cerr << "warning: iteration budget exhausted before the protocol completed\n";
  return 0;
}

int cmd_replicate(const std::string& config_path, std::size_t count, const std::string& out_flag,
                  const std::string& policies, unsigned workers) {
  const auto cfg = olcais::load_config(config_path);
  const auto kinds = parse_policies(policies);
  const auto batch = olcais::run_replications(cfg, count, kinds, workers);
  const auto dir = output_dir(out_flag, cfg);
  for (const auto& r : batch.results) {
    const auto sub = dir / std::string(olcais::policy::to_string(r.config.policy)) /
                     ("seed-" + std::to_string(r.config.seed));
    olcais::csv::dump_csv(r, sub);
  }
  olcais::csv::write_file(dir / "comparison.csv", olcais::report::comparison_csv(batch.comparison));

  std::string lengths = "policy,steady,performance_degradation,recovering,recovered\n";
  for (const auto& [name, l] : batch.mean_state_lengths)
    lengths += name + ',' + olcais::csv::format_real(l.steady) + ',' + olcais::csv::format_real(l.performance_degradation) +
               ',' + olcais::csv::format_real(l.recovering) + ',' + olcais::csv::format_real(l.recovered) + '\n';
  olcais::csv::write_file(dir / "state_lengths.csv", lengths);

  std::cout << "runs: " << batch.results.size() << '\n';
  print_comparison(batch.comparison);
  return 0;
}

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(std::optional<int> port_flag, const std::string& host) {
  olcais::service::RunRegistry registry;
  httplib::Server server;
  olcais::service::install_routes(server, registry);
  const int port = olcais::service::resolve_port(port_flag);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "listening on " << host << ':' << port << std::endl;
  if (!server.listen(host, port)) {
    std::cerr << "error: cannot listen on " << host << ':' << port << '\n';
    return kExitRuntime;
  }
  return 0;
}

int cmd_report(const std::string& in, const std::string& out) {
  const auto reports = olcais::report::collect_metrics(in);
  const auto cmp = olcais::metrics::compare_policies(reports);
  const auto paths = olcais::report::write_report(cmp, out);
  print_comparison(cmp);
  std::cout << "wrote " << paths.table.string();
  for (const auto& c : paths.charts) std::cout << ", " << c.string();
  std::cout << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resilience and greenness experiments for an online-learning collaborative AI system"};
  app.require_subcommand(1);

  std::string config_path, out_dir, in_dir, report_out, policies, host = "0.0.0.0";
  std::size_t count = 1;
  unsigned workers = 0;
  std::optional<int> port;

  auto* run = app.add_subcommand("run", "Run one experiment and write its CSVs");
  run->add_option("-c,--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--out", out_dir, "Output directory");

  auto* rep = app.add_subcommand("replicate", "Run seeded replications and compare policies");
  rep->add_option("-c,--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  rep->add_option("-n,--count", count, "Replications per policy (seeds base..base+n-1)")
      ->required()
      ->check(CLI::PositiveNumber);
  rep->add_option("-o,--out", out_dir, "Output directory");
  rep->add_option("--policies", policies, "Comma-separated policies (default: the config's policy)");
  rep->add_option("-j,--workers", workers, "Worker threads (0 = hardware concurrency)");

  auto* serve = app.add_subcommand("serve", "Serve the HTTP control API");
  serve->add_option("-p,--port", port, "Port (default OLCAIS_PORT or 8080)")->check(CLI::Range(1, 65535));
  serve->add_option("--host", host, "Bind address");

  auto* rpt = app.add_subcommand("report", "Compare policies from metrics.csv files");
  rpt->add_option("-i,--in", in_dir, "Directory searched recursively for metrics.csv")->required();
  rpt->add_option("-o,--out", report_out, "Comparison table path; charts are written beside it")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir);
    if (*rep) return cmd_replicate(config_path, count, out_dir, policies, workers);
    if (*serve) return cmd_serve(port, host);
    if (*rpt) return cmd_report(in_dir, report_out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const olcais::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
