// Runs the darkness scenario once and prints the state segments and metrics.

#include <cstdio>

#include "olcais/experiment.hpp"

int main(int argc, char** argv) {
  olcais::ExperimentConfig cfg;
  cfg.seed = argc > 1 ? std::stoull(argv[1]) : 42;
  cfg.disruptor = "darkness";
  cfg.darkness_factor = 0.2;

  const auto r = olcais::run_experiment(cfg);
  std::printf("seed %llu: %zu iterations\n", static_cast<unsigned long long>(cfg.seed), r.records.size());
  for (std::size_t k = 0; k < r.inject_iterations.size(); ++k) std::printf("  inject at %zu\n", r.inject_iterations[k]);
  for (std::size_t k = 0; k < r.fix_iterations.size(); ++k) std::printf("  fix at %zu\n", r.fix_iterations[k]);
  for (const auto& m : r.metrics)
    std::printf("  cycle %zu: duration %.3f fluctuation %.3f co2 %.3g human %.3f\n", m.cycle, m.duration_ratio,
                m.fluctuation_ratio, m.co2_mean, m.human_dependency);
}
