#pragma once

// Experiment configuration and its JSON document form (schema_version 1).

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "olcais/evaluator.hpp"
#include "olcais/learner.hpp"
#include "olcais/policies/policy.hpp"
#include "olcais/policies/q_learning.hpp"
#include "olcais/policies/weighted_sum.hpp"
#include "olcais/simulator.hpp"

namespace olcais {

inline constexpr int kConfigSchemaVersion = 1;

struct FieldError {
  std::string field;
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<FieldError> errors)
      : std::runtime_error(summarize(errors)), errors_(std::move(errors)) {}
  ConfigError(std::string field, std::string message)
      : ConfigError(std::vector<FieldError>{{std::move(field), std::move(message)}}) {}
  const std::vector<FieldError>& errors() const { return errors_; }

 private:
  static std::string summarize(const std::vector<FieldError>& errors) {
    std::string s = "invalid configuration";
    for (const auto& e : errors) s += "; " + e.field + ": " + e.message;
    return s;
  }
  std::vector<FieldError> errors_;
};

struct ExperimentConfig {
  std::uint64_t seed = 42;
  policy::PolicyKind policy = policy::PolicyKind::Internal;
  std::size_t n_classes = 3;
  std::size_t m = 5;
  std::size_t steady_len = 30;
  std::optional<std::size_t> disrupt_start;  // defaults to steady_len
  std::optional<std::size_t> fix_at;         // defaults to the recovery/double-length rule
  std::string disruptor = "darkness";
  double darkness_factor = 0.2;
  std::size_t cycles = 1;
  std::optional<std::size_t> stop_support_after;  // defaults to m
  double satisfactory = 0.5;
  std::size_t budget_per_cycle = 600;
  bool auto_schedule = true;
  sim::ClassOrder class_order = sim::ClassOrder::RoundRobin;
  sim::GeneratorParams generator{};

  double learning_rate = learn::kDefaultLearningRate;
  double l2_penalty = learn::kDefaultL2Penalty;

  double smoothing_alpha = 0.5;
  long h_max = 1000;
  eval::EnergyModel energy{};

  policy::ObjectiveWeights weights{};
  policy::QParams rl{};
  policy::StateWeights rl_state_weights{};

  double pace_hz = 20.0;  // live service runs only
  std::string output_dir = "out";

  std::size_t effective_disrupt_start() const { return disrupt_start.value_or(steady_len); }
  std::size_t effective_stop_support_after() const { return stop_support_after.value_or(m); }
  std::size_t iteration_budget() const { return budget_per_cycle * cycles; }
  sim::Disruptor make_disruptor() const { return sim::make_disruptor(disruptor, darkness_factor); }

  std::vector<FieldError> validate() const {
    std::vector<FieldError> errs;
    const auto fail = [&](std::string f, std::string msg) { errs.push_back({std::move(f), std::move(msg)}); };
    if (m < 1) fail("m", "window size must be >= 1");
    if (steady_len < m) fail("steady_len", "must be >= m");
    if (n_classes != kNumColorClasses) fail("n_classes", "the simulator provides exactly 3 classes");
    if (effective_disrupt_start() < steady_len) fail("disrupt_start", "must be >= steady_len");
    if (fix_at && *fix_at <= effective_disrupt_start()) fail("fix_at", "must come after disrupt_start");
    if (cycles < 1) fail("cycles", "must be >= 1");
    if (stop_support_after && *stop_support_after < 1) fail("stop_support_after", "must be >= 1");
    if (!(satisfactory >= 0.0 && satisfactory <= 1.0)) fail("satisfactory", "must lie in [0, 1]");
    if (budget_per_cycle < 1) fail("budget_per_cycle", "must be >= 1");
    if (!sim::disruptor_registry().contains(disruptor)) fail("disruptor.name", "unknown disruptor");
    if (disruptor == "darkness" && !(darkness_factor > 0.0 && darkness_factor <= 1.0))
      fail("disruptor.factor", "must lie in (0, 1]");
    if (!(learning_rate >= 0.0)) fail("learner.learning_rate", "must be >= 0");
    if (!(l2_penalty >= 0.0)) fail("learner.l2_penalty", "must be >= 0");
    if (!(smoothing_alpha > 0.0 && smoothing_alpha <= 1.0)) fail("evaluator.alpha", "must lie in (0, 1]");
    if (h_max < 0) fail("evaluator.h_max", "must be >= 0");
    if (!(energy.carbon_intensity > 0.0)) fail("evaluator.carbon_intensity", "must be > 0");
    for (const auto* p : {&energy.autonomous, &energy.human})
      if (!(p->time_mean > 0.0 && p->time_sd >= 0.0 && p->energy_mean >= 0.0 && p->energy_sd >= 0.0))
        fail("evaluator.sampling", "means must be positive and deviations nonnegative");
    if (!(weights.resilience >= 0.0 && weights.greenness >= 0.0) ||
        std::abs(weights.resilience + weights.greenness - 1.0) > 1e-9)
      fail("weights", "must be nonnegative and sum to 1");
    if (!(rl.alpha > 0.0 && rl.alpha <= 1.0)) fail("rl.alpha", "must lie in (0, 1]");
    if (!(rl.gamma >= 0.0 && rl.gamma <= 1.0)) fail("rl.gamma", "must lie in [0, 1]");
    if (!(rl.epsilon >= 0.0 && rl.epsilon <= 1.0)) fail("rl.epsilon", "must lie in [0, 1]");
    if (!(pace_hz >= 0.0)) fail("pace_hz", "must be >= 0");
    return errs;
  }
};

// ---------------------------------------------------------------------------
// JSON

namespace detail {

using nlohmann::json;

template <typename T>
void read_field(const json& j, const char* key, T& out, const std::string& path,
                std::vector<FieldError>& errs) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    errs.push_back({path.empty() ? key : path + "." + key, "wrong type"});
  }
}

inline void read_size(const json& j, const char* key, std::size_t& out, const std::string& path,
                      std::vector<FieldError>& errs) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  const auto& v = j.at(key);
  const std::string name = path.empty() ? key : path + "." + key;
  if (v.is_number_integer() && v.get<long long>() >= 0) {
    out = v.get<std::size_t>();
  } else if (v.is_number_integer()) {
    // negative values: keep zero so range validation names the field
    out = 0;
    errs.push_back({name, "must be nonnegative"});
  } else {
    errs.push_back({name, "must be an integer"});
  }
}

inline void read_opt_size(const json& j, const char* key, std::optional<std::size_t>& out,
                          const std::string& path, std::vector<FieldError>& errs) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  std::size_t v = 0;
  read_size(j, key, v, path, errs);
  out = v;
}

inline void read_sampling(const json& j, const char* key, eval::SamplingParams& p,
                          std::vector<FieldError>& errs) {
  if (!j.contains(key)) return;
  const auto& s = j.at(key);
  const std::string path = std::string("evaluator.") + key;
  read_field(s, "time_mean", p.time_mean, path, errs);
  read_field(s, "time_sd", p.time_sd, path, errs);
  read_field(s, "energy_mean", p.energy_mean, path, errs);
  read_field(s, "energy_sd", p.energy_sd, path, errs);
}

}  // namespace detail

/// Parses and validates a config document; throws ConfigError listing every
/// offending field.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::read_field;
  using detail::read_size;
  std::vector<FieldError> errs;
  ExperimentConfig c;
  if (!j.is_object()) throw ConfigError("$", "config must be a JSON object");

  int version = kConfigSchemaVersion;
  read_field(j, "schema_version", version, "", errs);
  if (version != kConfigSchemaVersion) errs.push_back({"schema_version", "unsupported version"});

  read_field(j, "seed", c.seed, "", errs);
  if (j.contains("policy")) {
    std::string name;
    read_field(j, "policy", name, "", errs);
    if (auto p = policy::parse_policy(name)) c.policy = *p;
    else errs.push_back({"policy", "expected one of internal, one-agent, two-agent, rl-agent"});
  }
  read_size(j, "n_classes", c.n_classes, "", errs);
  read_size(j, "m", c.m, "", errs);
  read_size(j, "steady_len", c.steady_len, "", errs);
  detail::read_opt_size(j, "disrupt_start", c.disrupt_start, "", errs);
  detail::read_opt_size(j, "fix_at", c.fix_at, "", errs);
  read_size(j, "cycles", c.cycles, "", errs);
  detail::read_opt_size(j, "stop_support_after", c.stop_support_after, "", errs);
  read_field(j, "satisfactory", c.satisfactory, "", errs);
  read_size(j, "budget_per_cycle", c.budget_per_cycle, "", errs);
  read_field(j, "auto_schedule", c.auto_schedule, "", errs);
  read_field(j, "pace_hz", c.pace_hz, "", errs);
  read_field(j, "output_dir", c.output_dir, "", errs);
  if (j.contains("class_order")) {
    std::string order;
    read_field(j, "class_order", order, "", errs);
    if (order == "round_robin") c.class_order = sim::ClassOrder::RoundRobin;
    else if (order == "shuffle") c.class_order = sim::ClassOrder::Shuffle;
    else errs.push_back({"class_order", "expected round_robin or shuffle"});
  }
  if (j.contains("disruptor")) {
    const auto& d = j.at("disruptor");
    read_field(d, "name", c.disruptor, "disruptor", errs);
    read_field(d, "factor", c.darkness_factor, "disruptor", errs);
  }
  if (j.contains("learner")) {
    const auto& l = j.at("learner");
    read_field(l, "learning_rate", c.learning_rate, "learner", errs);
    read_field(l, "l2_penalty", c.l2_penalty, "learner", errs);
  }
  if (j.contains("evaluator")) {
    const auto& e = j.at("evaluator");
    read_field(e, "alpha", c.smoothing_alpha, "evaluator", errs);
    read_field(e, "h_max", c.h_max, "evaluator", errs);
    read_field(e, "carbon_intensity", c.energy.carbon_intensity, "evaluator", errs);
    detail::read_sampling(e, "autonomous", c.energy.autonomous, errs);
    detail::read_sampling(e, "human", c.energy.human, errs);
  }
  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    read_field(w, "resilience", c.weights.resilience, "weights", errs);
    read_field(w, "greenness", c.weights.greenness, "weights", errs);
  }
  if (j.contains("rl")) {
    const auto& r = j.at("rl");
    read_field(r, "alpha", c.rl.alpha, "rl", errs);
    read_field(r, "gamma", c.rl.gamma, "rl", errs);
    read_field(r, "epsilon", c.rl.epsilon, "rl", errs);
    read_field(r, "w_g", c.rl_state_weights.greenness, "rl", errs);
    read_field(r, "w_r", c.rl_state_weights.resilience, "rl", errs);
  }
  if (j.contains("generator")) {
    const auto& g = j.at("generator");
    read_field(g, "dominant_mean", c.generator.dominant_mean, "generator", errs);
    read_field(g, "dominant_sd", c.generator.dominant_sd, "generator", errs);
    read_field(g, "other_mean", c.generator.other_mean, "generator", errs);
    read_field(g, "other_sd", c.generator.other_sd, "generator", errs);
  }

  if (errs.empty()) errs = c.validate();
  if (!errs.empty()) throw ConfigError(std::move(errs));
  return c;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["seed"] = c.seed;
  j["policy"] = std::string(policy::to_string(c.policy));
  j["n_classes"] = c.n_classes;
  j["m"] = c.m;
  j["steady_len"] = c.steady_len;
  j["disrupt_start"] = c.effective_disrupt_start();
  j["fix_at"] = c.fix_at ? nlohmann::json(*c.fix_at) : nlohmann::json(nullptr);
  j["disruptor"] = {{"name", c.disruptor}, {"factor", c.darkness_factor}};
  j["cycles"] = c.cycles;
  j["stop_support_after"] = c.effective_stop_support_after();
  j["satisfactory"] = c.satisfactory;
  j["budget_per_cycle"] = c.budget_per_cycle;
  j["auto_schedule"] = c.auto_schedule;
  j["class_order"] = c.class_order == sim::ClassOrder::RoundRobin ? "round_robin" : "shuffle";
  j["learner"] = {{"learning_rate", c.learning_rate}, {"l2_penalty", c.l2_penalty}};
  const auto sampling = [](const eval::SamplingParams& p) {
    return nlohmann::json{{"time_mean", p.time_mean},
                          {"time_sd", p.time_sd},
                          {"energy_mean", p.energy_mean},
                          {"energy_sd", p.energy_sd}};
  };
  j["evaluator"] = {{"alpha", c.smoothing_alpha},
                    {"h_max", c.h_max},
                    {"carbon_intensity", c.energy.carbon_intensity},
                    {"autonomous", sampling(c.energy.autonomous)},
                    {"human", sampling(c.energy.human)}};
  j["weights"] = {{"resilience", c.weights.resilience}, {"greenness", c.weights.greenness}};
  j["rl"] = {{"alpha", c.rl.alpha},
             {"gamma", c.rl.gamma},
             {"epsilon", c.rl.epsilon},
             {"w_g", c.rl_state_weights.greenness},
             {"w_r", c.rl_state_weights.resilience}};
  j["generator"] = {{"dominant_mean", c.generator.dominant_mean},
                    {"dominant_sd", c.generator.dominant_sd},
                    {"other_mean", c.generator.other_mean},
                    {"other_sd", c.generator.other_sd}};
  j["pace_hz"] = c.pace_hz;
  j["output_dir"] = c.output_dir;
  return j;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("$", std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace olcais
