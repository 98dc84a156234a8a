#pragma once

// HTTP control plane for live runs. Each run steps on its own worker thread,
// paced at config.pace_hz (0 = unthrottled). Control commands are applied
// between iterations; events are kept for replay and pushed to subscribers
// as server-sent-event frames carrying one JSON object each.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "olcais/config.hpp"
#include "olcais/csv.hpp"
#include "olcais/experiment.hpp"

namespace olcais::service {

using nlohmann::json;

enum class RunState { Configured, Running, Paused, Finished, Failed };

inline std::string_view to_string(RunState s) {
  switch (s) {
    case RunState::Configured: return "configured";
    case RunState::Running: return "running";
    case RunState::Paused: return "paused";
    case RunState::Finished: return "finished";
    case RunState::Failed: return "failed";
  }
  return "failed";
}

inline json record_json(const IterationRecord& r) {
  return {{"iteration", r.iteration},
          {"mode", to_string(r.mode)},
          {"policy_active", r.policy_active},
          {"action_kind", to_string(r.action)},
          {"t", r.t},
          {"c", r.c},
          {"h", r.h},
          {"p_hat", r.p_hat},
          {"predicted_class", to_string(r.predicted)},
          {"true_class", to_string(r.true_class)},
          {"acr", r.acr},
          {"state_name", resilience::to_string(r.state)},
          {"cycle", r.cycle}};
}

inline json metrics_json(const metrics::MetricsReport& m) {
  return {{"policy", m.policy},
          {"seed", m.seed},
          {"cycle", m.cycle},
          {"duration_ratio", m.duration_ratio},
          {"fluctuation_ratio", m.fluctuation_ratio},
          {"co2_mean", m.co2_mean},
          {"human_dependency", m.human_dependency}};
}

inline json errors_json(const std::vector<FieldError>& errs) {
  json arr = json::array();
  for (const auto& e : errs) arr.push_back({{"field", e.field}, {"message", e.message}});
  return {{"errors", arr}};
}

struct Event {
  std::size_t seq = 0;
  std::size_t iteration = 0;
  std::string type;  // iteration | state_change | metrics | status
  json body;

  std::string frame() const {
    return "id: " + std::to_string(seq) + "\nevent: " + type + "\ndata: " + body.dump() + "\n\n";
  }
};

struct Command {
  enum class Kind { SwitchPolicy, Inject, Fix, Pause, Resume };
  Kind kind = Kind::Pause;
  policy::PolicyKind policy = policy::PolicyKind::Internal;
  std::string disruptor = "darkness";
  double factor = 0.2;
  std::optional<std::size_t> at;
};

struct ControlOutcome {
  int status = 200;
  std::string error;
  std::size_t acknowledged_iteration = 0;
};

/// Parses a control body. Returns an error message on malformed input.
inline std::optional<std::string> parse_command(const json& j, const ExperimentConfig& cfg, Command& out) {
  if (!j.is_object() || !j.contains("command") || !j["command"].is_string()) return "missing 'command'";
  const auto name = j["command"].get<std::string>();
  if (name == "switch_policy") {
    out.kind = Command::Kind::SwitchPolicy;
    if (!j.contains("policy") || !j["policy"].is_string()) return "switch_policy needs 'policy'";
    const auto p = policy::parse_policy(j["policy"].get<std::string>());
    if (!p) return "unknown policy";
    out.policy = *p;
  } else if (name == "inject_disruption") {
    out.kind = Command::Kind::Inject;
    out.disruptor = cfg.disruptor;
    out.factor = cfg.darkness_factor;
    if (j.contains("disruptor")) {
      const auto& d = j["disruptor"];
      if (!d.is_object()) return "'disruptor' must be an object";
      if (d.contains("name")) {
        if (!d["name"].is_string()) return "disruptor.name must be a string";
        out.disruptor = d["name"].get<std::string>();
      }
      if (d.contains("factor")) {
        if (!d["factor"].is_number()) return "disruptor.factor must be a number";
        out.factor = d["factor"].get<double>();
      }
    }
    try {
      (void)sim::make_disruptor(out.disruptor, out.factor);
    } catch (const DomainError& e) {
      return std::string(e.what());
    }
  } else if (name == "fix_disruption") {
    out.kind = Command::Kind::Fix;
  } else if (name == "pause") {
    out.kind = Command::Kind::Pause;
  } else if (name == "resume") {
    out.kind = Command::Kind::Resume;
  } else {
    return "unknown command '" + name + "'";
  }
  if (j.contains("at") && !j["at"].is_null()) {
    if (!j["at"].is_number_unsigned()) return "'at' must be a nonnegative iteration";
    out.at = j["at"].get<std::size_t>();
  }
  return std::nullopt;
}

class LiveRun {
 public:
  LiveRun(std::string id, ExperimentConfig cfg) : id_(std::move(id)), exp_(std::move(cfg)) {}

  ~LiveRun() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    if (worker_.joinable()) worker_.join();
  }

  LiveRun(const LiveRun&) = delete;
  LiveRun& operator=(const LiveRun&) = delete;

  const std::string& id() const { return id_; }

  void start() {
    {
      std::lock_guard lock(mu_);
      state_ = RunState::Running;
      push_status();
    }
    worker_ = std::thread([this] { loop(); });
  }

  ControlOutcome control(const Command& cmd) {
    std::lock_guard lock(mu_);
    if (state_ != RunState::Running && state_ != RunState::Paused)
      return {409, "run is " + std::string(to_string(state_)), 0};
    const std::size_t next = exp_.next_iteration();
    if (cmd.at) {
      if (*cmd.at < next) return {409, "iteration " + std::to_string(*cmd.at) + " has already started", 0};
      if (*cmd.at > next) {
        queued_.push_back(cmd);
        return {202, "", *cmd.at};
      }
    }
    ControlOutcome out = apply(cmd);
    cv_.notify_all();
    return out;
  }

  /// Events from `cursor` on; blocks up to `wait` for new ones. `ended` is
  /// set once the run is terminal and every event has been handed out.
  std::vector<Event> poll(std::size_t& cursor, std::chrono::milliseconds wait, bool& ended) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, wait, [&] { return cursor < events_.size() || terminal() || stop_; });
    std::vector<Event> out(events_.begin() + static_cast<std::ptrdiff_t>(std::min(cursor, events_.size())),
                           events_.end());
    cursor = events_.size();
    ended = terminal() || stop_;
    return out;
  }

  /// Index of the first event at or after `iteration`.
  std::size_t cursor_for(std::size_t iteration) {
    std::lock_guard lock(mu_);
    std::size_t k = 0;
    while (k < events_.size() && events_[k].iteration < iteration) ++k;
    return k;
  }

  json summary() {
    std::lock_guard lock(mu_);
    json j{{"run_id", id_},
           {"status", to_string(state_)},
           {"next_iteration", exp_.next_iteration()},
           {"state", resilience::to_string(exp_.tracker().current())},
           {"cycle", exp_.tracker().cycle()},
           {"support_policy", policy::to_string(exp_.support_policy())},
           {"disrupted", exp_.disrupted()},
           {"config", config_to_json(exp_.config())}};
    if (!error_.empty()) j["error"] = error_;
    return j;
  }

  std::vector<metrics::MetricsReport> metrics() {
    std::lock_guard lock(mu_);
    return exp_.result().metrics;
  }

  ExperimentResult result() {
    std::lock_guard lock(mu_);
    return exp_.result();
  }

  RunState state() {
    std::lock_guard lock(mu_);
    return state_;
  }

  ExperimentConfig config() {
    std::lock_guard lock(mu_);
    return exp_.config();
  }

 private:
  bool terminal() const { return state_ == RunState::Finished || state_ == RunState::Failed; }

  ControlOutcome apply(const Command& cmd) {
    const std::size_t next = exp_.next_iteration();
    switch (cmd.kind) {
      case Command::Kind::SwitchPolicy:
        exp_.switch_policy(cmd.policy);
        break;
      case Command::Kind::Inject:
        if (!exp_.inject(sim::make_disruptor(cmd.disruptor, cmd.factor)))
          return {409, "a disruption is already active", next};
        break;
      case Command::Kind::Fix:
        if (!exp_.fix()) return {409, "no active disruption", next};
        break;
      case Command::Kind::Pause:
        if (state_ != RunState::Running) return {409, "run is not running", next};
        state_ = RunState::Paused;
        push_status();
        break;
      case Command::Kind::Resume:
        if (state_ != RunState::Paused) return {409, "run is not paused", next};
        state_ = RunState::Running;
        push_status();
        break;
    }
    return {200, "", next};
  }

  // Queued commands whose iteration has come. Invalid ones are dropped.
  void apply_due() {
    const std::size_t next = exp_.next_iteration();
    for (auto it = queued_.begin(); it != queued_.end();) {
      if (it->at && *it->at <= next) {
        (void)apply(*it);
        it = queued_.erase(it);
      } else {
        ++it;
      }
    }
  }

  void push(std::string type, std::size_t iteration, json body) {
    events_.push_back({events_.size(), iteration, std::move(type), std::move(body)});
  }

  void push_status() {
    push("status", exp_.next_iteration(),
         {{"status", to_string(state_)}, {"iteration", exp_.next_iteration()}});
  }

  void push_new_metrics(std::size_t iteration) {
    const auto reports = exp_.result().metrics;
    for (const auto& m : reports) {
      const auto key = std::make_pair(m.cycle, m.policy);
      json body = metrics_json(m);
      auto it = emitted_metrics_.find(key);
      if (it != emitted_metrics_.end() && it->second == body) continue;
      emitted_metrics_[key] = body;
      body["iteration"] = iteration;
      push("metrics", iteration, std::move(body));
    }
  }

  void loop() {
    using clock = std::chrono::steady_clock;
    const double hz = exp_.config().pace_hz;
    const auto period = hz > 0.0 ? std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / hz))
                                 : clock::duration::zero();
    auto next_tick = clock::now();
    for (;;) {
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return stop_ || state_ != RunState::Paused; });
        if (stop_ || terminal()) return;
        apply_due();
        if (state_ == RunState::Paused) continue;
        const auto prev_state = exp_.tracker().current();
        const auto prev_cycle = exp_.tracker().cycle();
        try {
          const auto rec = exp_.step();
          if (!rec) {
            push_new_metrics(exp_.next_iteration());
            state_ = RunState::Finished;
            push_status();
            cv_.notify_all();
            return;
          }
          push("iteration", rec->iteration, record_json(*rec));
          if (rec->state != prev_state || rec->cycle != prev_cycle) {
            push("state_change", rec->iteration,
                 {{"state_name", resilience::to_string(rec->state)},
                  {"display_name", resilience::display_name(rec->state, rec->cycle)},
                  {"cycle", rec->cycle},
                  {"iteration", rec->iteration}});
            push_new_metrics(rec->iteration);
          }
        } catch (const std::exception& e) {
          error_ = e.what();
          state_ = RunState::Failed;
          push_status();
          cv_.notify_all();
          return;
        }
      }
      cv_.notify_all();
      if (period > clock::duration::zero()) {
        next_tick += period;
        std::unique_lock lock(mu_);
        cv_.wait_until(lock, next_tick, [&] { return stop_; });
        if (stop_) return;
      }
    }
  }

  std::string id_;
  std::mutex mu_;
  std::condition_variable cv_;
  Experiment exp_;
  RunState state_ = RunState::Configured;
  std::vector<Event> events_;
  std::deque<Command> queued_;
  std::map<std::pair<std::size_t, std::string>, json> emitted_metrics_;
  std::string error_;
  bool stop_ = false;
  std::thread worker_;
};

class RunRegistry {
 public:
  std::shared_ptr<LiveRun> create(ExperimentConfig cfg) {
    std::lock_guard lock(mu_);
    char buf[32];
    std::snprintf(buf, sizeof buf, "run-%06zu", ++counter_);
    auto run = std::make_shared<LiveRun>(buf, std::move(cfg));
    runs_[run->id()] = run;
    run->start();
    return run;
  }

  std::shared_ptr<LiveRun> find(const std::string& id) {
    std::lock_guard lock(mu_);
    auto it = runs_.find(id);
    return it == runs_.end() ? nullptr : it->second;
  }

 private:
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<LiveRun>> runs_;
  std::size_t counter_ = 0;
};

inline void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline std::optional<std::size_t> parse_index(const std::string& s) {
  if (s.empty() || s.size() > 18) return std::nullopt;
  std::size_t v = 0;
  for (char ch : s) {
    if (ch < '0' || ch > '9') return std::nullopt;
    v = v * 10 + static_cast<std::size_t>(ch - '0');
  }
  return v;
}

/// Registers every endpoint on `server`. The registry must outlive it.
inline void install_routes(httplib::Server& server, RunRegistry& registry) {
  server.Post("/runs", [&](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = req.body.empty() ? json::object() : json::parse(req.body);
    } catch (const json::parse_error& e) {
      send_json(res, 400, errors_json({{"$", std::string("malformed JSON: ") + e.what()}}));
      return;
    }
    if (body.is_object() && !body.contains("schema_version")) body["schema_version"] = kConfigSchemaVersion;
    try {
      auto run = registry.create(config_from_json(body));
      json out{{"run_id", run->id()}, {"status", to_string(RunState::Running)}};
      res.set_header("Location", "/runs/" + run->id());
      send_json(res, 201, out);
    } catch (const ConfigError& e) {
      send_json(res, 400, errors_json(e.errors()));
    } catch (const std::exception& e) {
      send_json(res, 400, errors_json({{"$", e.what()}}));
    }
  });

  const auto with_run = [&registry](auto handler) {
    return [&registry, handler](const httplib::Request& req, httplib::Response& res) {
      auto run = registry.find(req.matches[1]);
      if (!run) {
        send_json(res, 404, {{"error", "unknown run"}});
        return;
      }
      handler(run, req, res);
    };
  };

  server.Get(R"(/runs/([^/]+))", with_run([](std::shared_ptr<LiveRun> run, const httplib::Request&,
                                             httplib::Response& res) { send_json(res, 200, run->summary()); }));

  server.Get(R"(/runs/([^/]+)/metrics)",
             with_run([](std::shared_ptr<LiveRun> run, const httplib::Request&, httplib::Response& res) {
               json arr = json::array();
               for (const auto& m : run->metrics()) arr.push_back(metrics_json(m));
               send_json(res, 200, {{"run_id", run->id()}, {"metrics", arr}});
             }));

  server.Get(R"(/runs/([^/]+)/export\.csv)",
             with_run([](std::shared_ptr<LiveRun> run, const httplib::Request& req, httplib::Response& res) {
               const std::string file = req.has_param("file") ? req.get_param_value("file") : "iterations";
               const auto result = run->result();
               std::string body;
               if (file == "iterations") body = csv::iterations_csv(result.records);
               else if (file == "metrics") body = csv::metrics_csv(result.metrics);
               else if (file == "segments") body = csv::segments_csv(result.segments);
               else {
                 send_json(res, 400, {{"error", "file must be iterations, metrics or segments"}});
                 return;
               }
               res.set_header("Content-Disposition", "attachment; filename=\"" + file + ".csv\"");
               res.set_content(body, "text/csv");
             }));

  server.Post(R"(/runs/([^/]+)/control)",
              with_run([](std::shared_ptr<LiveRun> run, const httplib::Request& req, httplib::Response& res) {
                json body;
                try {
                  body = json::parse(req.body);
                } catch (const json::parse_error& e) {
                  send_json(res, 400, {{"error", std::string("malformed JSON: ") + e.what()}});
                  return;
                }
                Command cmd;
                const auto cfg = run->config();
                if (auto err = parse_command(body, cfg, cmd)) {
                  send_json(res, 400, {{"error", *err}});
                  return;
                }
                const auto out = run->control(cmd);
                if (out.status >= 400) send_json(res, out.status, {{"error", out.error}});
                else
                  send_json(res, out.status,
                            {{"acknowledged_iteration", out.acknowledged_iteration},
                             {"queued", out.status == 202}});
              }));

  server.Get(R"(/runs/([^/]+)/events)",
             with_run([](std::shared_ptr<LiveRun> run, const httplib::Request& req, httplib::Response& res) {
               std::size_t from = 0;
               if (req.has_param("from")) {
                 const auto v = parse_index(req.get_param_value("from"));
                 if (!v) {
                   send_json(res, 400, {{"error", "'from' must be a nonnegative iteration"}});
                   return;
                 }
                 from = *v;
               }
               auto cursor = std::make_shared<std::size_t>(run->cursor_for(from));
               auto finished = std::make_shared<bool>(false);
               res.set_header("Cache-Control", "no-cache");
               res.set_chunked_content_provider(
                   "text/event-stream", [run, cursor, finished](std::size_t, httplib::DataSink& sink) {
                     if (*finished) {
                       sink.done();
                       return true;
                     }
                     bool ended = false;
                     const auto batch = run->poll(*cursor, std::chrono::milliseconds(500), ended);
                     std::string out;
                     for (const auto& e : batch) out += e.frame();
                     if (out.empty() && !ended) out = ": keep-alive\n\n";
                     if (ended) {
                       out += "event: end\ndata: {}\n\n";
                       *finished = true;
                     }
                     return sink.write(out.data(), out.size());
                   });
             }));
}

/// Port from the explicit value, else OLCAIS_PORT, else 8080.
inline int resolve_port(std::optional<int> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("OLCAIS_PORT")) {
    if (auto v = parse_index(env); v && *v > 0 && *v < 65536) return static_cast<int>(*v);
  }
  return 8080;
}

}  // namespace olcais::service
