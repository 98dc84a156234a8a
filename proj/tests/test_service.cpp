#include <gtest/gtest.h>

#include <chrono>
#include <thread>

#include "olcais/csv.hpp"
#include "olcais/experiment.hpp"
#include "olcais/service.hpp"

using namespace olcais;
using nlohmann::json;

namespace {

class Service : public ::testing::Test {
 protected:
  void SetUp() override {
    service::install_routes(server_, registry_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  httplib::Client client() { return httplib::Client("127.0.0.1", port_); }

  std::string create(const json& cfg) {
    auto res = client().Post("/runs", cfg.dump(), "application/json");
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 201) << res->body;
    return json::parse(res->body)["run_id"].get<std::string>();
  }

  void wait_finished(const std::string& id) {
    for (int k = 0; k < 2000; ++k) {
      auto res = client().Get("/runs/" + id);
      if (res && json::parse(res->body)["status"] == "finished") return;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    FAIL() << "run did not finish";
  }

  service::RunRegistry registry_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_F(Service, InvalidConfigListsFields) {
  auto res = client().Post("/runs", R"({"m": 0, "policy": "nope"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  const auto body = json::parse(res->body);
  bool saw_m = false;
  for (const auto& e : body["errors"]) saw_m |= e["field"] == "m" || e["field"] == "policy";
  EXPECT_TRUE(saw_m) << res->body;
  EXPECT_EQ(client().Post("/runs", "{bad", "application/json")->status, 400);
}

TEST_F(Service, UnknownRunIs404) {
  EXPECT_EQ(client().Get("/runs/run-999999")->status, 404);
  EXPECT_EQ(client().Post("/runs/run-999999/control", R"({"command":"pause"})", "application/json")->status, 404);
}

TEST_F(Service, ExportMatchesBatchRun) {
  const auto id = create({{"seed", 42}, {"pace_hz", 0}});
  wait_finished(id);
  const auto res = client().Get("/runs/" + id + "/export.csv?file=iterations");
  ASSERT_TRUE(res);
  ExperimentConfig cfg;
  cfg.seed = 42;
  EXPECT_EQ(res->body, csv::iterations_csv(run_experiment(cfg).records));
  EXPECT_EQ(client().Get("/runs/" + id + "/export.csv?file=other")->status, 400);
  const auto metrics = json::parse(client().Get("/runs/" + id + "/metrics")->body);
  EXPECT_FALSE(metrics["metrics"].empty());
}

TEST_F(Service, ControlAfterFinishIs409) {
  const auto id = create({{"pace_hz", 0}});
  wait_finished(id);
  const auto res = client().Post("/runs/" + id + "/control", R"({"command":"fix_disruption"})", "application/json");
  EXPECT_EQ(res->status, 409);
  EXPECT_EQ(client().Post("/runs/" + id + "/control", R"({"command":"dance"})", "application/json")->status, 400);
}

TEST_F(Service, PauseResumeAndQueuedCommands) {
  const auto id = create({{"pace_hz", 200}, {"auto_schedule", false}, {"budget_per_cycle", 400}});
  auto c = client();
  auto res = c.Post("/runs/" + id + "/control", R"({"command":"pause"})", "application/json");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(c.Post("/runs/" + id + "/control", R"({"command":"pause"})", "application/json")->status, 409);
  const auto paused_at = json::parse(c.Get("/runs/" + id)->body)["next_iteration"].get<std::size_t>();
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  EXPECT_EQ(json::parse(c.Get("/runs/" + id)->body)["next_iteration"].get<std::size_t>(), paused_at);

  const json inject{{"command", "inject_disruption"}, {"at", paused_at + 5}};
  res = c.Post("/runs/" + id + "/control", inject.dump(), "application/json");
  ASSERT_EQ(res->status, 202);
  EXPECT_EQ(json::parse(res->body)["acknowledged_iteration"], paused_at + 5);
  const json past{{"command", "fix_disruption"}, {"at", 0}};
  EXPECT_EQ(c.Post("/runs/" + id + "/control", past.dump(), "application/json")->status, 409);

  ASSERT_EQ(c.Post("/runs/" + id + "/control", R"({"command":"resume"})", "application/json")->status, 200);
  for (int k = 0; k < 400; ++k) {
    if (json::parse(c.Get("/runs/" + id)->body)["disrupted"] == true) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  const auto csv_text = c.Get("/runs/" + id + "/export.csv")->body;
  const auto records = csv::parse_iterations(csv_text);
  ASSERT_GT(records.size(), paused_at + 5);
  EXPECT_EQ(records[paused_at + 4].mode, FeedMode::Normal);
  EXPECT_EQ(records[paused_at + 5].mode, FeedMode::Disrupted);
}

TEST_F(Service, EventStreamReplaysFromIteration) {
  const auto id = create({{"pace_hz", 0}});
  wait_finished(id);
  std::string body;
  auto res = client().Get("/runs/" + id + "/events?from=100", [&](const char* data, std::size_t n) {
    body.append(data, n);
    return true;
  });
  ASSERT_TRUE(res);
  EXPECT_EQ(res->get_header_value("Content-Type"), "text/event-stream");
  EXPECT_EQ(body.find("\"iteration\":99,"), std::string::npos);
  EXPECT_NE(body.find("event: iteration\n"), std::string::npos);
  EXPECT_NE(body.find("\"iteration\":100"), std::string::npos);
  EXPECT_NE(body.find("event: end\n"), std::string::npos);
  EXPECT_EQ(client().Get("/runs/" + id + "/events?from=x")->status, 400);
}

TEST(ServicePort, FlagThenEnvThenDefault) {
  EXPECT_EQ(service::resolve_port(9000), 9000);
  ::unsetenv("OLCAIS_PORT");
  EXPECT_EQ(service::resolve_port(std::nullopt), 8080);
  ::setenv("OLCAIS_PORT", "9123", 1);
  EXPECT_EQ(service::resolve_port(std::nullopt), 9123);
  ::unsetenv("OLCAIS_PORT");
}
