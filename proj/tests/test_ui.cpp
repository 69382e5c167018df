#include <gtest/gtest.h>

#include <thread>

#include "httplib.h"
#include "physhare/scenario/generators.hpp"
#include "physhare/ui/bridge.hpp"

using namespace physhare;
using nlohmann::json;

namespace {

scenario::ScenarioScript wall_push() {
  return scenario::build_script("wall-push", scenario::default_parameters("wall-push"));
}

struct Served {
  explicit Served(ui::UiBridge::Options opts) : bridge(wall_push(), opts) {
    port = bridge.bind();
    thread = std::thread([this] { bridge.run(); });
  }
  ~Served() {
    bridge.stop();
    thread.join();
  }
  ui::UiBridge bridge;
  int port = 0;
  std::thread thread;
};

ui::UiBridge::Options options(double speed) {
  ui::UiBridge::Options o;
  o.port = 0;
  o.speed = speed;
  return o;
}

httplib::Result get_when_ready(httplib::Client& c, const std::string& path) {
  for (int i = 0; i < 200; ++i) {
    if (auto r = c.Get(path)) return r;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return c.Get(path);
}

}  // namespace

TEST(UiBridge, UnpacedRunPublishesMetricsAndKeepsServing) {
  Served s(options(0.0));
  httplib::Client c("127.0.0.1", s.port);
  httplib::Result m;
  for (int i = 0; i < 500; ++i) {
    m = get_when_ready(c, "/metrics");
    if (m && m->status == 200) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  ASSERT_TRUE(m);
  ASSERT_EQ(m->status, 200);
  const auto metrics = json::parse(m->body);
  EXPECT_EQ(metrics.at("scenario"), "wall-push");
  EXPECT_EQ(metrics.at("touches").at("total"), 5);

  const auto st = c.Get("/state");
  ASSERT_TRUE(st);
  const auto state = json::parse(st->body);
  EXPECT_TRUE(state.at("done").get<bool>());
  EXPECT_EQ(state.at("digest"), metrics.at("digest"));
}

TEST(UiBridge, PublishValidatesUiCommands) {
  Served s(options(1.0));
  httplib::Client c("127.0.0.1", s.port);
  ASSERT_TRUE(get_when_ready(c, "/state"));
  const json drag = {{"kind", "toggle-layer"}, {"client_timestamp", 5}, {"layer", "proxies"}};
  const auto ok = c.Post("/publish", drag.dump(), "application/json");
  ASSERT_TRUE(ok);
  EXPECT_EQ(ok->status, 202);
  EXPECT_EQ(json::parse(ok->body).at("seq"), 1);
  const auto bad = c.Post("/publish", R"({"kind":"wave","client_timestamp":1})", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  const auto garbage = c.Post("/publish", "{nope", "application/json");
  ASSERT_TRUE(garbage);
  EXPECT_EQ(garbage->status, 400);
  const auto early = c.Get("/metrics");
  ASSERT_TRUE(early);
  EXPECT_EQ(early->status, 404);
}

TEST(UiBridge, StreamCarriesStateEvents) {
  Served s(options(1.0));
  httplib::Client c("127.0.0.1", s.port);
  ASSERT_TRUE(get_when_ready(c, "/state"));
  std::string received;
  c.Get("/stream", [&](const char* data, std::size_t n) {
    received.append(data, n);
    return received.find("event: state") == std::string::npos;
  });
  const auto at = received.find("event: state\ndata: ");
  ASSERT_NE(at, std::string::npos);
  const auto line_end = received.find('\n', at + 19);
  const auto body = json::parse(received.substr(at + 19, line_end - at - 19));
  EXPECT_TRUE(body.contains("sim_time"));
  EXPECT_TRUE(body.at("state").contains("proxies"));
}
