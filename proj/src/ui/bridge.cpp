#include "physhare/ui/bridge.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "physhare/core/canonical_json.hpp"
#include "physhare/core/world_state.hpp"
#include "physhare/scenario/harness.hpp"

namespace physhare::ui {

using nlohmann::json;

namespace {

constexpr const char* kUiClient = "ui";
constexpr std::size_t kEventBacklog = 4096;

}  // namespace

struct UiBridge::Impl {
  Impl(scenario::ScenarioScript script, Options opts) : options(std::move(opts)), run(std::move(script)) {
    run.relay().register_client({kUiClient, {run.ns()}, relay::Role::both, ""},
                                [this](const relay::Delivery& d) { push_event(d.message.msg_type, relay::to_json(d.message)); });
    routes();
  }

  void push_event(const std::string& name, const json& body) {
    std::lock_guard lock(events_mu);
    events.push_back("event: " + name + "\ndata: " + body.dump() + "\n\n");
    if (events.size() > kEventBacklog) {
      events.pop_front();
      ++first_event;
    }
    events_cv.notify_all();
  }

  json state_body() {
    std::lock_guard lock(run_mu);
    const auto& sim = run.simulation();
    return {{"sim_time", sim.state().sim_time},
            {"digest", sim.digest()},
            {"done", run.done()},
            {"state", json::parse(canonical_json(sim.state()))}};
  }

  void routes() {
    server.Get("/state", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(state_body().dump(), "application/json");
    });
    server.Get("/metrics", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(run_mu);
      if (!metrics) {
        res.status = 404;
        res.set_content(R"({"error":"run still in progress"})", "application/json");
        return;
      }
      res.set_content(metrics->dump(), "application/json");
    });
    server.Post("/publish", [this](const httplib::Request& req, httplib::Response& res) {
      json payload;
      try {
        payload = json::parse(req.body);
      } catch (const json::parse_error& e) {
        res.status = 400;
        res.set_content(json{{"error", std::string("body is not JSON: ") + e.what()}}.dump(), "application/json");
        return;
      }
      if (auto err = relay::payload_error("ui-command", payload); !err.empty()) {
        res.status = 400;
        res.set_content(json{{"error", err}}.dump(), "application/json");
        return;
      }
      std::lock_guard lock(run_mu);
      relay::RelayMessage m{run.ns(), kUiClient, "ui-command", ++ui_seq, run.now(), std::move(payload)};
      const auto r = run.relay().publish(kUiClient, m);
      if (const auto* f = std::get_if<relay::Fault>(&r)) {
        --ui_seq;
        res.status = 409;
        res.set_content(json{{"error", f->reason}}.dump(), "application/json");
        return;
      }
      res.status = 202;
      res.set_content(json{{"seq", std::get<relay::Ack>(r).seq}}.dump(), "application/json");
    });
    server.Get("/stream", [this](const httplib::Request&, httplib::Response& res) {
      std::size_t cursor = 0;
      {
        std::lock_guard lock(events_mu);
        cursor = first_event;
      }
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider("text/event-stream", [this, cursor](std::size_t, httplib::DataSink& sink) mutable {
        std::unique_lock lock(events_mu);
        events_cv.wait_for(lock, std::chrono::milliseconds(500),
                           [&] { return stopping || first_event + events.size() > cursor; });
        if (stopping) return false;
        cursor = std::max(cursor, first_event);
        std::string chunk;
        for (; cursor < first_event + events.size(); ++cursor) chunk += events[cursor - first_event];
        lock.unlock();
        if (chunk.empty()) chunk = ": keep-alive\n\n";
        return sink.write(chunk.data(), chunk.size());
      });
    });
  }

  void drive() {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    Millis last_state = -options.state_interval;
    while (!stopping) {
      {
        std::lock_guard lock(run_mu);
        if (run.done()) break;
        run.step();
      }
      const Millis now = run.now();
      if (now - last_state >= options.state_interval) {
        last_state = now;
        push_event("state", state_body());
      }
      if (options.speed > 0.0) {
        const auto due = start + std::chrono::microseconds(static_cast<std::int64_t>(now * 1000.0 / options.speed));
        std::this_thread::sleep_until(due);
      }
    }
    std::lock_guard lock(run_mu);
    metrics = scenario::to_json(run.finish().metrics);
    push_event("finished", *metrics);
  }

  Options options;
  scenario::ScenarioRun run;
  std::mutex run_mu;
  std::uint64_t ui_seq = 0;
  std::optional<json> metrics;
  httplib::Server server;
  std::mutex events_mu;
  std::condition_variable events_cv;
  std::deque<std::string> events;
  std::size_t first_event = 0;
  std::atomic<bool> stopping{false};
  int port = -1;
  std::thread listener;
  std::mutex join_mu;
};

UiBridge::UiBridge(scenario::ScenarioScript script, Options options)
    : impl_(std::make_unique<Impl>(std::move(script), std::move(options))) {}

UiBridge::~UiBridge() { stop(); }

int UiBridge::bind() {
  if (impl_->port >= 0) return impl_->port;
  if (impl_->options.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(impl_->options.address);
  } else if (impl_->server.bind_to_port(impl_->options.address, impl_->options.port)) {
    impl_->port = impl_->options.port;
  }
  if (impl_->port < 0) throw Error("cannot listen on " + impl_->options.address + ":" + std::to_string(impl_->options.port));
  return impl_->port;
}

void UiBridge::run() {
  bind();
  impl_->listener = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->drive();
  if (impl_->options.linger) {
    std::unique_lock ev(impl_->events_mu);
    impl_->events_cv.wait(ev, [this] { return impl_->stopping.load(); });
  }
  stop();
}

void UiBridge::stop() {
  if (!impl_) return;
  {
    std::lock_guard lock(impl_->events_mu);
    impl_->stopping = true;
    impl_->events_cv.notify_all();
  }
  impl_->server.stop();
  std::lock_guard join_lock(impl_->join_mu);
  if (impl_->listener.joinable() && impl_->listener.get_id() != std::this_thread::get_id()) impl_->listener.join();
}

}  // namespace physhare::ui
