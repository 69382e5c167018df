#pragma once

#include <memory>
#include <string>

#include "physhare/scenario/script.hpp"

namespace physhare::ui {

/// HTTP front for a live scenario run, consumed by the browser sandbox.
///
///   GET  /state    current world state, sim time and digest
///   GET  /stream   server-sent events, one per relay message in the run's
///                  namespace plus a "state" event every state_interval ms
///   POST /publish  body is a ui-command payload; 202 when accepted
///   GET  /metrics  run metrics once the script has finished, 404 before
class UiBridge {
 public:
  struct Options {
    std::string address = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    /// Simulated milliseconds per wall millisecond; 0 runs unpaced.
    double speed = 1.0;
    Millis state_interval = 100;
    /// Keep serving after the script ends until stop().
    bool linger = true;
  };

  UiBridge(scenario::ScenarioScript script, Options options);
  ~UiBridge();
  UiBridge(const UiBridge&) = delete;
  UiBridge& operator=(const UiBridge&) = delete;

  /// Binds the listener; returns the bound port.
  int bind();
  /// Drives the run on the calling thread and serves until the script ends
  /// (and, when lingering, until stop()).
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace physhare::ui
