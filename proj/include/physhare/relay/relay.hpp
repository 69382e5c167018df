#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "physhare/core/error.hpp"
#include "physhare/relay/message.hpp"

namespace physhare::relay {

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Millis now() const = 0;
};

/// Manually advanced clock for simulations and tests.
class SimClock final : public Clock {
 public:
  Millis now() const override { return now_; }
  void set(Millis t) { now_ = t; }
  void advance(Millis dt) { now_ += dt; }

 private:
  Millis now_ = 0;
};

/// Milliseconds since construction.
class SteadyClock final : public Clock {
 public:
  SteadyClock() : start_(std::chrono::steady_clock::now()) {}
  Millis now() const override {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

class RegistrationError : public Error {
 public:
  using Error::Error;
};

struct Ack {
  std::uint64_t seq = 0;
};

struct Fault {
  std::string reason;
  /// Sequence number the relay expects next; meaningful for "seq-gap".
  std::uint64_t expected_seq = 0;
};

using PublishResult = std::variant<Ack, Fault>;

struct Registered {
  /// Last accepted seq per namespace for this client id, so a reconnecting
  /// emitter can continue its numbering.
  std::map<std::string, std::uint64_t> last_seq;
};

struct Delivery {
  RelayMessage message;
  bool snapshot = false;
  Millis accepted_at = 0;
  Millis delivered_at = 0;
};

using Sink = std::function<void(const Delivery&)>;

struct LatencySetting {
  Millis delay = 0;
  Millis jitter = 0;
};

/// Transport-agnostic relay core. Sinks are invoked from register_client()
/// (snapshot burst) and pump() (live messages), never while the state lock is
/// held, so a sink may publish but must not register or pump.
class Relay {
 public:
  struct Options {
    bool retention = true;
    bool echo_to_originator = false;
    std::uint64_t seed = 0x5eed;
  };

  explicit Relay(const Clock& clock);
  Relay(const Clock& clock, Options options);

  /// Throws RegistrationError for duplicate live ids or an empty namespace set.
  Registered register_client(const ClientRegistration& reg, Sink sink);
  PublishResult publish(const std::string& client_id, const RelayMessage& msg);
  /// Ends the session; its undelivered messages are dropped.
  void disconnect(const std::string& client_id);
  void inject_latency(const std::string& ns, Millis delay, Millis jitter);
  LatencySetting latency(const std::string& ns) const;

  /// Delivers everything due at the clock's current time. Returns the count.
  std::size_t pump();
  std::optional<Millis> next_due() const;
  std::size_t pending() const;
  bool connected(const std::string& client_id) const;
  /// accepted_at -> delivered_at for every live delivery so far.
  std::vector<Millis> delivery_latencies() const;

 private:
  struct Session {
    ClientRegistration reg;
    Sink sink;
    std::uint64_t epoch = 0;
  };
  struct Pending {
    std::string client_id;
    std::uint64_t epoch = 0;
    Delivery delivery;
  };
  using RetainKey = std::tuple<std::string, std::string, std::string>;  // ns, emitter, msg_type

  const Clock& clock_;
  Options options_;
  mutable std::mutex mu_;
  std::mutex pump_mu_;
  std::map<std::string, Session> sessions_;
  std::uint64_t next_epoch_ = 1;
  std::map<std::pair<std::string, std::string>, std::uint64_t> last_seq_;
  std::map<RetainKey, std::pair<RelayMessage, Millis>> retained_;
  std::map<std::string, LatencySetting> latency_;
  // Keyed by (due time, arrival counter) so equal due times keep publish order.
  std::map<std::pair<Millis, std::uint64_t>, Pending> pending_;
  std::uint64_t counter_ = 0;
  std::map<std::tuple<std::string, std::uint64_t, std::string>, Millis> last_due_;
  std::vector<Millis> latencies_;
  std::mt19937_64 rng_;
};

/// Reads a latency table {"<namespace>": {"delay": ms, "jitter": ms}, ...}.
std::map<std::string, LatencySetting> load_latency_table(const std::string& path);

}  // namespace physhare::relay
