#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "physhare/relay/relay.hpp"

namespace physhare::relay {

/// Relay served over TCP with the length-prefixed frame protocol described in
/// docs/protocol.md. One I/O thread owns every connection.
class RelayServer {
 public:
  struct Options {
    std::string address = "127.0.0.1";
    unsigned short port = 7700;  // 0 picks a free port
    Relay::Options relay;
    std::map<std::string, LatencySetting> latency;
  };

  explicit RelayServer(Options options);
  ~RelayServer();
  RelayServer(const RelayServer&) = delete;
  RelayServer& operator=(const RelayServer&) = delete;

  unsigned short port() const;
  /// Serves on a background thread.
  void start();
  /// Serves on the calling thread until stop().
  void run();
  void stop();
  Relay& relay();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Blocking client. A background thread reads the socket; deliveries queue up
/// until receive() takes them.
class RelayClient {
 public:
  RelayClient();
  ~RelayClient();
  RelayClient(const RelayClient&) = delete;
  RelayClient& operator=(const RelayClient&) = delete;

  void connect(const std::string& host, unsigned short port);
  /// Throws RegistrationError when the relay refuses.
  Registered register_client(const ClientRegistration& reg);
  /// Throws ContractViolation when the payload fails its msg_type schema.
  PublishResult publish(const RelayMessage& msg);
  std::optional<Delivery> receive(std::chrono::milliseconds timeout);
  bool connected() const;
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace physhare::relay
