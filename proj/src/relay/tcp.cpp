#include "physhare/relay/tcp.hpp"

#include <array>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>

#include "physhare/relay/wire.hpp"

namespace physhare::relay {

namespace asio = boost::asio;
using asio::ip::tcp;

namespace {

json deliver_frame(const Delivery& d) {
  return json{{"op", "deliver"},
              {"snapshot", d.snapshot},
              {"accepted_at", d.accepted_at},
              {"delivered_at", d.delivered_at},
              {"message", to_json(d.message)}};
}

}  // namespace

// ---------------------------------------------------------------- server

struct RelayServer::Impl {
  struct Connection : std::enable_shared_from_this<Connection> {
    Connection(Impl& server, tcp::socket socket) : server(server), socket(std::move(socket)) {}

    Impl& server;
    tcp::socket socket;
    std::array<char, 65536> buf{};
    FrameDecoder decoder;
    std::deque<std::string> outbox;
    std::optional<std::string> client_id;
    bool closing = false;

    void start() { read(); }

    void read() {
      auto self = shared_from_this();
      socket.async_read_some(asio::buffer(buf), [self](boost::system::error_code ec, std::size_t n) {
        if (ec) {
          self->shutdown();
          return;
        }
        try {
          self->decoder.feed(std::string_view(self->buf.data(), n));
          while (auto frame = self->decoder.next()) {
            self->handle(*frame);
            if (self->closing) return;
          }
        } catch (const CorruptInput& e) {
          self->fail(std::string("protocol error: ") + e.what());
          return;
        }
        self->read();
      });
    }

    void send(const json& body) {
      const bool idle = outbox.empty();
      outbox.push_back(encode_frame(body));
      if (idle) write();
    }

    void write() {
      auto self = shared_from_this();
      asio::async_write(socket, asio::buffer(outbox.front()), [self](boost::system::error_code ec, std::size_t) {
        if (ec) {
          self->shutdown();
          return;
        }
        self->outbox.pop_front();
        if (!self->outbox.empty()) {
          self->write();
        } else if (self->closing) {
          boost::system::error_code ignored;
          self->socket.shutdown(tcp::socket::shutdown_both, ignored);
          self->socket.close(ignored);
        }
      });
    }

    // Protocol error: report, drop the session, close once the reply is out.
    void fail(const std::string& reason) {
      send(json{{"op", "error"}, {"reason", reason}});
      end_session();
      closing = true;
    }

    void end_session() {
      if (client_id) {
        server.relay.disconnect(*client_id);
        client_id.reset();
      }
    }

    void shutdown() {
      end_session();
      boost::system::error_code ignored;
      socket.close(ignored);
    }

    void handle(const json& frame) {
      const std::string op = frame.is_object() ? frame.value("op", std::string{}) : std::string{};
      if (op == "register") {
        if (client_id) {
          fail("already registered");
          return;
        }
        ClientRegistration reg;
        try {
          reg = registration_from_json(frame.value("registration", json{}));
        } catch (const CorruptInput& e) {
          fail(std::string("malformed registration: ") + e.what());
          return;
        }
        std::weak_ptr<Connection> weak = shared_from_this();
        try {
          // The snapshot burst is written before "registered" reaches the
          // socket only if we queue the reply first.
          std::vector<json> burst;
          Registered r = server.relay.register_client(reg, [weak, &burst, this](const Delivery& d) {
            if (client_id) {
              if (auto c = weak.lock()) c->send(deliver_frame(d));
            } else {
              burst.push_back(deliver_frame(d));
            }
          });
          client_id = reg.client_id;
          send(json{{"op", "registered"}, {"client_id", reg.client_id}, {"last_seq", r.last_seq}});
          for (auto& b : burst) send(b);
        } catch (const RegistrationError& e) {
          send(json{{"op", "error"}, {"reason", e.what()}});
        }
        return;
      }
      if (op == "publish") {
        RelayMessage msg;
        try {
          msg = message_from_json(frame.value("message", json{}));
        } catch (const CorruptInput& e) {
          fail(std::string("malformed message: ") + e.what());
          return;
        }
        PublishResult r = client_id ? server.relay.publish(*client_id, msg) : PublishResult{Fault{"not-registered"}};
        if (const auto* ack = std::get_if<Ack>(&r)) {
          send(json{{"op", "ack"}, {"seq", ack->seq}});
        } else {
          const auto& f = std::get<Fault>(r);
          send(json{{"op", "fault"}, {"reason", f.reason}, {"expected_seq", f.expected_seq}});
        }
        server.relay.pump();
        return;
      }
      if (op == "bye") {
        end_session();
        closing = true;
        boost::system::error_code ignored;
        if (outbox.empty()) {
          socket.shutdown(tcp::socket::shutdown_both, ignored);
          socket.close(ignored);
        }
        return;
      }
      fail("unknown op '" + op + "'");
    }
  };

  explicit Impl(Options opts)
      : options(std::move(opts)),
        relay(clock, options.relay),
        acceptor(io, tcp::endpoint(asio::ip::make_address(options.address), options.port)),
        pump_timer(io) {
    for (const auto& [ns, s] : options.latency) relay.inject_latency(ns, s.delay, s.jitter);
  }

  void accept() {
    acceptor.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
      if (ec) return;
      socket.set_option(tcp::no_delay(true));
      std::make_shared<Connection>(*this, std::move(socket))->start();
      accept();
    });
  }

  void schedule_pump() {
    pump_timer.expires_after(std::chrono::milliseconds(1));
    pump_timer.async_wait([this](boost::system::error_code ec) {
      if (ec) return;
      relay.pump();
      schedule_pump();
    });
  }

  Options options;
  SteadyClock clock;
  asio::io_context io;
  Relay relay;
  tcp::acceptor acceptor;
  asio::steady_timer pump_timer;
  std::thread thread;
  bool started = false;
};

RelayServer::RelayServer(Options options) : impl_(std::make_unique<Impl>(std::move(options))) {}

RelayServer::~RelayServer() { stop(); }

unsigned short RelayServer::port() const { return impl_->acceptor.local_endpoint().port(); }

Relay& RelayServer::relay() { return impl_->relay; }

void RelayServer::start() {
  if (impl_->started) return;
  impl_->started = true;
  impl_->accept();
  impl_->schedule_pump();
  impl_->thread = std::thread([this] { impl_->io.run(); });
}

void RelayServer::run() {
  impl_->started = true;
  impl_->accept();
  impl_->schedule_pump();
  impl_->io.run();
}

void RelayServer::stop() {
  impl_->io.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

// ---------------------------------------------------------------- client

struct RelayClient::Impl {
  asio::io_context io;
  tcp::socket socket{io};
  std::thread reader;
  std::mutex write_mu;
  std::mutex mu;
  std::condition_variable cv;
  std::deque<json> replies;
  std::deque<Delivery> inbox;
  std::atomic<bool> open{false};
  std::string last_error;

  void read_loop() {
    FrameDecoder decoder;
    std::array<char, 65536> buf{};
    try {
      for (;;) {
        boost::system::error_code ec;
        const std::size_t n = socket.read_some(asio::buffer(buf), ec);
        if (ec) break;
        decoder.feed(std::string_view(buf.data(), n));
        while (auto frame = decoder.next()) {
          std::lock_guard lock(mu);
          if (frame->value("op", std::string{}) == "deliver") {
            Delivery d;
            d.message = message_from_json(frame->at("message"));
            d.snapshot = frame->value("snapshot", false);
            d.accepted_at = frame->value("accepted_at", Millis{0});
            d.delivered_at = frame->value("delivered_at", Millis{0});
            inbox.push_back(std::move(d));
          } else {
            replies.push_back(std::move(*frame));
          }
          cv.notify_all();
        }
      }
    } catch (const std::exception& e) {
      std::lock_guard lock(mu);
      last_error = e.what();
    }
    open = false;
    cv.notify_all();
  }

  json request(const json& body) {
    std::lock_guard wlock(write_mu);
    if (!open) throw Error("relay connection is closed");
    asio::write(socket, asio::buffer(encode_frame(body)));
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return !replies.empty() || !open; });
    if (replies.empty()) throw Error("relay connection closed: " + last_error);
    json r = std::move(replies.front());
    replies.pop_front();
    return r;
  }
};

RelayClient::RelayClient() : impl_(std::make_unique<Impl>()) {}

RelayClient::~RelayClient() { close(); }

void RelayClient::connect(const std::string& host, unsigned short port) {
  tcp::resolver resolver(impl_->io);
  asio::connect(impl_->socket, resolver.resolve(host, std::to_string(port)));
  impl_->socket.set_option(tcp::no_delay(true));
  impl_->open = true;
  impl_->reader = std::thread([this] { impl_->read_loop(); });
}

Registered RelayClient::register_client(const ClientRegistration& reg) {
  const json r = impl_->request(json{{"op", "register"}, {"registration", to_json(reg)}});
  if (r.value("op", std::string{}) != "registered") {
    throw RegistrationError(r.value("reason", std::string("registration refused")));
  }
  Registered out;
  out.last_seq = r.value("last_seq", std::map<std::string, std::uint64_t>{});
  return out;
}

PublishResult RelayClient::publish(const RelayMessage& msg) {
  if (auto err = payload_error(msg.msg_type, msg.payload); !err.empty()) {
    throw ContractViolation("invalid " + msg.msg_type + " payload: " + err);
  }
  const json r = impl_->request(json{{"op", "publish"}, {"message", to_json(msg)}});
  const std::string op = r.value("op", std::string{});
  if (op == "ack") return Ack{r.value("seq", std::uint64_t{0})};
  if (op == "fault") return Fault{r.value("reason", std::string{}), r.value("expected_seq", std::uint64_t{0})};
  throw Error("relay error: " + r.value("reason", std::string("unexpected reply")));
}

std::optional<Delivery> RelayClient::receive(std::chrono::milliseconds timeout) {
  std::unique_lock lock(impl_->mu);
  impl_->cv.wait_for(lock, timeout, [&] { return !impl_->inbox.empty() || !impl_->open; });
  if (impl_->inbox.empty()) return std::nullopt;
  Delivery d = std::move(impl_->inbox.front());
  impl_->inbox.pop_front();
  return d;
}

bool RelayClient::connected() const { return impl_->open; }

void RelayClient::close() {
  if (impl_->open) {
    try {
      std::lock_guard wlock(impl_->write_mu);
      asio::write(impl_->socket, asio::buffer(encode_frame(json{{"op", "bye"}})));
    } catch (const std::exception&) {
    }
  }
  boost::system::error_code ignored;
  impl_->socket.shutdown(tcp::socket::shutdown_both, ignored);
  if (impl_->reader.joinable()) impl_->reader.join();
  impl_->socket.close(ignored);
  impl_->open = false;
}

}  // namespace physhare::relay
