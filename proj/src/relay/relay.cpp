#include "physhare/relay/relay.hpp"

#include <algorithm>
#include <fstream>

namespace physhare::relay {

Relay::Relay(const Clock& clock) : Relay(clock, Options{}) {}

Relay::Relay(const Clock& clock, Options options) : clock_(clock), options_(options), rng_(options.seed) {}

Registered Relay::register_client(const ClientRegistration& reg, Sink sink) {
  if (reg.client_id.empty()) {
    throw RegistrationError("client_id must not be empty");
  }
  if (reg.namespaces.empty()) {
    throw RegistrationError("registration for '" + reg.client_id + "' names no namespaces");
  }
  if (std::any_of(reg.namespaces.begin(), reg.namespaces.end(), [](const auto& ns) { return ns.empty(); })) {
    throw RegistrationError("namespace names must not be empty");
  }
  std::lock_guard pump_lock(pump_mu_);
  Registered out;
  std::vector<Delivery> burst;
  {
    std::lock_guard lock(mu_);
    if (sessions_.count(reg.client_id) != 0) {
      throw RegistrationError("client_id '" + reg.client_id + "' is already connected");
    }
    sessions_[reg.client_id] = Session{reg, sink, next_epoch_++};
    for (const auto& ns : reg.namespaces) {
      auto it = last_seq_.find({ns, reg.client_id});
      out.last_seq[ns] = it == last_seq_.end() ? 0 : it->second;
    }
    if (can_receive(reg.role)) {
      for (const auto& [key, entry] : retained_) {
        const auto& [ns, emitter, type] = key;
        if (reg.namespaces.count(ns) == 0) continue;
        if (!options_.echo_to_originator && emitter == reg.client_id) continue;
        burst.push_back(Delivery{entry.first, true, entry.second, clock_.now()});
      }
      std::stable_sort(burst.begin(), burst.end(), [](const Delivery& a, const Delivery& b) {
        return std::tie(a.message.ns, a.message.emitter_id, a.message.seq) <
               std::tie(b.message.ns, b.message.emitter_id, b.message.seq);
      });
    }
  }
  if (sink) {
    for (const auto& d : burst) sink(d);
  }
  return out;
}

PublishResult Relay::publish(const std::string& client_id, const RelayMessage& msg) {
  std::lock_guard lock(mu_);
  auto sit = sessions_.find(client_id);
  if (sit == sessions_.end()) return Fault{"not-registered"};
  const auto& reg = sit->second.reg;
  if (!can_emit(reg.role)) return Fault{"not-emitter"};
  if (reg.namespaces.count(msg.ns) == 0) return Fault{"unknown-namespace"};
  if (msg.emitter_id != client_id) return Fault{"emitter-mismatch"};
  if (!is_known_msg_type(msg.msg_type)) return Fault{"unknown-msg-type"};
  auto& last = last_seq_[{msg.ns, client_id}];
  if (msg.seq != last + 1) return Fault{"seq-gap", last + 1};
  last = msg.seq;

  const Millis now = clock_.now();
  if (options_.retention) {
    retained_[{msg.ns, msg.emitter_id, msg.msg_type}] = {msg, now};
  }
  const LatencySetting lat = latency_.count(msg.ns) ? latency_.at(msg.ns) : LatencySetting{};
  for (const auto& [id, session] : sessions_) {
    if (!can_receive(session.reg.role) || session.reg.namespaces.count(msg.ns) == 0) continue;
    if (!options_.echo_to_originator && id == client_id) continue;
    Millis offset = lat.delay;
    if (lat.jitter > 0) {
      offset += static_cast<Millis>(rng_() % static_cast<std::uint64_t>(2 * lat.jitter + 1)) - lat.jitter;
    }
    Millis due = now + std::max<Millis>(offset, 0);
    auto& floor = last_due_[{id, session.epoch, client_id}];
    due = std::max(due, floor);
    floor = due;
    pending_.emplace(std::pair{due, counter_++}, Pending{id, session.epoch, Delivery{msg, false, now, due}});
  }
  return Ack{msg.seq};
}

void Relay::disconnect(const std::string& client_id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(client_id);
  if (it == sessions_.end()) return;
  const auto epoch = it->second.epoch;
  sessions_.erase(it);
  for (auto p = pending_.begin(); p != pending_.end();) {
    if (p->second.client_id == client_id && p->second.epoch == epoch) {
      p = pending_.erase(p);
    } else {
      ++p;
    }
  }
  for (auto d = last_due_.begin(); d != last_due_.end();) {
    if (std::get<0>(d->first) == client_id && std::get<1>(d->first) == epoch) {
      d = last_due_.erase(d);
    } else {
      ++d;
    }
  }
}

void Relay::inject_latency(const std::string& ns, Millis delay, Millis jitter) {
  if (delay < 0 || jitter < 0) {
    throw ContractViolation("latency delay and jitter must be non-negative");
  }
  std::lock_guard lock(mu_);
  latency_[ns] = LatencySetting{delay, jitter};
}

LatencySetting Relay::latency(const std::string& ns) const {
  std::lock_guard lock(mu_);
  auto it = latency_.find(ns);
  return it == latency_.end() ? LatencySetting{} : it->second;
}

std::size_t Relay::pump() {
  std::lock_guard pump_lock(pump_mu_);
  std::vector<std::pair<Sink, Delivery>> due;
  {
    std::lock_guard lock(mu_);
    const Millis now = clock_.now();
    while (!pending_.empty() && pending_.begin()->first.first <= now) {
      auto node = pending_.extract(pending_.begin());
      Pending& p = node.mapped();
      auto sit = sessions_.find(p.client_id);
      if (sit == sessions_.end() || sit->second.epoch != p.epoch) continue;
      p.delivery.delivered_at = now;
      latencies_.push_back(now - p.delivery.accepted_at);
      due.emplace_back(sit->second.sink, std::move(p.delivery));
    }
  }
  for (const auto& [sink, d] : due) {
    if (sink) sink(d);
  }
  return due.size();
}

std::optional<Millis> Relay::next_due() const {
  std::lock_guard lock(mu_);
  if (pending_.empty()) return std::nullopt;
  return pending_.begin()->first.first;
}

std::size_t Relay::pending() const {
  std::lock_guard lock(mu_);
  return pending_.size();
}

bool Relay::connected(const std::string& client_id) const {
  std::lock_guard lock(mu_);
  return sessions_.count(client_id) != 0;
}

std::vector<Millis> Relay::delivery_latencies() const {
  std::lock_guard lock(mu_);
  return latencies_;
}

std::map<std::string, LatencySetting> load_latency_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open latency table '" + path + "'");
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw CorruptInput("latency table '" + path + "': " + e.what());
  }
  if (!j.is_object()) {
    throw CorruptInput("latency table must be an object keyed by namespace");
  }
  std::map<std::string, LatencySetting> out;
  for (const auto& [ns, v] : j.items()) {
    LatencySetting s{v.value("delay", Millis{0}), v.value("jitter", Millis{0})};
    if (s.delay < 0 || s.jitter < 0) {
      throw CorruptInput("latency table entry '" + ns + "' is negative");
    }
    out[ns] = s;
  }
  return out;
}

}  // namespace physhare::relay
