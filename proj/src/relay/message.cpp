#include "physhare/relay/message.hpp"

#include <algorithm>

#include "physhare/core/error.hpp"

namespace physhare::relay {

bool is_known_msg_type(std::string_view t) {
  return std::find(kMsgTypes.begin(), kMsgTypes.end(), t) != kMsgTypes.end();
}

std::string_view to_string(Role r) {
  switch (r) {
    case Role::emitter:
      return "emitter";
    case Role::sink:
      return "sink";
    case Role::both:
      return "both";
  }
  return "?";
}

Role role_from_string(std::string_view s) {
  if (s == "emitter") return Role::emitter;
  if (s == "sink") return Role::sink;
  if (s == "both") return Role::both;
  throw CorruptInput("unknown role '" + std::string(s) + "'");
}

json to_json(const RelayMessage& m) {
  return json{{"namespace", m.ns},   {"emitter_id", m.emitter_id}, {"msg_type", m.msg_type},
              {"seq", m.seq},        {"sent_at", m.sent_at},       {"payload", m.payload}};
}

namespace {

template <class T>
T field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw CorruptInput(std::string("missing field '") + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw CorruptInput(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

RelayMessage message_from_json(const json& j) {
  if (!j.is_object()) {
    throw CorruptInput("relay message must be an object");
  }
  RelayMessage m;
  m.ns = field<std::string>(j, "namespace");
  m.emitter_id = field<std::string>(j, "emitter_id");
  m.msg_type = field<std::string>(j, "msg_type");
  if (!j.contains("seq") || !j["seq"].is_number_unsigned()) {
    throw CorruptInput("field 'seq' must be a non-negative integer");
  }
  m.seq = j["seq"].get<std::uint64_t>();
  m.sent_at = field<Millis>(j, "sent_at");
  m.payload = j.value("payload", json::object());
  return m;
}

json to_json(const ClientRegistration& r) {
  return json{{"client_id", r.client_id}, {"namespaces", r.namespaces}, {"role", to_string(r.role)}, {"site", r.site}};
}

ClientRegistration registration_from_json(const json& j) {
  if (!j.is_object()) {
    throw CorruptInput("registration must be an object");
  }
  ClientRegistration r;
  r.client_id = field<std::string>(j, "client_id");
  r.namespaces = field<std::set<std::string>>(j, "namespaces");
  r.role = role_from_string(field<std::string>(j, "role"));
  r.site = j.value("site", std::string{});
  return r;
}

namespace {

bool is_pose(const json& p) {
  return p.is_object() && p.contains("x") && p["x"].is_number() && p.contains("y") && p["y"].is_number() &&
         p.contains("heading") && p["heading"].is_number();
}

bool has_string(const json& p, const char* key) { return p.contains(key) && p[key].is_string(); }
bool has_int(const json& p, const char* key) { return p.contains(key) && p[key].is_number_integer(); }

}  // namespace

std::string payload_error(std::string_view msg_type, const json& payload) {
  if (!payload.is_object()) return "payload must be an object";
  if (msg_type == "frame") {
    if (!has_string(payload, "subject_id")) return "frame needs string subject_id";
    if (!payload.contains("pose") || !is_pose(payload["pose"])) return "frame needs pose {x,y,heading}";
    if (!has_int(payload, "timestamp")) return "frame needs integer timestamp";
    return {};
  }
  if (msg_type == "binding") {
    if (!has_string(payload, "change")) return "binding needs string change";
    if (!payload.contains("binding") || !payload["binding"].is_object()) return "binding needs binding object";
    return {};
  }
  if (msg_type == "retarget") {
    if (!has_string(payload, "proxy_id")) return "retarget needs string proxy_id";
    if (payload.contains("diagnostic")) {
      return payload["diagnostic"].is_string() ? std::string{} : "diagnostic must be a string";
    }
    if (!payload.contains("predicted_goal") || !is_pose(payload["predicted_goal"])) {
      return "retarget needs predicted_goal pose";
    }
    if (!has_int(payload, "deadline") && !(payload.contains("deadline") && payload["deadline"].is_null())) {
      return "retarget needs integer or null deadline";
    }
    if (!has_int(payload, "revision")) return "retarget needs integer revision";
    if (!has_string(payload, "prediction_source")) return "retarget needs prediction_source";
    return {};
  }
  if (msg_type == "scenario-event") {
    if (!has_string(payload, "event")) return "scenario-event needs string event";
    return {};
  }
  if (msg_type == "ui-command") {
    static const std::array<std::string_view, 6> kinds = {"grasp",   "drag",        "release",
                                                          "gesture", "set-latency", "toggle-layer"};
    if (!has_string(payload, "kind")) return "ui-command needs string kind";
    const auto kind = payload["kind"].get<std::string>();
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) return "unknown ui-command kind '" + kind + "'";
    if (!has_int(payload, "client_timestamp")) return "ui-command needs integer client_timestamp";
    return {};
  }
  return "unknown msg_type '" + std::string(msg_type) + "'";
}

}  // namespace physhare::relay
