#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>

#include <json.hpp>

#include "physhare/core/pose.hpp"

namespace physhare::relay {

using nlohmann::json;

inline constexpr std::array<std::string_view, 5> kMsgTypes = {"frame", "binding", "retarget", "scenario-event",
                                                              "ui-command"};

bool is_known_msg_type(std::string_view t);

enum class Role { emitter, sink, both };

std::string_view to_string(Role r);
Role role_from_string(std::string_view s);
inline bool can_emit(Role r) { return r != Role::sink; }
inline bool can_receive(Role r) { return r != Role::emitter; }

struct RelayMessage {
  std::string ns;
  std::string emitter_id;
  std::string msg_type;
  std::uint64_t seq = 0;
  Millis sent_at = 0;
  json payload = json::object();

  bool operator==(const RelayMessage&) const = default;
};

struct ClientRegistration {
  std::string client_id;
  std::set<std::string> namespaces;
  Role role = Role::both;
  std::string site;
};

json to_json(const RelayMessage& m);
/// Throws CorruptInput on missing or mistyped fields.
RelayMessage message_from_json(const json& j);

json to_json(const ClientRegistration& r);
ClientRegistration registration_from_json(const json& j);

/// Checks `payload` against the schema of `msg_type`. Returns an empty string
/// when valid, otherwise a description of the first problem. The relay itself
/// routes on msg_type only; clients validate before sending.
std::string payload_error(std::string_view msg_type, const json& payload);

}  // namespace physhare::relay
