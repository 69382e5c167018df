#pragma once

#include "json.hpp"
#include "physhare/core/types.hpp"

// nlohmann::json adapters for the shared domain types.
namespace physhare {

void to_json(nlohmann::json& j, const Vec2& v);
void from_json(const nlohmann::json& j, Vec2& v);
void to_json(nlohmann::json& j, const Pose2D& p);
void from_json(const nlohmann::json& j, Pose2D& p);
void to_json(nlohmann::json& j, const TrackedFrame& f);
void from_json(const nlohmann::json& j, TrackedFrame& f);
void to_json(nlohmann::json& j, const Anchor& a);
void to_json(nlohmann::json& j, const Workspace& w);
Workspace workspace_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const VirtualObject& o);
void from_json(const nlohmann::json& j, VirtualObject& o);
void to_json(nlohmann::json& j, const KinematicProfile& p);
void from_json(const nlohmann::json& j, KinematicProfile& p);
void to_json(nlohmann::json& j, const RobotProxy& r);
void from_json(const nlohmann::json& j, RobotProxy& r);
void to_json(nlohmann::json& j, const ProxyRef& r);
void from_json(const nlohmann::json& j, ProxyRef& r);
void to_json(nlohmann::json& j, const Authority& a);
void to_json(nlohmann::json& j, const MappingBinding& b);

}  // namespace physhare
