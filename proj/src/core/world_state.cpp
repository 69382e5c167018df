#include "physhare/core/world_state.hpp"

#include "physhare/core/canonical_json.hpp"
#include "physhare/core/json_codec.hpp"

namespace physhare {

nlohmann::json to_json(const WorldState& state) {
  nlohmann::json objects = nlohmann::json::object();
  for (const auto& [id, o] : state.objects) objects[id] = o;
  nlohmann::json proxies = nlohmann::json::object();
  for (const auto& [id, p] : state.proxies) proxies[id] = p;
  nlohmann::json bindings = nlohmann::json::object();
  for (const auto& [id, b] : state.bindings) bindings[id] = b;
  nlohmann::json views = nlohmann::json::object();
  for (const auto& [site, poses] : state.views) {
    nlohmann::json v = nlohmann::json::object();
    for (const auto& [id, pose] : poses) v[id] = pose;
    views[site] = std::move(v);
  }
  nlohmann::json plans = nlohmann::json::object();
  for (const auto& [id, waypoints] : state.plans) plans[id] = waypoints;
  nlohmann::json tasks = nlohmann::json::object();
  for (const auto& [id, t] : state.tasks) {
    tasks[id] = {{"goal", t.goal}, {"deadline", t.deadline ? nlohmann::json(*t.deadline) : nlohmann::json(nullptr)}, {"revision", t.revision}, {"source", t.source}};
  }
  return {{"tick", state.tick},         {"sim_time", state.sim_time}, {"objects", std::move(objects)},
          {"proxies", std::move(proxies)}, {"bindings", std::move(bindings)}, {"views", std::move(views)},
          {"plans", std::move(plans)},   {"tasks", std::move(tasks)}};
}

std::string canonical_json(const WorldState& state) { return canonical_dump(to_json(state)); }

std::string state_digest(const WorldState& state) { return sha256_hex(canonical_json(state)); }

}  // namespace physhare
