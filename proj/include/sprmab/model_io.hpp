#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "sprmab/model.hpp"

namespace sprmab {

// Instance documents are JSON:
//   {"types": [{"label", "n_states", "transitions": [s][a][s'], "rewards": [s][a]}],
//    "rho", "budget", "horizon", "initial": [[...], ...]}
// Loading renormalizes rows within 1e-9 of summing to one and rejects the rest.

nlohmann::json to_json(const ArmModel& model);
nlohmann::json to_json(const Instance& instance);

ArmModel arm_from_json(const nlohmann::json& doc);
Instance instance_from_json(const nlohmann::json& doc);

Instance load_instance(const std::filesystem::path& path);
void save_instance(const Instance& instance, const std::filesystem::path& path);

}  // namespace sprmab
