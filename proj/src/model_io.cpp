#include "sprmab/model_io.hpp"

#include <fstream>

#include "sprmab/error.hpp"

namespace sprmab {

using nlohmann::json;

json to_json(const ArmModel& model) {
    if (model.is_expanded())
        throw Error(ErrorCode::InvalidArgument, "only unexpanded models are serialized");
    const int n = model.n_states();
    json transitions = json::array();
    json rewards = json::array();
    for (int s = 0; s < n; ++s) {
        json per_action = json::array();
        for (int a = 0; a < kActions; ++a) {
            auto row = model.row(s, a);
            per_action.push_back(json(std::vector<double>(row.begin(), row.end())));
        }
        transitions.push_back(std::move(per_action));
        rewards.push_back({model.r(s, 0), model.r(s, 1)});
    }
    return {{"label", model.label()},
            {"n_states", n},
            {"transitions", std::move(transitions)},
            {"rewards", std::move(rewards)}};
}

json to_json(const Instance& instance) {
    json types = json::array();
    for (const auto& model : instance.types) types.push_back(to_json(model));
    return {{"types", std::move(types)},
            {"rho", instance.rho},
            {"budget", instance.budget},
            {"horizon", instance.horizon},
            {"initial", instance.initial}};
}

ArmModel arm_from_json(const json& doc) {
    try {
        const int n = doc.at("n_states").get<int>();
        const auto& transitions = doc.at("transitions");
        const auto& rewards = doc.at("rewards");
        if (n <= 0 || transitions.size() != static_cast<size_t>(n) ||
            rewards.size() != static_cast<size_t>(n))
            throw Error(ErrorCode::InvalidArgument, "transitions/rewards must have n_states rows");
        std::vector<double> flat_p;
        std::vector<double> flat_r;
        flat_p.reserve(static_cast<size_t>(n) * kActions * n);
        for (int s = 0; s < n; ++s) {
            if (transitions[s].size() != kActions || rewards[s].size() != kActions)
                throw Error(ErrorCode::InvalidArgument, "each state needs exactly two actions");
            for (int a = 0; a < kActions; ++a) {
                auto row = transitions[s][a].get<std::vector<double>>();
                if (row.size() != static_cast<size_t>(n))
                    throw Error(ErrorCode::InvalidArgument, "transition row has wrong length");
                flat_p.insert(flat_p.end(), row.begin(), row.end());
                flat_r.push_back(rewards[s][a].get<double>());
            }
        }
        ArmModel raw(n, std::move(flat_p), std::move(flat_r), doc.value("label", std::string{}));
        return normalize_rows(raw);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("malformed arm model: ") + e.what());
    }
}

Instance instance_from_json(const json& doc) {
    Instance instance;
    try {
        for (const auto& type : doc.at("types")) instance.types.push_back(arm_from_json(type));
        instance.rho = doc.at("rho").get<int>();
        instance.budget = doc.at("budget").get<int>();
        instance.horizon = doc.at("horizon").get<int>();
        for (const auto& dist : doc.at("initial")) {
            auto raw = dist.get<std::vector<double>>();
            instance.initial.push_back(normalize_distribution(raw));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("malformed instance: ") + e.what());
    }
    require_valid(validate_instance(instance), "instance");
    return instance;
}

Instance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
    }
    return instance_from_json(doc);
}

void save_instance(const Instance& instance, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
    out << to_json(instance).dump(2) << '\n';
}

}  // namespace sprmab
