#include "sprmab/policy.hpp"

#include <algorithm>
#include <bit>
#include <chrono>

#include "sprmab/error.hpp"
#include "sprmab/rng.hpp"

namespace sprmab {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

class MeanFieldPolicy final : public Policy {
public:
    explicit MeanFieldPolicy(const Instance& instance) : budget_(instance.population_budget()) {
        const auto start = Clock::now();
        solution_ = solve_occupancy(instance, LpVariant::MeanField);
        if (solution_.status != LpStatus::Optimal)
            throw Error(ErrorCode::SolverStall, std::string("mean-field LP ended ") + to_string(solution_.status));
        precompute_ms_ = elapsed_ms(start);
    }
    std::string name() const override { return "meanfield"; }
    Actions select(const Population& population, int t, std::uint64_t) const override {
        const auto arms = original_view(population);
        const auto pulled = pulled_mask(population);
        return mean_field_select(solution_, arms, t, budget_, pulled);
    }

private:
    int budget_;
    OccupancySolution solution_;
};

enum class IndexKind { WhittleOriginal, WhittleInfinite, WhittleFinite, QDifference };

// Greedy top-budget policies driven by a per-type index table.
class GreedyIndexPolicy final : public Policy {
public:
    GreedyIndexPolicy(const Instance& instance, IndexKind kind, const WhittleOptions& options)
        : instance_(instance), kind_(kind) {
        const auto start = Clock::now();
        std::vector<IndexTable> parts;
        for (const auto& original : instance.types) {
            if (kind == IndexKind::WhittleOriginal) {
                parts.push_back(whittle_index_infinite(original, instance.horizon, options));
                continue;
            }
            const ArmModel model = expand_with_dummies(original);
            switch (kind) {
            case IndexKind::WhittleInfinite: parts.push_back(whittle_index_infinite(model, instance.horizon, options)); break;
            case IndexKind::WhittleFinite: parts.push_back(whittle_index_finite(model, instance.horizon, options)); break;
            default: parts.push_back(q_difference_indices(model, instance.horizon)); break;
            }
        }
        indices_ = IndexTable::stack(parts);
        precompute_ms_ = elapsed_ms(start);
    }
    std::string name() const override {
        switch (kind_) {
        case IndexKind::WhittleOriginal: return "whittle-original";
        case IndexKind::WhittleInfinite: return "whittle-infinite";
        case IndexKind::WhittleFinite: return "whittle-finite";
        case IndexKind::QDifference: return "qdiff";
        }
        return "unknown";
    }
    Actions select(const Population& population, int t, std::uint64_t) const override {
        const auto pulled = pulled_mask(population);
        const auto arms =
            kind_ == IndexKind::WhittleOriginal ? original_view(population) : expanded_view(instance_, population);
        return greedy_budget_select(indices_, arms, t, instance_.population_budget(), pulled);
    }
    const IndexTable& indices() const { return indices_; }

private:
    Instance instance_;
    IndexKind kind_;
    IndexTable indices_;
};

class RandomPolicy final : public Policy {
public:
    explicit RandomPolicy(const Instance& instance) : budget_(instance.population_budget()) {}
    std::string name() const override { return "random"; }
    Actions select(const Population& population, int t, std::uint64_t stream) const override {
        const auto arms = original_view(population);
        const auto pulled = pulled_mask(population);
        return random_select(arms, budget_, pulled, stream_key(stream, kTagPolicy, static_cast<std::uint64_t>(t)));
    }
    std::vector<std::pair<Actions, double>> action_distribution(const Population& population, int) const override {
        std::vector<int> eligible;
        for (int i = 0; i < static_cast<int>(population.size()); ++i)
            if (!population[i].pulled) eligible.push_back(i);
        const int e = static_cast<int>(eligible.size());
        const int take = std::min(std::max(budget_, 0), e);
        if (e > 20) throw Error(ErrorCode::CapExceeded, "random action enumeration limited to 20 eligible arms");
        std::vector<std::pair<Actions, double>> out;
        for (std::uint32_t mask = 0; mask < (1u << e); ++mask) {
            if (std::popcount(mask) != take) continue;
            Actions a(population.size(), 0);
            for (int k = 0; k < e; ++k)
                if (mask & (1u << k)) a[eligible[k]] = 1;
            out.push_back({std::move(a), 0.0});
        }
        for (auto& entry : out) entry.second = 1.0 / static_cast<double>(out.size());
        return out;
    }

private:
    int budget_;
};

}  // namespace

const std::vector<std::string>& policy_names() {
    static const std::vector<std::string> names{"spi",           "meanfield", "whittle-original", "whittle-infinite",
                                                "whittle-finite", "qdiff",     "random"};
    return names;
}

bool is_policy_name(const std::string& name) {
    const auto& names = policy_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<ArmState> expanded_view(const Instance& instance, const Population& population) {
    std::vector<ArmState> out;
    out.reserve(population.size());
    for (const auto& arm : population) {
        const int offset = arm.pulled ? instance.types[arm.type].n_states() : 0;
        out.push_back({arm.type, arm.state + offset, arm.pulled});
    }
    return out;
}

std::vector<ArmState> original_view(const Population& population) {
    std::vector<ArmState> out;
    out.reserve(population.size());
    for (const auto& arm : population) out.push_back({arm.type, arm.state, false});
    return out;
}

std::vector<char> pulled_mask(const Population& population) {
    std::vector<char> out;
    out.reserve(population.size());
    for (const auto& arm : population) out.push_back(arm.pulled ? 1 : 0);
    return out;
}

SpiPolicy::SpiPolicy(const Instance& instance, const SpiSelectOptions& options)
    : instance_(instance), options_(options) {
    const auto start = Clock::now();
    solution_ = solve_occupancy(instance, LpVariant::Dummy);
    if (solution_.status != LpStatus::Optimal)
        throw Error(ErrorCode::SolverStall, std::string("dummy LP ended ") + to_string(solution_.status));
    indices_ = spi_indices(compute_chi(solution_), solution_.layout.models());
    precompute_ms_ = elapsed_ms(start);
}

Actions SpiPolicy::select(const Population& population, int t, std::uint64_t) const {
    const auto arms = expanded_view(instance_, population);
    return spi_select(indices_, arms, t, instance_.population_budget(), options_);
}

std::unique_ptr<Policy> make_policy(const std::string& name, const Instance& instance, const PolicyConfig& config) {
    if (name == "spi") return std::make_unique<SpiPolicy>(instance, SpiSelectOptions{config.spi_zero_cutoff});
    if (name == "meanfield") return std::make_unique<MeanFieldPolicy>(instance);
    if (name == "whittle-original")
        return std::make_unique<GreedyIndexPolicy>(instance, IndexKind::WhittleOriginal, config.whittle);
    if (name == "whittle-infinite")
        return std::make_unique<GreedyIndexPolicy>(instance, IndexKind::WhittleInfinite, config.whittle);
    if (name == "whittle-finite")
        return std::make_unique<GreedyIndexPolicy>(instance, IndexKind::WhittleFinite, config.whittle);
    if (name == "qdiff") return std::make_unique<GreedyIndexPolicy>(instance, IndexKind::QDifference, config.whittle);
    if (name == "random") return std::make_unique<RandomPolicy>(instance);
    throw Error(ErrorCode::ConfigError, "unknown policy '" + name + "'");
}

}  // namespace sprmab
