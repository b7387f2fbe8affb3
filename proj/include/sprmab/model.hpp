#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sprmab {

/// Binary action set: 0 = passive, 1 = active (pull).
inline constexpr int kActions = 2;

/// Tolerance used for every row-sum and distribution-sum check.
inline constexpr double kRowSumTol = 1e-9;

/**
 * One arm type: a two-action finite MDP.
 *
 * Transitions are stored densely as P[s][a][s'] and rewards as r[s][a]. An
 * expanded model (see expand_with_dummies) carries twice the original states;
 * the dummy copy of original state s lives at index s + original_states().
 * Instances are immutable after construction.
 */
class ArmModel {
public:
    ArmModel() = default;

    /// Throws Error(InvalidArgument) on dimension mismatch only; stochasticity
    /// is checked by validate_arm so that invalid models can still be reported.
    ArmModel(int n_states, std::vector<double> transitions, std::vector<double> rewards,
             std::string label = {});

    int n_states() const { return n_states_; }
    const std::string& label() const { return label_; }

    double p(int s, int a, int next) const {
        return transitions_[(static_cast<size_t>(s) * kActions + a) * n_states_ + next];
    }
    double r(int s, int a) const { return rewards_[static_cast<size_t>(s) * kActions + a]; }

    /// Row P(s, a, .) as a contiguous span.
    std::span<const double> row(int s, int a) const {
        return {transitions_.data() + (static_cast<size_t>(s) * kActions + a) * n_states_,
                static_cast<size_t>(n_states_)};
    }

    /// Same model (expansion included) with a replaced reward table.
    ArmModel with_rewards(std::vector<double> rewards) const;

    const std::vector<double>& transitions() const { return transitions_; }
    const std::vector<double>& rewards() const { return rewards_; }

    bool is_expanded() const { return original_states_ > 0; }
    /// Number of non-dummy states (equals n_states() for unexpanded models).
    int original_states() const { return is_expanded() ? original_states_ : n_states_; }
    bool is_dummy(int s) const { return is_expanded() && s >= original_states_; }
    /// Originating normal state of a dummy state, nullopt for normal states.
    std::optional<int> dummy_of(int s) const {
        if (!is_dummy(s)) return std::nullopt;
        return s - original_states_;
    }

private:
    friend ArmModel expand_with_dummies(const ArmModel& model);

    int n_states_ = 0;
    int original_states_ = 0;
    std::vector<double> transitions_;
    std::vector<double> rewards_;
    std::string label_;
};

/// N arm types, rho arms per type, a per-step budget and a horizon.
struct Instance {
    std::vector<ArmModel> types;
    int rho = 1;
    /// Per-class normalized budget K; the population may pull K * rho arms per step.
    int budget = 0;
    int horizon = 1;
    /// One initial distribution per type over that type's states.
    std::vector<std::vector<double>> initial;

    int n_types() const { return static_cast<int>(types.size()); }
    int n_arms() const { return rho * n_types(); }
    int population_budget() const { return budget * rho; }
};

enum class Severity { Warning, Error };

struct ValidationIssue {
    Severity severity;
    std::string message;
};

struct ValidationReport {
    bool ok = true;
    std::vector<ValidationIssue> issues;

    void add(Severity severity, std::string message);
    size_t error_count() const;
};

ValidationReport validate_arm(const ArmModel& model);
ValidationReport validate_instance(const Instance& instance);

/// Throws Error(InvalidArgument) with the first ERROR of the report, if any.
void require_valid(const ValidationReport& report, const std::string& what);

/// Rescales rows whose sums are within kRowSumTol of 1 and rejects anything else.
ArmModel normalize_rows(const ArmModel& model);
std::vector<double> normalize_distribution(std::span<const double> dist);

/// Duplicates the state space: pulling a normal state lands in the dummy copy of the
/// action-1 target, and dummy states evolve by the passive kernel under both actions.
ArmModel expand_with_dummies(const ArmModel& model);

struct ArmSlot {
    int type = 0;
    int state = 0;
    bool pulled = false;
};

using Population = std::vector<ArmSlot>;

/// rho * N arm slots, type-major; initial states sampled from each type's
/// initial distribution with a stream derived from seed.
Population replicate(const Instance& instance, std::uint64_t seed);

/// Samples an index from a discrete distribution using a uniform draw u in [0, 1).
int sample_index(std::span<const double> probabilities, double u);

}  // namespace sprmab
