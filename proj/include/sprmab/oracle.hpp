#pragma once

#include <cstdint>

#include "sprmab/model.hpp"
#include "sprmab/policy.hpp"

namespace sprmab {

/// Size limits for the joint dynamic programs.
struct OracleLimits {
    int max_arms = 4;
    int max_states = 3;
    int max_horizon = 5;
    /// Joint states times horizon.
    std::int64_t max_table = 10'000'000;
};

/// Optimal expected total reward under the hard budget and single-pull constraints,
/// by backward induction over joint (state, pulled) configurations.
/// Raises CAP_EXCEEDED when the instance is above the limits.
double exact_optimum(const Instance& instance, const OracleLimits& limits = {});

/// Exact expected total reward of a policy by forward propagation of the joint
/// distribution. Policies contribute their action_distribution(); nothing is sampled.
double exact_policy_value(const Instance& instance, const Policy& policy, const OracleLimits& limits = {});

}  // namespace sprmab
