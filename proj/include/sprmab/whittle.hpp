#pragma once

#include <vector>

#include "sprmab/index_policies.hpp"
#include "sprmab/model.hpp"

namespace sprmab {

struct WhittleOptions {
    /// Target accuracy of the returned index.
    double tol = 1e-6;
    /// Relative value iteration stops once span(T h - h) falls below this.
    double span_tol = 1e-9;
    int max_sweeps = 100000;
    int max_bisections = 100;
    /// Bracket doublings allowed before BRACKET_FAIL.
    int max_expansions = 60;
    /// Value iteration runs on tau * P + (1 - tau) * I, which has the same gain and
    /// Q-differences as P but is aperiodic.
    double aperiodicity_tau = 0.8;
};

/// Average-reward optimality equation with a per-step subsidy for the passive action.
struct AverageRewardSolution {
    double gain = 0.0;
    std::vector<double> bias;  // relative values of the untransformed chain, bias[0] == 0
    std::vector<double> q;     // q[s * 2 + a], shifted per state by a common constant
    int sweeps = 0;

    double q_difference(int s) const { return q[2 * s + 1] - q[2 * s]; }
};

/// Relative value iteration (reference state 0). `warm_start` may hold a bias vector
/// from a nearby subsidy. Throws NON_CONVERGENT after max_sweeps.
AverageRewardSolution solve_average_reward(const ArmModel& model, double subsidy, const WhittleOptions& options = {},
                                           const std::vector<double>* warm_start = nullptr);

/// Outcome of the subsidy search for one state.
struct WhittleComputation {
    double index = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    int bisections = 0;
    int expansions = 0;
    /// |Q(s,1) - Q(s,0)| re-evaluated at the returned index.
    double residual = 0.0;
    double gain = 0.0;
    int sweeps = 0;
};

WhittleComputation whittle_index_at(const ArmModel& model, int state, const WhittleOptions& options = {});

/// Stationary single-type table of infinite-horizon Whittle indices.
IndexTable whittle_index_infinite(const ArmModel& model, int horizon, const WhittleOptions& options = {});

/// Q_t(s,1) - Q_t(s,0) under backward induction with subsidy paid on passive steps t..T-1.
double finite_q_difference(const ArmModel& model, int horizon, int state, int t, double subsidy);

/// Time-dependent single-type table of finite-horizon Whittle indices.
IndexTable whittle_index_finite(const ArmModel& model, int horizon, const WhittleOptions& options = {});

/// Q_t(s,1) - Q_t(s,0) without subsidy, for every (s, t).
IndexTable q_difference_indices(const ArmModel& model, int horizon);

}  // namespace sprmab
