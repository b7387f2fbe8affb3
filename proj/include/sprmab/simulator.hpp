#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "sprmab/model.hpp"
#include "sprmab/policy.hpp"

namespace sprmab {

struct StepOutcome {
    Population next;
    double reward = 0.0;
};

/// Advances every arm one step. A pulled arm follows the dummy dynamics: it moves by the
/// passive kernel and earns the passive reward whatever its action. Raises
/// INFEASIBLE_ACTION if the actions exceed the budget or re-pull an arm.
/// Randomness is the pure function uniform_at(episode_seed, kTagTransition, arm, t).
StepOutcome step(const Instance& instance, const Population& population, std::span<const int> actions,
                 std::uint64_t episode_seed, int t);

struct EpisodeResult {
    double total_reward = 0.0;
    std::vector<int> pulls_per_step;
    /// First pull time per arm, -1 if never pulled.
    std::vector<int> pull_time;
    /// Recorded actions, actions[t][arm], for the post-hoc audit.
    std::vector<std::vector<char>> actions;
    double select_ms = 0.0;
};

/// One trajectory entry (for dumps): state and action before the step, reward earned.
struct TrajectoryRecord {
    int t;
    int arm;
    int type;
    int state;
    bool pulled;
    int action;
    double reward;
};

EpisodeResult run_episode(const Instance& instance, const Policy& policy, std::uint64_t seed,
                          std::vector<TrajectoryRecord>* trajectory = nullptr);

struct AuditReport {
    int budget_violations = 0;
    int single_pull_violations = 0;
    bool ok() const { return budget_violations == 0 && single_pull_violations == 0; }
};

/// Checks recorded actions against both hard constraints, independently of step().
AuditReport audit(const Instance& instance, const EpisodeResult& episode);

struct Summary {
    double mean = 0.0;
    double ci95 = 0.0;
    int n_episodes = 0;
    double precompute_ms = 0.0;
    double select_ms = 0.0;
    /// precompute_ms + select_ms: the policy's own cost, environment sampling excluded.
    double runtime_ms = 0.0;
    AuditReport audit;
    std::vector<double> rewards;
};

/// Mean and 1.96 * sample_std / sqrt(n) of a reward sample.
void summarize(std::span<const double> rewards, double& mean, double& ci95);

/// Episodes use seeds base_seed .. base_seed + n - 1 and run in parallel; results are
/// reduced in episode order so the summary is bit-identical for any thread count.
Summary evaluate(const Instance& instance, const Policy& policy, int n_episodes, std::uint64_t base_seed);

/// Single-threaded reference for evaluate().
Summary evaluate_serial(const Instance& instance, const Policy& policy, int n_episodes, std::uint64_t base_seed);

/// (mean - random_mean) / (upper_bound - random_mean). DEGENERATE_RANGE if upper_bound <= random_mean.
double normalize_score(double mean, double upper_bound, double random_mean);
std::vector<double> normalize_scores(std::span<const double> means, double upper_bound, double random_mean);

/// Line-delimited JSON, one object per (episode, t, arm).
void write_trajectories(std::ostream& out, const Instance& instance, const Policy& policy, int n_episodes,
                        std::uint64_t base_seed);

}  // namespace sprmab
