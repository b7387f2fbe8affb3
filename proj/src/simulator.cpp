#include "sprmab/simulator.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <sstream>

#include "json.hpp"
#include "sprmab/error.hpp"
#include "sprmab/rng.hpp"

namespace sprmab {

namespace {

using Clock = std::chrono::steady_clock;

void check_actions(const Instance& instance, const Population& population, std::span<const int> actions, int t) {
    if (actions.size() != population.size())
        throw Error(ErrorCode::InfeasibleAction, "action vector length does not match the population");
    int pulls = 0;
    for (size_t i = 0; i < actions.size(); ++i) {
        if (actions[i] != 0 && actions[i] != 1)
            throw Error(ErrorCode::InfeasibleAction, "actions must be 0 or 1");
        if (actions[i] == 1 && population[i].pulled) {
            std::ostringstream os;
            os << "arm " << i << " pulled a second time at t=" << t;
            throw Error(ErrorCode::InfeasibleAction, os.str());
        }
        pulls += actions[i];
    }
    if (pulls > instance.population_budget()) {
        std::ostringstream os;
        os << pulls << " pulls at t=" << t << " exceed the budget " << instance.population_budget();
        throw Error(ErrorCode::InfeasibleAction, os.str());
    }
}

}  // namespace

StepOutcome step(const Instance& instance, const Population& population, std::span<const int> actions,
                 std::uint64_t episode_seed, int t) {
    check_actions(instance, population, actions, t);
    StepOutcome out;
    out.next = population;
    for (size_t i = 0; i < population.size(); ++i) {
        const auto& arm = population[i];
        const auto& model = instance.types[arm.type];
        const int a = arm.pulled ? 0 : actions[i];
        out.reward += model.r(arm.state, a);
        const double u = uniform_at(episode_seed, kTagTransition, i, static_cast<std::uint64_t>(t));
        out.next[i].state = sample_index(model.row(arm.state, a), u);
        if (actions[i] == 1) out.next[i].pulled = true;
    }
    return out;
}

EpisodeResult run_episode(const Instance& instance, const Policy& policy, std::uint64_t seed,
                          std::vector<TrajectoryRecord>* trajectory) {
    EpisodeResult result;
    Population population = replicate(instance, seed);
    const int n = static_cast<int>(population.size());
    result.pull_time.assign(n, -1);
    for (int t = 0; t < instance.horizon; ++t) {
        const auto start = Clock::now();
        const Actions actions = policy.select(population, t, seed);
        result.select_ms += std::chrono::duration<double, std::milli>(Clock::now() - start).count();

        StepOutcome outcome = step(instance, population, actions, seed, t);
        int pulls = 0;
        std::vector<char> recorded(n);
        for (int i = 0; i < n; ++i) {
            recorded[i] = static_cast<char>(actions[i]);
            pulls += actions[i];
            if (actions[i] == 1 && result.pull_time[i] < 0) result.pull_time[i] = t;
            if (trajectory) {
                const auto& arm = population[i];
                const int a = arm.pulled ? 0 : actions[i];
                trajectory->push_back({t, i, arm.type, arm.state, arm.pulled, actions[i],
                                       instance.types[arm.type].r(arm.state, a)});
            }
        }
        result.actions.push_back(std::move(recorded));
        result.pulls_per_step.push_back(pulls);
        result.total_reward += outcome.reward;
        population = std::move(outcome.next);
    }
    return result;
}

AuditReport audit(const Instance& instance, const EpisodeResult& episode) {
    AuditReport report;
    std::vector<int> pulls_per_arm;
    for (const auto& row : episode.actions) {
        if (pulls_per_arm.empty()) pulls_per_arm.assign(row.size(), 0);
        int total = 0;
        for (size_t i = 0; i < row.size(); ++i) {
            total += row[i];
            pulls_per_arm[i] += row[i];
        }
        if (total > instance.population_budget()) ++report.budget_violations;
    }
    for (int c : pulls_per_arm)
        if (c > 1) ++report.single_pull_violations;
    return report;
}

void summarize(std::span<const double> rewards, double& mean, double& ci95) {
    const double n = static_cast<double>(rewards.size());
    mean = 0.0;
    ci95 = 0.0;
    if (rewards.empty()) return;
    for (double r : rewards) mean += r;
    mean /= n;
    if (rewards.size() < 2) return;
    double ss = 0.0;
    for (double r : rewards) ss += (r - mean) * (r - mean);
    ci95 = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

namespace {

Summary reduce(const Policy& policy, std::vector<EpisodeResult>& episodes, const Instance& instance) {
    Summary s;
    s.n_episodes = static_cast<int>(episodes.size());
    s.precompute_ms = policy.precompute_ms();
    for (auto& e : episodes) {
        s.rewards.push_back(e.total_reward);
        s.select_ms += e.select_ms;
        const auto a = audit(instance, e);
        s.audit.budget_violations += a.budget_violations;
        s.audit.single_pull_violations += a.single_pull_violations;
    }
    summarize(s.rewards, s.mean, s.ci95);
    s.runtime_ms = s.precompute_ms + s.select_ms;
    return s;
}

void check_episode_count(int n) {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "evaluation needs at least two episodes");
}

}  // namespace

Summary evaluate(const Instance& instance, const Policy& policy, int n_episodes, std::uint64_t base_seed) {
    check_episode_count(n_episodes);
    std::vector<EpisodeResult> episodes(n_episodes);
    std::vector<std::exception_ptr> errors(n_episodes);
#pragma omp parallel for schedule(dynamic)
    for (int e = 0; e < n_episodes; ++e) {
        try {
            episodes[e] = run_episode(instance, policy, base_seed + static_cast<std::uint64_t>(e));
            episodes[e].actions.shrink_to_fit();
        } catch (...) {
            errors[e] = std::current_exception();
        }
    }
    for (const auto& error : errors)
        if (error) std::rethrow_exception(error);
    return reduce(policy, episodes, instance);
}

Summary evaluate_serial(const Instance& instance, const Policy& policy, int n_episodes, std::uint64_t base_seed) {
    check_episode_count(n_episodes);
    std::vector<EpisodeResult> episodes;
    episodes.reserve(n_episodes);
    for (int e = 0; e < n_episodes; ++e)
        episodes.push_back(run_episode(instance, policy, base_seed + static_cast<std::uint64_t>(e)));
    return reduce(policy, episodes, instance);
}

double normalize_score(double mean, double upper_bound, double random_mean) {
    if (!(upper_bound > random_mean)) {
        std::ostringstream os;
        os << "upper bound " << upper_bound << " does not exceed the random mean " << random_mean;
        throw Error(ErrorCode::DegenerateRange, os.str());
    }
    return (mean - random_mean) / (upper_bound - random_mean);
}

std::vector<double> normalize_scores(std::span<const double> means, double upper_bound, double random_mean) {
    std::vector<double> out;
    for (double m : means) out.push_back(normalize_score(m, upper_bound, random_mean));
    return out;
}

void write_trajectories(std::ostream& out, const Instance& instance, const Policy& policy, int n_episodes,
                        std::uint64_t base_seed) {
    for (int e = 0; e < n_episodes; ++e) {
        std::vector<TrajectoryRecord> records;
        run_episode(instance, policy, base_seed + static_cast<std::uint64_t>(e), &records);
        for (const auto& r : records) {
            nlohmann::json line{{"episode", e}, {"t", r.t + 1},       {"arm", r.arm},       {"type", r.type},
                                {"state", r.state}, {"pulled", r.pulled}, {"action", r.action}, {"reward", r.reward}};
            out << line.dump() << '\n';
        }
    }
}

}  // namespace sprmab
