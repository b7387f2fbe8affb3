#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "sprmab/domains.hpp"
#include "sprmab/policy.hpp"
#include "sprmab/simulator.hpp"

namespace sprmab {

/// One experiment: a domain family, a setting, a policy suite and evaluation sizes.
struct ExperimentConfig {
    DomainSpec domain;
    Setting setting;
    std::vector<std::string> policies{"spi", "meanfield", "whittle-original", "random"};
    int n_episodes = 100;
    std::uint64_t base_seed = 1000;
    /// Instance draws use domain seeds first_instance_seed, first_instance_seed + 1, ...
    std::uint64_t first_instance_seed = 0;
    int instances = 1;
    std::vector<int> rho_list;
    PolicyConfig policy;
    /// Non-fatal remarks collected while parsing (for example a budget that never binds).
    std::vector<std::string> warnings;

    std::vector<std::uint64_t> instance_seeds() const;
};

/// Parses a JSON config document. Throws Error(ConfigError) on anything malformed.
///   {"domain": {"family": "cpap", "seed": 0, ...}, "setting": [N, S, K, rho, T],
///    "policies": [...], "episodes": 100, "base_seed": 1000, "instances": 1,
///    "rho_list": [...], "spi_zero_cutoff": true}
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_schema();

struct ResultRow {
    std::string domain;
    std::string setting;
    std::uint64_t instance_seed = 0;
    std::string policy;
    double mean_reward = 0.0;
    double ci95 = 0.0;
    double upper_bound = 0.0;
    double normalized = 0.0;
    bool has_normalized = false;
    double runtime_ms = 0.0;
    int n_episodes = 0;
    AuditReport audit;
};

struct RunOptions {
    /// Fill runtime_ms in results.csv (wall clock is host-dependent, so off by default).
    bool timing = false;
    bool dump_trajectories = false;
};

Instance instance_for(const ExperimentConfig& config, std::uint64_t instance_seed);

/// Runs every (instance, policy) pair, always evaluating random for normalization.
/// Writes results.csv and table.txt into out_dir when it is non-empty.
/// Solver failures write the offending instance to out_dir/failed_instance.json before
/// rethrowing; audit violations raise AUDIT_FAILURE.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                                      const RunOptions& options = {});

std::string results_csv(const std::vector<ResultRow>& rows, bool timing);
std::string results_table(const std::vector<ResultRow>& rows);

/// Gap of near-optimal results: mean within 3% of the upper bound.
bool near_optimal(double mean, double upper_bound);

using PolicyFactory = std::function<std::unique_ptr<Policy>(const Instance&)>;

struct SweepPoint {
    int rho = 0;
    /// Per-arm gap (upper bound - mean) / (rho N), averaged over instance draws.
    double gap = 0.0;
    double ci = 0.0;
    /// 1 - mean / upper bound, averaged over instance draws.
    double normalized_gap = 0.0;
    double normalized_ci = 0.0;
    AuditReport audit;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    /// Least-squares slope of log(normalized_gap) against log(rho) over positive gaps;
    /// NaN when fewer than two points qualify.
    double loglog_slope = 0.0;
};

/// The setting's budget K stays fixed as rho grows, so the population budget is K * rho.
SweepResult sweep_rho(const ExperimentConfig& config, const std::vector<int>& rho_list,
                      const PolicyFactory& factory = {});
std::string sweep_csv(const SweepResult& result);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct TimingRow {
    std::string policy;
    double mean_ms = 0.0;
    double std_ms = 0.0;
    std::vector<double> samples;
};

/// Precomputation plus selection time per policy, averaged over the instance draws.
std::vector<TimingRow> time_policies(const ExperimentConfig& config);
std::string timing_csv(const std::vector<TimingRow>& rows);

}  // namespace sprmab
