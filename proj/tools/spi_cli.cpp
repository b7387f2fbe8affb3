// spi: experiment runner for single-pull restless bandits.
//
//   spi run    --config exp.json --out results/   results.csv + table.txt
//   spi sweep  --config exp.json --out results/   gap-vs-rho curve (sweep.csv)
//   spi time   --config exp.json --out results/   timing.csv
//   spi export --config exp.json --out results/   generated instances as JSON
//   spi lp-dump --config exp.json --out results/  occupancy LPs in CPLEX LP format
//   spi schema                                    config JSON schema
//
// Exit codes: 0 ok, 2 config error, 3 solver failure, 4 constraint audit failure.
// SPRMAB_THREADS sets the OpenMP thread count.

#include <omp.h>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "sprmab/error.hpp"
#include "sprmab/experiment.hpp"
#include "sprmab/lp.hpp"
#include "sprmab/model_io.hpp"
#include "sprmab/occupancy_lp.hpp"

using namespace sprmab;

namespace {

int exit_code(ErrorCode code) {
    switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::CapExceeded: return 2;
    case ErrorCode::AuditFailure:
    case ErrorCode::InfeasibleAction: return 4;
    default: return 3;
    }
}

struct Common {
    std::string config;
    std::string out = ".";
    std::string seeds;
    std::vector<std::string> policies;
    int episodes = 0;
    int resample = 0;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--seeds", c.seeds, "instance seeds A..B");
    cmd->add_option("--policies", c.policies, "comma-separated policy list")->delimiter(',');
    cmd->add_option("--episodes", c.episodes, "episodes per (instance, policy)");
    cmd->add_option("--resample-instances", c.resample, "number of instance draws");
}

ExperimentConfig resolve(const Common& c) {
    ExperimentConfig config = load_config(c.config);
    if (!c.seeds.empty()) {
        const auto dots = c.seeds.find("..");
        if (dots == std::string::npos) throw Error(ErrorCode::ConfigError, "--seeds expects A..B");
        try {
            const auto a = std::stoull(c.seeds.substr(0, dots));
            const auto b = std::stoull(c.seeds.substr(dots + 2));
            if (b < a) throw Error(ErrorCode::ConfigError, "--seeds needs A <= B");
            config.first_instance_seed = a;
            config.instances = static_cast<int>(b - a + 1);
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::ConfigError, "--seeds expects A..B");
        }
    }
    if (c.resample > 0) config.instances = c.resample;
    if (!c.policies.empty()) {
        for (const auto& p : c.policies)
            if (!is_policy_name(p)) throw Error(ErrorCode::ConfigError, "unknown policy '" + p + "'");
        config.policies = c.policies;
    }
    if (c.episodes != 0) {
        if (c.episodes < 2) throw Error(ErrorCode::ConfigError, "--episodes must be at least 2");
        config.n_episodes = c.episodes;
    }
    for (const auto& w : config.warnings) std::cerr << "warning: " << w << '\n';
    return config;
}

void write(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* threads = std::getenv("SPRMAB_THREADS")) {
        const int n = std::atoi(threads);
        if (n > 0) omp_set_num_threads(n);
    }

    CLI::App app{"single-pull restless bandit experiments"};
    app.require_subcommand(1);

    Common run_opts;
    bool timing = false, dump = false;
    auto* run = app.add_subcommand("run", "evaluate a policy suite");
    add_common(run, run_opts);
    run->add_flag("--timing", timing, "fill runtime_ms in results.csv");
    run->add_flag("--dump-trajectories", dump, "write trajectories.jsonl");

    Common sweep_opts;
    std::vector<int> rho_list;
    auto* sweep = app.add_subcommand("sweep", "SPI optimality gap as rho grows");
    add_common(sweep, sweep_opts);
    sweep->add_option("--rho", rho_list, "ascending rho values (overrides rho_list)")->delimiter(',');

    Common time_opts;
    auto* timecmd = app.add_subcommand("time", "policy wall time");
    add_common(timecmd, time_opts);

    Common export_opts;
    auto* exportcmd = app.add_subcommand("export", "write generated instances as JSON");
    add_common(exportcmd, export_opts);

    Common dump_opts;
    std::string variant = "dummy";
    auto* lpdump = app.add_subcommand("lp-dump", "write occupancy LPs in CPLEX LP format");
    add_common(lpdump, dump_opts);
    lpdump->add_option("--variant", variant, "meanfield, sprmab or dummy")
        ->check(CLI::IsMember({"meanfield", "sprmab", "dummy"}));

    app.add_subcommand("schema", "print the config JSON schema");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("schema")) {
            std::cout << config_schema().dump(2) << '\n';
        } else if (*run) {
            const auto config = resolve(run_opts);
            run_experiment(config, run_opts.out, {timing, dump});
            std::cout << "wrote " << (std::filesystem::path(run_opts.out) / "results.csv").string() << '\n';
        } else if (*sweep) {
            const auto config = resolve(sweep_opts);
            const auto& rhos = rho_list.empty() ? config.rho_list : rho_list;
            if (rhos.empty()) throw Error(ErrorCode::ConfigError, "sweep needs rho_list or --rho");
            const auto result = sweep_rho(config, rhos);
            for (const auto& p : result.points)
                if (!p.audit.ok()) throw Error(ErrorCode::AuditFailure, "constraint violation at rho " + std::to_string(p.rho));
            std::filesystem::create_directories(sweep_opts.out);
            write(std::filesystem::path(sweep_opts.out) / "sweep.csv", sweep_csv(result));
            std::cout << sweep_csv(result);
        } else if (*timecmd) {
            const auto config = resolve(time_opts);
            std::filesystem::create_directories(time_opts.out);
            const auto rows = time_policies(config);
            write(std::filesystem::path(time_opts.out) / "timing.csv", timing_csv(rows));
            std::cout << timing_csv(rows);
        } else if (*exportcmd) {
            const auto config = resolve(export_opts);
            std::filesystem::create_directories(export_opts.out);
            for (const auto seed : config.instance_seeds()) {
                const auto path = std::filesystem::path(export_opts.out) / ("instance_" + std::to_string(seed) + ".json");
                save_instance(instance_for(config, seed), path);
                std::cout << path.string() << '\n';
            }
        } else if (*lpdump) {
            const auto config = resolve(dump_opts);
            const LpVariant v = variant == "meanfield" ? LpVariant::MeanField
                                : variant == "sprmab"  ? LpVariant::SprmabLp
                                                       : LpVariant::Dummy;
            std::filesystem::create_directories(dump_opts.out);
            for (const auto seed : config.instance_seeds()) {
                const auto lp = build_occupancy_lp(instance_for(config, seed), v);
                const auto path =
                    std::filesystem::path(dump_opts.out) / (variant + "_" + std::to_string(seed) + ".lp");
                write(path, to_lp_format(lp.problem));
                std::cout << path.string() << '\n';
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
