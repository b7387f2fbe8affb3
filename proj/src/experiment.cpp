#include "sprmab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "sprmab/error.hpp"
#include "sprmab/model_io.hpp"
#include "sprmab/occupancy_lp.hpp"

namespace sprmab {

using nlohmann::json;

std::vector<std::uint64_t> ExperimentConfig::instance_seeds() const {
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < instances; ++i) seeds.push_back(first_instance_seed + static_cast<std::uint64_t>(i));
    return seeds;
}

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

Range parse_range(const json& doc, const char* key, Range fallback) {
    if (!doc.contains(key)) return fallback;
    const auto& v = doc.at(key);
    if (!v.is_array() || v.size() != 2) config_error(std::string(key) + " must be [lo, hi]");
    const Range r{v[0].get<double>(), v[1].get<double>()};
    if (!(r.lo <= r.hi)) config_error(std::string(key) + " needs lo <= hi");
    return r;
}

template <class T>
T positive(const json& doc, const char* key, T fallback) {
    if (!doc.contains(key)) return fallback;
    const T v = doc.at(key).get<T>();
    if (v <= 0) config_error(std::string(key) + " must be positive");
    return v;
}

}  // namespace

json config_schema() {
    return json::parse(R"({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "experiment",
  "type": "object",
  "required": ["domain", "setting"],
  "properties": {
    "domain": {
      "type": "object",
      "required": ["family"],
      "properties": {
        "family": {"enum": ["cpap", "mhmh", "ehrenfest", "random"]},
        "seed": {"type": "integer", "minimum": 0},
        "cpap_active_only_reward": {"type": "boolean"},
        "eta_start": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "eta_engaged": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "eta_dropout": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "reliable_reward": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "c": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "mu": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "lambda": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "dt": {"type": "number", "exclusiveMinimum": 0}
      }
    },
    "setting": {"type": "array", "items": {"type": "integer"}, "minItems": 5, "maxItems": 5,
                "description": "[N, S, K, rho, T]"},
    "policies": {"type": "array", "items": {"enum": ["spi", "meanfield", "whittle-original",
                 "whittle-infinite", "whittle-finite", "qdiff", "random"]}},
    "episodes": {"type": "integer", "minimum": 2},
    "base_seed": {"type": "integer", "minimum": 0},
    "instances": {"type": "integer", "minimum": 1},
    "rho_list": {"type": "array", "items": {"type": "integer", "minimum": 1}},
    "spi_zero_cutoff": {"type": "boolean"}
  }
})");
}

ExperimentConfig config_from_json(const json& doc) {
    ExperimentConfig c;
    try {
        if (!doc.is_object()) config_error("config must be a JSON object");
        static const std::vector<std::string> known{"domain",    "setting",   "policies", "episodes",       "base_seed",
                                                    "instances", "rho_list", "spi_zero_cutoff", "first_instance_seed"};
        for (const auto& [key, _] : doc.items())
            if (std::find(known.begin(), known.end(), key) == known.end()) config_error("unknown config key '" + key + "'");

        const auto& d = doc.at("domain");
        c.domain.family = family_from_string(d.at("family").get<std::string>());
        c.domain.seed = d.value("seed", std::uint64_t{0});
        c.first_instance_seed = doc.value("first_instance_seed", c.domain.seed);
        c.domain.cpap_active_only_reward = d.value("cpap_active_only_reward", false);
        c.domain.mhmh_start = parse_range(d, "eta_start", c.domain.mhmh_start);
        c.domain.mhmh_engaged = parse_range(d, "eta_engaged", c.domain.mhmh_engaged);
        c.domain.mhmh_dropout = parse_range(d, "eta_dropout", c.domain.mhmh_dropout);
        c.domain.mhmh_reward = parse_range(d, "reliable_reward", c.domain.mhmh_reward);
        c.domain.ehrenfest_c = parse_range(d, "c", c.domain.ehrenfest_c);
        c.domain.ehrenfest_mu = parse_range(d, "mu", c.domain.ehrenfest_mu);
        c.domain.ehrenfest_lambda = parse_range(d, "lambda", c.domain.ehrenfest_lambda);
        c.domain.ehrenfest_dt = positive(d, "dt", c.domain.ehrenfest_dt);

        const auto& s = doc.at("setting");
        if (!s.is_array() || s.size() != 5) config_error("setting must be [N, S, K, rho, T]");
        c.setting = {s[0].get<int>(), s[1].get<int>(), s[2].get<int>(), s[3].get<int>(), s[4].get<int>()};
        if (c.setting.n_types <= 0 || c.setting.n_states <= 0 || c.setting.budget < 0 || c.setting.rho <= 0 ||
            c.setting.horizon <= 0)
            config_error("setting entries must be positive (K may be 0)");
        if (c.domain.family == Family::Mhmh && c.setting.n_states != 3) config_error("MHMH arms have exactly 3 states");

        if (doc.contains("policies")) c.policies = doc.at("policies").get<std::vector<std::string>>();
        for (const auto& p : c.policies)
            if (!is_policy_name(p)) config_error("unknown policy '" + p + "'");
        c.n_episodes = doc.value("episodes", c.n_episodes);
        if (c.n_episodes < 2) config_error("episodes must be at least 2");
        c.base_seed = doc.value("base_seed", c.base_seed);
        c.instances = positive(doc, "instances", c.instances);
        if (doc.contains("rho_list")) {
            c.rho_list = doc.at("rho_list").get<std::vector<int>>();
            for (size_t i = 0; i < c.rho_list.size(); ++i) {
                if (c.rho_list[i] <= 0) config_error("rho_list entries must be positive");
                if (i > 0 && c.rho_list[i] <= c.rho_list[i - 1]) config_error("rho_list must be ascending");
            }
        }
        c.policy.spi_zero_cutoff = doc.value("spi_zero_cutoff", true);
    } catch (const json::exception& e) {
        config_error(e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) throw;
        config_error(e.what());
    }
    if (c.setting.budget >= c.setting.n_types)
        c.warnings.push_back("budget K >= N: the per-step budget never binds");
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) config_error("cannot open config " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        config_error(path.string() + ": " + e.what());
    }
    return config_from_json(doc);
}

Instance instance_for(const ExperimentConfig& config, std::uint64_t instance_seed) {
    DomainSpec spec = config.domain;
    spec.seed = instance_seed;
    return make_instance(spec, config.setting);
}

bool near_optimal(double mean, double upper_bound) { return upper_bound - mean <= 0.03 * std::abs(upper_bound); }

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
    out << text;
}

std::string fmt(double v, int precision = 6) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

// Keeps the failing instance for replay before the error leaves the runner.
template <class F>
auto guarded(const Instance& instance, const std::filesystem::path& out_dir, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        if (!out_dir.empty() && e.code() != ErrorCode::AuditFailure && e.code() != ErrorCode::ConfigError)
            save_instance(instance, out_dir / "failed_instance.json");
        throw;
    }
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                                      const RunOptions& options) {
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    std::vector<ResultRow> rows;
    std::ofstream dump;
    if (options.dump_trajectories && !out_dir.empty()) dump.open(out_dir / "trajectories.jsonl");

    for (const auto seed : config.instance_seeds()) {
        const Instance instance = instance_for(config, seed);
        guarded(instance, out_dir, [&] {
            const double ub = upper_bound(instance);
            std::vector<std::string> names = config.policies;
            const bool random_listed = std::find(names.begin(), names.end(), "random") != names.end();
            if (!random_listed) names.push_back("random");

            std::vector<ResultRow> block;
            double random_mean = 0.0;
            for (const auto& name : names) {
                const auto policy = make_policy(name, instance, config.policy);
                const Summary s = evaluate(instance, *policy, config.n_episodes, config.base_seed);
                if (!s.audit.ok()) {
                    std::ostringstream os;
                    os << name << " on instance " << seed << ": " << s.audit.budget_violations
                       << " budget and " << s.audit.single_pull_violations << " single-pull violations";
                    throw Error(ErrorCode::AuditFailure, os.str());
                }
                if (dump.is_open()) {
                    dump << "{\"instance_seed\":" << seed << ",\"policy\":\"" << name << "\"}\n";
                    write_trajectories(dump, instance, *policy, config.n_episodes, config.base_seed);
                }
                if (name == "random") random_mean = s.mean;
                ResultRow row;
                row.domain = to_string(config.domain.family);
                row.setting = to_string(config.setting);
                row.instance_seed = seed;
                row.policy = name;
                row.mean_reward = s.mean;
                row.ci95 = s.ci95;
                row.upper_bound = ub;
                row.runtime_ms = s.runtime_ms;
                row.n_episodes = s.n_episodes;
                row.audit = s.audit;
                block.push_back(row);
            }
            for (auto& row : block) {
                if (ub > random_mean) {
                    row.normalized = normalize_score(row.mean_reward, ub, random_mean);
                    row.has_normalized = true;
                }
            }
            if (!random_listed) block.pop_back();
            rows.insert(rows.end(), block.begin(), block.end());
            return 0;
        });
    }
    if (!out_dir.empty()) {
        write_file(out_dir / "results.csv", results_csv(rows, options.timing));
        std::ostringstream head;
        const auto seeds = config.instance_seeds();
        head << "instance mode: "
             << (seeds.size() == 1 ? "single draw" : "average over " + std::to_string(seeds.size()) + " draws")
             << '\n';
        if (config.domain.family == Family::Mhmh) {
            const int greedy = (config.setting.n_types + 1) / 2;
            head << "mhmh types: " << greedy << " greedy, " << config.setting.n_types - greedy << " reliable\n";
        }
        for (const auto& w : config.warnings) head << "warning: " << w << '\n';
        write_file(out_dir / "table.txt", head.str() + results_table(rows));
    }
    return rows;
}

std::string results_csv(const std::vector<ResultRow>& rows, bool timing) {
    std::ostringstream os;
    os << "domain,setting,instance_seed,policy,mean_reward,ci95,upper_bound,normalized,runtime_ms,n_episodes\n";
    for (const auto& r : rows) {
        os << r.domain << ",\"" << r.setting << "\"," << r.instance_seed << ',' << r.policy << ','
           << fmt(r.mean_reward) << ',' << fmt(r.ci95) << ',' << fmt(r.upper_bound) << ','
           << (r.has_normalized ? fmt(r.normalized) : "") << ',' << (timing ? fmt(r.runtime_ms, 3) : "") << ','
           << r.n_episodes << '\n';
    }
    return os.str();
}

std::string results_table(const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    std::uint64_t current = std::numeric_limits<std::uint64_t>::max();
    for (const auto& r : rows) {
        if (r.instance_seed != current) {
            current = r.instance_seed;
            os << "\n" << r.domain << ' ' << r.setting << "  instance " << r.instance_seed << "  upper bound "
               << fmt(r.upper_bound, 2) << '\n';
            os << std::left << std::setw(18) << "policy" << std::right << std::setw(22) << "mean +- ci95"
               << std::setw(12) << "normalized" << '\n';
        }
        const std::string cell = fmt(r.mean_reward, 2) + " +- " + fmt(r.ci95, 2);
        os << std::left << std::setw(18) << r.policy << std::right << std::setw(22) << cell << std::setw(12)
           << (r.has_normalized ? fmt(r.normalized, 3) : "-") << (near_optimal(r.mean_reward, r.upper_bound) ? "  *" : "")
           << '\n';
    }
    // Per-policy averages over instance draws, in first-seen policy order.
    std::vector<std::string> order;
    std::vector<std::uint64_t> seeds;
    for (const auto& r : rows) {
        if (std::find(order.begin(), order.end(), r.policy) == order.end()) order.push_back(r.policy);
        if (std::find(seeds.begin(), seeds.end(), r.instance_seed) == seeds.end()) seeds.push_back(r.instance_seed);
    }
    if (seeds.size() > 1) {
        os << "\naverage over " << seeds.size() << " instance draws\n";
        for (const auto& name : order) {
            double mean = 0.0, ub = 0.0, norm = 0.0;
            int count = 0, normalized = 0;
            for (const auto& r : rows) {
                if (r.policy != name) continue;
                mean += r.mean_reward;
                ub += r.upper_bound;
                ++count;
                if (r.has_normalized) {
                    norm += r.normalized;
                    ++normalized;
                }
            }
            mean /= count;
            ub /= count;
            os << std::left << std::setw(18) << name << std::right << std::setw(22) << fmt(mean, 2) << std::setw(12)
               << (normalized == count ? fmt(norm / count, 3) : "-") << (near_optimal(mean, ub) ? "  *" : "") << '\n';
        }
    }
    os << "\n* within 3% of the upper bound\n";
    return os.str();
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (x[i] <= 0.0 || y[i] <= 0.0) continue;
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

SweepResult sweep_rho(const ExperimentConfig& config, const std::vector<int>& rho_list, const PolicyFactory& factory) {
    for (size_t i = 1; i < rho_list.size(); ++i)
        if (rho_list[i] <= rho_list[i - 1]) throw Error(ErrorCode::ConfigError, "rho_list must be ascending");
    SweepResult result;
    for (const int rho : rho_list) {
        ExperimentConfig c = config;
        c.setting.rho = rho;
        SweepPoint point;
        point.rho = rho;
        double ci_sq = 0.0, nci_sq = 0.0;
        const auto seeds = c.instance_seeds();
        for (const auto seed : seeds) {
            const Instance instance = instance_for(c, seed);
            const double ub = upper_bound(instance);
            const auto policy = factory ? factory(instance) : make_policy("spi", instance, c.policy);
            const Summary s = evaluate(instance, *policy, c.n_episodes, c.base_seed);
            const double arms = static_cast<double>(instance.n_arms());
            point.gap += (ub - s.mean) / arms;
            ci_sq += (s.ci95 / arms) * (s.ci95 / arms);
            point.normalized_gap += 1.0 - s.mean / ub;
            nci_sq += (s.ci95 / ub) * (s.ci95 / ub);
            point.audit.budget_violations += s.audit.budget_violations;
            point.audit.single_pull_violations += s.audit.single_pull_violations;
        }
        const double k = static_cast<double>(seeds.size());
        point.gap /= k;
        point.normalized_gap /= k;
        point.ci = std::sqrt(ci_sq) / k;
        point.normalized_ci = std::sqrt(nci_sq) / k;
        result.points.push_back(point);
    }
    std::vector<double> x, y;
    for (const auto& p : result.points) {
        x.push_back(p.rho);
        y.push_back(p.normalized_gap);
    }
    result.loglog_slope = loglog_slope(x, y);
    return result;
}

std::string sweep_csv(const SweepResult& result) {
    std::ostringstream os;
    os << "rho,gap,ci,normalized_gap,normalized_ci\n";
    for (const auto& p : result.points)
        os << p.rho << ',' << fmt(p.gap, 8) << ',' << fmt(p.ci, 8) << ',' << fmt(p.normalized_gap, 8) << ','
           << fmt(p.normalized_ci, 8) << '\n';
    os << "# loglog_slope," << (std::isnan(result.loglog_slope) ? std::string("nan") : fmt(result.loglog_slope, 6))
       << '\n';
    return os.str();
}

std::vector<TimingRow> time_policies(const ExperimentConfig& config) {
    std::vector<TimingRow> rows;
    for (const auto& name : config.policies) rows.push_back({name, 0.0, 0.0, {}});
    for (const auto seed : config.instance_seeds()) {
        const Instance instance = instance_for(config, seed);
        for (auto& row : rows) {
            const auto policy = make_policy(row.policy, instance, config.policy);
            const Summary s = evaluate(instance, *policy, config.n_episodes, config.base_seed);
            row.samples.push_back(s.runtime_ms);
        }
    }
    for (auto& row : rows) {
        double mean = 0.0;
        for (double v : row.samples) mean += v;
        mean /= static_cast<double>(row.samples.size());
        double ss = 0.0;
        for (double v : row.samples) ss += (v - mean) * (v - mean);
        row.mean_ms = mean;
        row.std_ms = row.samples.size() > 1 ? std::sqrt(ss / static_cast<double>(row.samples.size() - 1)) : 0.0;
    }
    return rows;
}

std::string timing_csv(const std::vector<TimingRow>& rows) {
    std::ostringstream os;
    os << "policy,mean_ms,std_ms\n";
    for (const auto& r : rows) os << r.policy << ',' << fmt(r.mean_ms, 3) << ',' << fmt(r.std_ms, 3) << '\n';
    return os.str();
}

}  // namespace sprmab
