// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "helpers.hpp"
#include "json.hpp"
#include "sprmab/domains.hpp"
#include "sprmab/error.hpp"
#include "sprmab/experiment.hpp"
#include "sprmab/occupancy_lp.hpp"
#include "sprmab/oracle.hpp"
#include "sprmab/simulator.hpp"
#include "sprmab/whittle.hpp"

using namespace sprmab;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string format(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

// Episodes from criteria 3 to 5 feed the audit criterion.
AuditReport g_audit;
long g_audited_runs = 0;

void record(const AuditReport& a) {
    g_audit.budget_violations += a.budget_violations;
    g_audit.single_pull_violations += a.single_pull_violations;
    ++g_audited_runs;
}

std::vector<Instance> corpus() {
    std::mt19937_64 rng(20240601);
    std::vector<Instance> out;
    for (int k = 0; k < 200; ++k) out.push_back(testutil::random_small_instance(rng));
    return out;
}

Outcome sandwich(const std::vector<Instance>& instances) {
    int bad = 0;
    double worst = -kInfinity;
    for (const auto& inst : instances) {
        const double opt = exact_optimum(inst);
        const double du = solve_occupancy(inst, LpVariant::Dummy).objective;
        const double sp = solve_occupancy(inst, LpVariant::SprmabLp).objective;
        const double mf = solve_occupancy(inst, LpVariant::MeanField).objective;
        const double slack = std::max({opt - du, du - sp, sp - mf});
        worst = std::max(worst, slack);
        if (slack > 1e-6) ++bad;
    }
    return {bad == 0, format("%zu instances, %d violations, largest ordering slack %.2e", instances.size(), bad, worst)};
}

Outcome near_optimality(const std::vector<Instance>& instances) {
    int within = 0, beats_random = 0;
    std::vector<double> ratios;
    for (const auto& inst : instances) {
        const double opt = exact_optimum(inst);
        const double spi = exact_policy_value(inst, *make_policy("spi", inst));
        const double rnd = exact_policy_value(inst, *make_policy("random", inst));
        if (spi >= 0.9 * opt - 1e-9) ++within;
        if (spi >= rnd - 1e-9) ++beats_random;
        ratios.push_back(opt > 0 ? spi / opt : 1.0);
    }
    std::sort(ratios.begin(), ratios.end());
    const double n = static_cast<double>(instances.size());
    const bool pass = within >= 0.95 * n && beats_random == static_cast<int>(instances.size());
    return {pass, format("SPI >= 0.9 opt on %d/%zu, >= random on %d/%zu; SPI/opt min %.3f, 5%% %.3f, median %.3f",
                         within, instances.size(), beats_random, instances.size(), ratios.front(),
                         ratios[ratios.size() / 20], ratios[ratios.size() / 2])};
}

ExperimentConfig config(const std::string& text) { return config_from_json(nlohmann::json::parse(text)); }

// Mean reward per policy name on one instance.
std::map<std::string, Summary> evaluate_all(const Instance& inst, const std::vector<std::string>& names,
                                            int episodes) {
    std::map<std::string, Summary> out;
    for (const auto& name : names) {
        const auto s = evaluate(inst, *make_policy(name, inst), episodes, 1000);
        record(s.audit);
        out[name] = s;
    }
    return out;
}

Outcome table_pattern() {
    const auto c = config(R"({"domain": {"family": "cpap", "seed": 0}, "setting": [20, 5, 10, 10, 10],
                              "episodes": 200, "instances": 3})");
    bool pass = true;
    std::string detail;
    for (const auto seed : c.instance_seeds()) {
        const auto inst = instance_for(c, seed);
        const double ub = upper_bound(inst);
        auto r = evaluate_all(inst, {"spi", "meanfield", "whittle-original"}, c.n_episodes);
        const double spi = r["spi"].mean, mf = r["meanfield"].mean, wo = r["whittle-original"].mean;
        pass = pass && spi >= 0.95 * ub && spi >= mf && spi >= wo;
        detail += format("[draw %llu: UB %.1f spi %.1f mf %.1f whittle-orig %.1f] ", (unsigned long long)seed, ub, spi,
                         mf, wo);
    }
    return {pass, detail};
}

Outcome failure_ordering() {
    const auto c = config(R"({"domain": {"family": "cpap", "seed": 0}, "setting": [20, 3, 10, 10, 10],
                              "episodes": 200, "instances": 3})");
    double spi = 0, mf = 0, wo = 0;
    for (const auto seed : c.instance_seeds()) {
        const auto inst = instance_for(c, seed);
        const double ub = upper_bound(inst);
        auto r = evaluate_all(inst, {"spi", "meanfield", "whittle-original", "random"}, c.n_episodes);
        const double rnd = r["random"].mean;
        spi += normalize_score(r["spi"].mean, ub, rnd);
        mf += normalize_score(r["meanfield"].mean, ub, rnd);
        wo += normalize_score(r["whittle-original"].mean, ub, rnd);
    }
    const double k = static_cast<double>(c.instances);
    spi /= k;
    mf /= k;
    wo /= k;
    const bool pass = wo < mf && mf < spi && spi >= 0.9;
    return {pass, format("normalized averages over %d draws: whittle-orig %.3f, meanfield %.3f, spi %.3f", c.instances,
                         wo, mf, spi)};
}

Outcome gap_decay() {
    const auto c = config(R"({"domain": {"family": "random", "seed": 0}, "setting": [20, 10, 3, 2, 6],
                              "episodes": 200, "instances": 3})");
    const auto result = sweep_rho(c, {2, 5, 10, 20});
    bool monotone = true;
    std::string detail;
    for (size_t i = 0; i < result.points.size(); ++i) {
        const auto& p = result.points[i];
        record(p.audit);
        detail += format("rho %d gap %.4f+-%.4f; ", p.rho, p.normalized_gap, p.normalized_ci);
        if (i > 0) {
            const auto& q = result.points[i - 1];
            if (p.normalized_gap > q.normalized_gap + p.normalized_ci + q.normalized_ci) monotone = false;
        }
    }
    const bool pass = monotone && result.loglog_slope <= -0.3;
    return {pass, detail + format("log-log slope %.3f", result.loglog_slope)};
}

std::vector<int> ranking(const std::vector<double>& v) {
    std::vector<int> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return v[a] < v[b]; });
    return order;
}

Outcome ehrenfest() {
    DomainSpec spec;
    spec.family = Family::Ehrenfest;
    spec.n_types = 10;
    spec.n_states = 10;
    spec.seed = 0;
    const double dt = spec.ehrenfest_dt;
    const auto params = ehrenfest_draws(spec);
    const auto types = make_ehrenfest(spec);
    int rank_ok = 0, value_ok = 0, compared = 0, within = 0;
    double worst = 0.0;
    for (size_t k = 0; k < types.size(); ++k) {
        const auto table = whittle_index_infinite(types[k], 1);
        std::vector<double> got, want;
        bool all_within = true;
        for (int s = 0; s <= 10; ++s) {
            got.push_back(table.at(0, s, 0) / dt);
            want.push_back(closed_form_whittle(params[k].c, params[k].mu, params[k].lambda, 10, s));
            if (std::abs(want.back()) > 0.1) {
                const double rel = std::abs(got.back() - want.back()) / std::abs(want.back());
                worst = std::max(worst, rel);
                ++compared;
                if (rel <= 0.1) ++within;
                else all_within = false;
            }
        }
        if (ranking(got) == ranking(want)) ++rank_ok;
        if (all_within) ++value_ok;
    }
    const int n = static_cast<int>(types.size());
    return {rank_ok == n && value_ok == n,
            format("ranking equal on %d/%d draws; values within 10%% on %d/%d draws (%d/%d states), worst relative "
                   "error %.2f",
                   rank_ok, n, value_ok, n, within, compared, worst)};
}

Outcome runtime_order() {
    const auto c = config(R"({"domain": {"family": "cpap", "seed": 0}, "setting": [10, 10, 50, 50, 10],
                              "policies": ["spi", "whittle-finite", "whittle-infinite"], "episodes": 20,
                              "instances": 3})");
    const auto rows = time_policies(c);
    const double spi = rows[0].mean_ms, fin = rows[1].mean_ms, inf = rows[2].mean_ms;
    return {spi < fin && spi < inf, format("mean ms over 3 instances: spi %.1f, whittle-finite %.1f, "
                                           "whittle-infinite %.1f",
                                           spi, fin, inf)};
}

Outcome audit_result() {
    return {g_audit.ok() && g_audited_runs > 0,
            format("%ld evaluations audited: %d budget and %d single-pull violations", g_audited_runs,
                   g_audit.budget_violations, g_audit.single_pull_violations)};
}

Outcome invariants(const std::vector<Instance>& instances) {
    int failures = 0, checks = 0;
    auto expect = [&](bool ok) {
        ++checks;
        if (!ok) ++failures;
    };
    for (size_t k = 0; k < instances.size(); k += 4) {
        const auto& inst = instances[k];
        const auto sol = solve_occupancy(inst, LpVariant::Dummy);
        const auto chi = compute_chi(sol);
        const auto& L = sol.layout;
        for (int n = 0; n < L.n_types(); ++n) {
            const auto& m = L.model(n);
            for (int t = 0; t < L.horizon(); ++t) {
                double total = 0.0;
                for (int s = 0; s < m.n_states(); ++s) {
                    expect(chi.at(n, s, t) >= 0.0 && chi.at(n, s, t) <= 1.0);
                    total += sol.mu(n, s, 0, t) + sol.mu(n, s, 1, t);
                }
                expect(std::abs(total - 1.0) <= 1e-7);
            }
            // Dummy absorption: no probability leaves the dummy copies.
            for (int s = m.original_states(); s < m.n_states(); ++s)
                for (int a = 0; a < 2; ++a)
                    for (int j = 0; j < m.original_states(); ++j) expect(m.p(s, a, j) == 0.0);
        }
        // Tie-break determinism: equal indices resolve to the lowest arm ids, run after run.
        const auto policy = make_policy("spi", inst);
        const auto a = run_episode(inst, *policy, 3), b = run_episode(inst, *policy, 3);
        expect(a.actions == b.actions && a.total_reward == b.total_reward);
    }
    IndexTable flat({1}, 1, false);
    std::vector<ArmState> arms(6, ArmState{0, 0, false});
    expect(spi_select(flat, arms, 0, 2, {false}) == Actions{1, 1, 0, 0, 0, 0});
    // Whittle equalization at the returned subsidy.
    std::mt19937_64 rng(99);
    for (int k = 0; k < 20; ++k) {
        const auto m = testutil::random_arm(rng, 3);
        for (int s = 0; s < 3; ++s) {
            try {
                const auto w = whittle_index_at(m, s);
                expect(w.residual <= 1e-5);
            } catch (const Error& e) {
                expect(e.code() == ErrorCode::BracketFail);
            }
        }
    }
    return {failures == 0, format("%d property checks, %d failures", checks, failures)};
}

}  // namespace

int main() {
    const auto instances = corpus();
    int failed = 0;
    auto run = [&](int id, const std::function<Outcome()>& body) {
        const auto start = Clock::now();
        Outcome o;
        try {
            o = body();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - start).count();
        std::printf("criterion %d: %s  %s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    };
    run(1, [&] { return sandwich(instances); });
    run(2, [&] { return near_optimality(instances); });
    run(3, table_pattern);
    run(4, failure_ordering);
    run(5, gap_decay);
    run(6, ehrenfest);
    run(7, runtime_order);
    run(8, audit_result);
    run(9, [&] { return invariants(instances); });
    return failed == 0 ? 0 : 1;
}
