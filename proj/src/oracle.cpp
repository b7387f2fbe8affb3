#include "sprmab/oracle.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <sstream>

#include "sprmab/error.hpp"

namespace sprmab {

namespace {

// Joint configuration of all arms in the dummy-expanded space, indexed mixed-radix.
struct JointSpace {
    int arms = 0;
    std::vector<int> type;
    std::vector<int> radix;
    std::vector<std::int64_t> stride;
    std::int64_t size = 1;
    std::vector<ArmModel> models;  // expanded, per type

    JointSpace(const Instance& instance, const OracleLimits& limits) {
        require_valid(validate_instance(instance), "instance");
        arms = instance.n_arms();
        std::int64_t count = 1;
        for (const auto& m : instance.types) models.push_back(expand_with_dummies(m));
        for (int n = 0; n < instance.n_types(); ++n)
            for (int k = 0; k < instance.rho; ++k) {
                type.push_back(n);
                radix.push_back(models[n].n_states());
                stride.push_back(count);
                count *= models[n].n_states();
            }
        size = count;
        int max_states = 0;
        for (const auto& m : instance.types) max_states = std::max(max_states, m.n_states());
        const std::int64_t table = size * instance.horizon;
        if (arms > limits.max_arms || max_states > limits.max_states || instance.horizon > limits.max_horizon ||
            table > limits.max_table) {
            std::ostringstream os;
            os << "joint DP over " << arms << " arms, " << max_states << " states, horizon " << instance.horizon
               << " needs " << size << " joint states (" << table << " table entries)";
            throw Error(ErrorCode::CapExceeded, os.str());
        }
    }

    int digit(std::int64_t x, int i) const { return static_cast<int>((x / stride[i]) % radix[i]); }
    bool is_dummy(std::int64_t x, int i) const { return models[type[i]].is_dummy(digit(x, i)); }

    std::vector<double> initial(const Instance& instance) const {
        std::vector<double> dist(size, 0.0);
        for (std::int64_t x = 0; x < size; ++x) {
            double p = 1.0;
            for (int i = 0; i < arms && p > 0.0; ++i) {
                const int s = digit(x, i);
                const auto& init = instance.initial[type[i]];
                p *= s < static_cast<int>(init.size()) ? init[s] : 0.0;
            }
            dist[x] = p;
        }
        return dist;
    }
};

// Action masks ordered by number of pulls, then lexicographically.
std::vector<std::uint32_t> action_masks(int arms, int budget) {
    std::vector<std::uint32_t> masks;
    for (std::uint32_t m = 0; m < (1u << arms); ++m)
        if (std::popcount(m) <= budget) masks.push_back(m);
    std::stable_sort(masks.begin(), masks.end(),
                     [](std::uint32_t a, std::uint32_t b) { return std::popcount(a) < std::popcount(b); });
    return masks;
}

}  // namespace

double exact_optimum(const Instance& instance, const OracleLimits& limits) {
    const JointSpace js(instance, limits);
    const auto masks = action_masks(js.arms, instance.population_budget());
    std::vector<double> v_next(js.size, 0.0), best(js.size), w(js.size), tmp(js.size);

    for (int t = instance.horizon - 1; t >= 0; --t) {
        std::fill(best.begin(), best.end(), -kInfinity);
        for (const std::uint32_t mask : masks) {
            // Expected continuation, contracting one arm's kernel at a time.
            w = v_next;
            for (int i = 0; i < js.arms; ++i) {
                const auto& m = js.models[js.type[i]];
                const int a = (mask >> i) & 1u;
                for (std::int64_t x = 0; x < js.size; ++x) {
                    const int s = js.digit(x, i);
                    const std::int64_t base = x - s * js.stride[i];
                    double acc = 0.0;
                    for (int y = 0; y < js.radix[i]; ++y) {
                        const double p = m.p(s, a, y);
                        if (p != 0.0) acc += p * w[base + y * js.stride[i]];
                    }
                    tmp[x] = acc;
                }
                w.swap(tmp);
            }
            for (std::int64_t x = 0; x < js.size; ++x) {
                double q = w[x];
                bool feasible = true;
                for (int i = 0; i < js.arms; ++i) {
                    const int a = (mask >> i) & 1u;
                    if (a == 1 && js.is_dummy(x, i)) {
                        feasible = false;
                        break;
                    }
                    q += js.models[js.type[i]].r(js.digit(x, i), a);
                }
                // Strict improvement only: ties keep the earlier mask with fewer pulls.
                if (feasible && q > best[x] + 1e-12) best[x] = q;
            }
        }
        v_next.swap(best);
    }
    const auto init = js.initial(instance);
    double value = 0.0;
    for (std::int64_t x = 0; x < js.size; ++x) value += init[x] * v_next[x];
    return value;
}

double exact_policy_value(const Instance& instance, const Policy& policy, const OracleLimits& limits) {
    const JointSpace js(instance, limits);
    std::vector<double> dist = js.initial(instance), next(js.size);
    double value = 0.0;
    Population population(js.arms);

    for (int t = 0; t < instance.horizon; ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::int64_t x = 0; x < js.size; ++x) {
            const double px = dist[x];
            if (px == 0.0) continue;
            for (int i = 0; i < js.arms; ++i) {
                const int s = js.digit(x, i);
                const int n_orig = instance.types[js.type[i]].n_states();
                population[i] = {js.type[i], s % n_orig, s >= n_orig};
            }
            for (const auto& [actions, w] : policy.action_distribution(population, t)) {
                if (w == 0.0) continue;
                int pulls = 0;
                for (int i = 0; i < js.arms; ++i) {
                    if (actions[i] == 1 && population[i].pulled)
                        throw Error(ErrorCode::InfeasibleAction, "policy re-pulls an arm");
                    pulls += actions[i];
                }
                if (pulls > instance.population_budget())
                    throw Error(ErrorCode::InfeasibleAction, "policy exceeds the budget");
                const double p = px * w;
                for (int i = 0; i < js.arms; ++i) value += p * js.models[js.type[i]].r(js.digit(x, i), actions[i]);

                // Spread p over the product of per-arm next-state distributions.
                std::vector<std::int64_t> states{0};
                std::vector<double> probs{p};
                for (int i = 0; i < js.arms; ++i) {
                    const auto& m = js.models[js.type[i]];
                    const int s = js.digit(x, i);
                    std::vector<std::int64_t> ns;
                    std::vector<double> np;
                    for (size_t k = 0; k < states.size(); ++k)
                        for (int y = 0; y < js.radix[i]; ++y) {
                            const double q = m.p(s, actions[i], y);
                            if (q == 0.0) continue;
                            ns.push_back(states[k] + y * js.stride[i]);
                            np.push_back(probs[k] * q);
                        }
                    states.swap(ns);
                    probs.swap(np);
                }
                for (size_t k = 0; k < states.size(); ++k) next[states[k]] += probs[k];
            }
        }
        dist.swap(next);
    }
    return value;
}

}  // namespace sprmab
