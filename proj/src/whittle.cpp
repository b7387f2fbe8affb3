#include "sprmab/whittle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "sprmab/error.hpp"

namespace sprmab {

namespace {

// Transition rows stored sparsely; row (s, a) lives at index 2 * s + a.
struct SparseKernel {
    std::vector<int> start;
    std::vector<int> next;
    std::vector<double> prob;

    explicit SparseKernel(const ArmModel& m) {
        start.push_back(0);
        for (int s = 0; s < m.n_states(); ++s)
            for (int a = 0; a < kActions; ++a) {
                for (int j = 0; j < m.n_states(); ++j) {
                    const double p = m.p(s, a, j);
                    if (p == 0.0) continue;
                    next.push_back(j);
                    prob.push_back(p);
                }
                start.push_back(static_cast<int>(next.size()));
            }
    }

    double expect(int s, int a, const std::vector<double>& v) const {
        double acc = 0.0;
        for (int k = start[2 * s + a]; k < start[2 * s + a + 1]; ++k) acc += prob[k] * v[next[k]];
        return acc;
    }
};

double reward_span(const ArmModel& m) {
    const auto& r = m.rewards();
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    return *hi - *lo;
}

struct BisectionResult {
    double lambda;
    double lo, hi;
    int bisections;
    int expansions;
};

// f is the active-minus-passive advantage as a function of the passive subsidy; it must be
// non-increasing. Returns its zero crossing.
BisectionResult bisect_subsidy(const std::function<double(double)>& f, double half_width, const WhittleOptions& opt) {
    constexpr double kMonotoneSlack = 1e-7;
    double lo = -half_width, hi = half_width;
    double f_lo = f(lo), f_hi = f(hi);
    int expansions = 0;
    auto fail = [](const std::string& why) { throw Error(ErrorCode::BracketFail, why); };
    if (f_lo + kMonotoneSlack < f_hi) fail("advantage increases with the subsidy");
    while (f_lo < 0.0 || f_hi > 0.0) {
        if (++expansions > opt.max_expansions) {
            std::ostringstream os;
            os << "no sign change in [" << lo << ", " << hi << "]";
            fail(os.str());
        }
        const double width = hi - lo;
        if (f_lo < 0.0) {
            hi = lo;
            f_hi = f_lo;
            lo -= width;
            f_lo = f(lo);
        } else {
            lo = hi;
            f_lo = f_hi;
            hi += width;
            f_hi = f(hi);
        }
        if (f_lo + kMonotoneSlack < f_hi) fail("advantage increases with the subsidy");
    }
    int it = 0;
    double mid = 0.5 * (lo + hi);
    while (it < opt.max_bisections) {
        mid = 0.5 * (lo + hi);
        if (hi - lo <= opt.tol * std::max(1.0, std::abs(mid))) break;
        ++it;
        const double fm = f(mid);
        if (fm > f_lo + kMonotoneSlack || fm < f_hi - kMonotoneSlack) fail("advantage is not monotone in the subsidy");
        if (fm == 0.0) {
            lo = hi = mid;
            break;
        }
        if (fm > 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    return {0.5 * (lo + hi), lo, hi, it, expansions};
}

// Gain and bias of a fixed stationary policy on the tau-transformed chain, with bias
// pinned to 0 at state 0. Returns false when the system is singular (multichain policy).
bool evaluate_policy(const ArmModel& m, double subsidy, double tau, const std::vector<int>& policy,
                     std::vector<double>& h, double& gain) {
    const int n = m.n_states();
    // Unknowns: gain, h[1..n-1]. Row s: gain + h[s] - sum_j P_tau(s, j) h[j] = r(s).
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (int s = 0; s < n; ++s) {
        const int act = policy[s];
        a[s][0] = 1.0;
        for (int j = 1; j < n; ++j) a[s][j] = -tau * m.p(s, act, j);
        if (s > 0) a[s][s] += tau;
        a[s][n] = m.r(s, act) + (act == 0 ? subsidy : 0.0);
    }
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (std::abs(a[piv][c]) < 1e-12) return false;
        std::swap(a[piv], a[c]);
        for (int r = 0; r < n; ++r) {
            if (r == c || a[r][c] == 0.0) continue;
            const double f = a[r][c] / a[c][c];
            for (int k = c; k <= n; ++k) a[r][k] -= f * a[c][k];
        }
    }
    gain = a[0][n] / a[0][0];
    h.assign(n, 0.0);
    for (int s = 1; s < n; ++s) h[s] = a[s][n] / a[s][s];
    return true;
}

}  // namespace

AverageRewardSolution solve_average_reward(const ArmModel& model, double subsidy, const WhittleOptions& options,
                                           const std::vector<double>* warm_start) {
    const SparseKernel kernel(model);
    const int n = model.n_states();
    const double tau = options.aperiodicity_tau;
    if (!(tau > 0.0 && tau <= 1.0)) throw Error(ErrorCode::InvalidArgument, "aperiodicity tau must be in (0, 1]");

    constexpr int kEvaluationPeriod = 50;
    AverageRewardSolution sol;
    // The transformed chain's bias is the original one divided by tau.
    std::vector<double> h(n, 0.0);
    if (warm_start && static_cast<int>(warm_start->size()) == n)
        for (int s = 0; s < n; ++s) h[s] = (*warm_start)[s] / tau;
    std::vector<double> w(n);
    auto q_of = [&](int s, int a, const std::vector<double>& v) {
        return model.r(s, a) + (a == 0 ? subsidy : 0.0) + tau * kernel.expect(s, a, v) + (1.0 - tau) * v[s];
    };
    for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
        double hi = -kInfinity, lo = kInfinity;
        for (int s = 0; s < n; ++s) {
            w[s] = std::max(q_of(s, 0, h), q_of(s, 1, h));
            const double d = w[s] - h[s];
            hi = std::max(hi, d);
            lo = std::min(lo, d);
        }
        const double ref = w[0];
        for (int s = 0; s < n; ++s) h[s] = w[s] - ref;
        // Slowly mixing chains: jump to the exact bias of the current greedy policy. The
        // jump is kept only if that bias passes the same span test on the next sweep.
        if (hi - lo >= options.span_tol && sweep % kEvaluationPeriod == 0) {
            // A few rounds of policy iteration starting from the greedy policy.
            std::vector<int> greedy(n);
            for (int s = 0; s < n; ++s) greedy[s] = q_of(s, 1, h) > q_of(s, 0, h) ? 1 : 0;
            std::vector<double> candidate;
            double g = 0.0;
            bool solved = false;
            for (int round = 0; round < 2 * n + 2; ++round) {
                if (!(solved = evaluate_policy(model, subsidy, tau, greedy, candidate, g))) break;
                bool stable = true;
                for (int s = 0; s < n; ++s) {
                    const double adv = q_of(s, 1, candidate) - q_of(s, 0, candidate);
                    const int better = adv > 1e-12 ? 1 : adv < -1e-12 ? 0 : greedy[s];
                    if (better != greedy[s]) {
                        greedy[s] = better;
                        stable = false;
                    }
                }
                if (stable) break;
            }
            if (solved) {
                double c_hi = -kInfinity, c_lo = kInfinity;
                for (int s = 0; s < n; ++s) {
                    const double d = std::max(q_of(s, 0, candidate), q_of(s, 1, candidate)) - candidate[s];
                    c_hi = std::max(c_hi, d);
                    c_lo = std::min(c_lo, d);
                }
                if (c_hi - c_lo < hi - lo) {
                    h = candidate;
                    hi = c_hi;
                    lo = c_lo;
                }
            }
        }
        if (hi - lo < options.span_tol) {
            sol.gain = 0.5 * (hi + lo);
            sol.sweeps = sweep;
            sol.bias.resize(n);
            for (int s = 0; s < n; ++s) sol.bias[s] = tau * h[s];
            sol.q.resize(2 * n);
            for (int s = 0; s < n; ++s)
                for (int a = 0; a < kActions; ++a) sol.q[2 * s + a] = q_of(s, a, h);
            return sol;
        }
    }
    std::ostringstream os;
    os << "relative value iteration did not reach span " << options.span_tol << " in " << options.max_sweeps
       << " sweeps (subsidy " << subsidy << ")";
    throw Error(ErrorCode::NonConvergent, os.str());
}

WhittleComputation whittle_index_at(const ArmModel& model, int state, const WhittleOptions& options) {
    if (state < 0 || state >= model.n_states()) throw Error(ErrorCode::InvalidArgument, "state out of range");
    std::vector<double> warm(model.n_states(), 0.0);
    int sweeps = 0;
    auto f = [&](double lambda) {
        const auto sol = solve_average_reward(model, lambda, options, &warm);
        warm = sol.bias;
        sweeps += sol.sweeps;
        return sol.q_difference(state);
    };
    const double span = reward_span(model);
    const auto b = bisect_subsidy(f, span > 0.0 ? 2.0 * span : 1.0, options);
    const auto at = solve_average_reward(model, b.lambda, options, &warm);
    WhittleComputation out;
    out.index = b.lambda;
    out.bracket_lo = b.lo;
    out.bracket_hi = b.hi;
    out.bisections = b.bisections;
    out.expansions = b.expansions;
    out.residual = std::abs(at.q_difference(state));
    out.gain = at.gain;
    out.sweeps = sweeps + at.sweeps;
    return out;
}

IndexTable whittle_index_infinite(const ArmModel& model, int horizon, const WhittleOptions& options) {
    IndexTable table({model.n_states()}, horizon, false);
    for (int s = 0; s < model.n_states(); ++s) table.set(0, s, 0, whittle_index_at(model, s, options).index);
    return table;
}

double finite_q_difference(const ArmModel& model, int horizon, int state, int t, double subsidy) {
    const SparseKernel kernel(model);
    const int n = model.n_states();
    std::vector<double> v(n, 0.0), next(n);
    for (int step = horizon - 1; step > t; --step) {
        for (int s = 0; s < n; ++s)
            next[s] = std::max(model.r(s, 0) + subsidy + kernel.expect(s, 0, v), model.r(s, 1) + kernel.expect(s, 1, v));
        v.swap(next);
    }
    return (model.r(state, 1) + kernel.expect(state, 1, v)) - (model.r(state, 0) + subsidy + kernel.expect(state, 0, v));
}

IndexTable whittle_index_finite(const ArmModel& model, int horizon, const WhittleOptions& options) {
    if (horizon <= 0) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
    const SparseKernel kernel(model);
    const int n = model.n_states();
    const double span = reward_span(model);
    IndexTable table({n}, horizon, true);
    std::vector<double> v(n), next(n);
    for (int t = 0; t < horizon; ++t) {
        for (int s = 0; s < n; ++s) {
            auto f = [&](double lambda) {
                std::fill(v.begin(), v.end(), 0.0);
                for (int step = horizon - 1; step > t; --step) {
                    for (int x = 0; x < n; ++x)
                        next[x] = std::max(model.r(x, 0) + lambda + kernel.expect(x, 0, v),
                                           model.r(x, 1) + kernel.expect(x, 1, v));
                    v.swap(next);
                }
                return (model.r(s, 1) + kernel.expect(s, 1, v)) - (model.r(s, 0) + lambda + kernel.expect(s, 0, v));
            };
            table.set(0, s, t, bisect_subsidy(f, span > 0.0 ? 2.0 * span : 1.0, options).lambda);
        }
    }
    return table;
}

IndexTable q_difference_indices(const ArmModel& model, int horizon) {
    if (horizon <= 0) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
    const SparseKernel kernel(model);
    const int n = model.n_states();
    IndexTable table({n}, horizon, true);
    std::vector<double> v(n, 0.0), next(n);
    for (int t = horizon - 1; t >= 0; --t) {
        for (int s = 0; s < n; ++s) {
            const double q0 = model.r(s, 0) + kernel.expect(s, 0, v);
            const double q1 = model.r(s, 1) + kernel.expect(s, 1, v);
            table.set(0, s, t, q1 - q0);
            next[s] = std::max(q0, q1);
        }
        v.swap(next);
    }
    return table;
}

}  // namespace sprmab
