#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "sprmab/domains.hpp"
#include "sprmab/error.hpp"
#include "sprmab/whittle.hpp"

using namespace sprmab;
using testutil::arm;

namespace {

// Plain backward induction: Q_t(s,1) - Q_t(s,0) with subsidy on passive steps.
double dp_q_difference(const ArmModel& m, int horizon, int state, int t, double subsidy) {
    const int n = m.n_states();
    std::vector<double> v(n, 0.0);
    auto q = [&](int s, int a, const std::vector<double>& w) {
        double e = 0.0;
        for (int j = 0; j < n; ++j) e += m.p(s, a, j) * w[j];
        return m.r(s, a) + (a == 0 ? subsidy : 0.0) + e;
    };
    for (int step = horizon - 1; step > t; --step) {
        std::vector<double> next(n);
        for (int s = 0; s < n; ++s) next[s] = std::max(q(s, 0, v), q(s, 1, v));
        v = next;
    }
    return q(state, 1, v) - q(state, 0, v);
}

// Smallest grid subsidy at which passivity is weakly preferred.
double grid_index(const ArmModel& m, int horizon, int state, int t, double lo, double hi, double step) {
    for (double l = lo; l <= hi; l += step)
        if (dp_q_difference(m, horizon, state, t, l) <= 0.0) return l;
    return hi;
}

}  // namespace

TEST_CASE("Ehrenfest index tracks the closed form") {
    const double dt = 0.01;
    const auto m = ehrenfest_arm({2.0, 1.0, 1.0}, 4, dt);
    const auto top = whittle_index_at(m, 4);
    CHECK(closed_form_whittle(2.0, 1.0, 1.0, 4, 4) == doctest::Approx(8.0));
    CHECK(std::abs(top.index / dt - 8.0) <= 0.8);
    // Symmetric rates: the middle state is indifferent at zero subsidy.
    const auto mid = whittle_index_at(m, 2);
    CHECK(closed_form_whittle(2.0, 1.0, 1.0, 4, 2) == doctest::Approx(0.0));
    CHECK(std::abs(mid.index / dt) < 0.1);
}

TEST_CASE("identical dynamics: the index is the reward premium") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 3;
        const double c = 0.25 + 0.1 * trial;
        std::vector<std::vector<std::vector<double>>> p(n);
        std::vector<std::vector<double>> r(n);
        for (int s = 0; s < n; ++s) {
            const auto row = testutil::random_row(rng, n);
            p[s] = {row, row};
            const double base = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            r[s] = {base, base + c};
        }
        const auto m = arm(p, r);
        for (int s = 0; s < n; ++s) CHECK(whittle_index_at(m, s).index == doctest::Approx(c).epsilon(1e-5));
        const auto fin = whittle_index_finite(m, 4);
        for (int t = 0; t < 4; ++t)
            for (int s = 0; s < n; ++s) CHECK(fin.at(0, s, t) == doctest::Approx(c).epsilon(1e-5));
    }
}

TEST_CASE("the returned subsidy equalizes both actions") {
    std::mt19937_64 rng(8);
    int checked = 0;
    for (int trial = 0; trial < 30; ++trial) {
        const auto m = testutil::random_arm(rng, 3);
        for (int s = 0; s < 3; ++s) {
            WhittleComputation w;
            try {
                w = whittle_index_at(m, s);
            } catch (const Error& e) {
                REQUIRE(e.code() == ErrorCode::BracketFail);
                continue;
            }
            const auto sol = solve_average_reward(m, w.index);
            CHECK(std::abs(sol.q_difference(s)) < 1e-5);
            CHECK(w.residual < 1e-5);
            ++checked;
        }
    }
    CHECK(checked > 45);
}

TEST_CASE("average-reward solution satisfies the optimality equation") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const auto m = testutil::random_arm(rng, 4);
        const double subsidy = 0.3;
        const auto sol = solve_average_reward(m, subsidy);
        CHECK(sol.bias[0] == 0.0);
        for (int s = 0; s < 4; ++s) {
            double best = -1e300;
            for (int a = 0; a < 2; ++a) {
                double e = 0.0;
                for (int j = 0; j < 4; ++j) e += m.p(s, a, j) * sol.bias[j];
                best = std::max(best, m.r(s, a) + (a == 0 ? subsidy : 0.0) + e);
            }
            CHECK(best - sol.gain == doctest::Approx(sol.bias[s]).epsilon(1e-6));
        }
    }
}

TEST_CASE("slowly mixing chains still converge") {
    DomainSpec spec;
    spec.family = Family::Cpap;
    spec.n_types = 5;
    spec.n_states = 10;
    for (const auto& m : make_cpap(spec)) CHECK_NOTHROW(whittle_index_infinite(m, 10));
}

TEST_CASE("finite index at the last step is the immediate premium") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const auto m = testutil::random_arm(rng, 3);
        const auto table = whittle_index_finite(m, 3);
        for (int s = 0; s < 3; ++s)
            CHECK(table.at(0, s, 2) == doctest::Approx(m.r(s, 1) - m.r(s, 0)).epsilon(1e-6));
    }
}

TEST_CASE("finite index on dummy states is zero") {
    std::mt19937_64 rng(22);
    const auto m = expand_with_dummies(testutil::random_arm(rng, 2));
    const auto table = whittle_index_finite(m, 3);
    for (int t = 0; t < 3; ++t)
        for (int s = 2; s < 4; ++s) CHECK(std::abs(table.at(0, s, t)) < 1e-6);
}

TEST_CASE("finite index matches a subsidy grid search") {
    std::mt19937_64 rng(23);
    const double step = 1e-4;
    int checked = 0;
    for (int trial = 0; trial < 6; ++trial) {
        const auto m = testutil::random_arm(rng, 3);
        IndexTable table;
        try {
            table = whittle_index_finite(m, 3);
        } catch (const Error& e) {
            REQUIRE(e.code() == ErrorCode::BracketFail);
            continue;
        }
        for (int t = 0; t < 3; ++t)
            for (int s = 0; s < 3; ++s) {
                const double g = grid_index(m, 3, s, t, -4.0, 4.0, step);
                CHECK(std::abs(table.at(0, s, t) - g) <= step + 1e-6);
                CHECK(finite_q_difference(m, 3, s, t, 0.37) == doctest::Approx(dp_q_difference(m, 3, s, t, 0.37)));
                ++checked;
            }
    }
    CHECK(checked > 0);
}

TEST_CASE("Q-difference index matches backward induction on a CPAP arm") {
    DomainSpec spec;
    spec.family = Family::Cpap;
    spec.n_types = 1;
    spec.n_states = 3;
    spec.seed = 5;
    const auto m = make_cpap(spec)[0];
    const auto table = q_difference_indices(m, 3);
    for (int t = 0; t < 3; ++t)
        for (int s = 0; s < 3; ++s) CHECK(table.at(0, s, t) == doctest::Approx(dp_q_difference(m, 3, s, t, 0.0)));
}

TEST_CASE("bad horizons are rejected") {
    const auto m = arm({{{1, 0}, {0, 1}}, {{1, 0}, {0, 1}}}, {{0, 1}, {0, 2}});
    CHECK_THROWS_AS(whittle_index_finite(m, 0), Error);
    CHECK_THROWS_AS(q_difference_indices(m, 0), Error);
}
