#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "sprmab/domains.hpp"
#include "sprmab/error.hpp"
#include "sprmab/whittle.hpp"

using namespace sprmab;

namespace {

DomainSpec spec_for(Family family, int types, int states, std::uint64_t seed = 1) {
    DomainSpec spec;
    spec.family = family;
    spec.n_types = types;
    spec.n_states = states;
    spec.seed = seed;
    return spec;
}

bool no_errors(const ArmModel& m) {
    for (const auto& issue : validate_arm(m).issues)
        if (issue.severity == Severity::Error) return false;
    return true;
}

}  // namespace

TEST_CASE("CPAP structure") {
    const auto types = make_cpap(spec_for(Family::Cpap, 6, 3));
    for (const auto& m : types) {
        CHECK(no_errors(m));
        CHECK(m.p(2, 0, 1) == 1.0);
        for (int s = 0; s < 3; ++s) {
            CHECK(m.r(s, 1) == s + 1.0);
            CHECK(m.r(s, 0) == s + 1.0);
        }
    }
    auto spec = spec_for(Family::Cpap, 2, 3);
    spec.cpap_active_only_reward = true;
    for (const auto& m : make_cpap(spec)) CHECK(m.r(2, 0) == 0.0);
}

TEST_CASE("CPAP passive chain reaches the lowest level") {
    for (const auto& m : make_cpap(spec_for(Family::Cpap, 3, 10))) {
        for (int start = 0; start < 10; ++start) {
            int s = start, steps = 0;
            while (s != 0) {
                int next = -1;
                for (int j = 0; j < 10; ++j)
                    if (m.p(s, 0, j) == 1.0) next = j;
                REQUIRE(next >= 0);
                s = next;
                ++steps;
            }
            CHECK(steps <= 9);
        }
    }
}

TEST_CASE("MHMH transition structure") {
    const auto draws = mhmh_draws(spec_for(Family::Mhmh, 4, 3));
    REQUIRE(draws.size() == 4);
    CHECK(draws[0].greedy);
    CHECK(draws[1].greedy);
    CHECK_FALSE(draws[2].greedy);
    CHECK_FALSE(draws[3].greedy);
    for (const auto& q : draws) {
        const auto m = mhmh_arm(q);
        CHECK(no_errors(m));
        CHECK(m.r(kStart, 0) == 0.0);
        CHECK(m.r(kStart, 1) == 0.0);
        if (q.greedy) {
            CHECK(m.p(kStart, 1, kEngaged) == 1.0);
            CHECK(m.r(kEngaged, 1) == 1.0);
        } else {
            CHECK(m.p(kEngaged, 0, kEngaged) == q.eta_engaged);
            CHECK(m.r(kEngaged, 1) == q.reward);
        }
    }
    MhmhParams bad;
    bad.eta_start = 1.5;
    CHECK_THROWS_AS(mhmh_arm(bad), Error);
}

TEST_CASE("Ehrenfest closed form and discretization") {
    CHECK(closed_form_whittle(2, 1, 1, 4, 4) == doctest::Approx(8.0));
    for (int top : {2, 4, 10})
        CHECK(closed_form_whittle(3.0, 2.0, 2.0, top, top / 2) == doctest::Approx(0.0));
    const auto m = ehrenfest_arm({1.0, 5.0, 5.0}, 10, 0.01);
    CHECK(m.n_states() == 11);
    CHECK(no_errors(m));
    for (int s = 0; s < 11; ++s)
        for (int a = 0; a < 2; ++a) {
            double total = 0.0;
            for (int j = 0; j < 11; ++j) total += m.p(s, a, j);
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    CHECK_THROWS_AS(ehrenfest_arm({1.0, 20.0, 1.0}, 10, 0.01), Error);
}

TEST_CASE("Ehrenfest computed indices follow the closed-form ranking") {
    const double dt = 0.01;
    const auto spec = spec_for(Family::Ehrenfest, 4, 10, 4);
    const auto params = ehrenfest_draws(spec);
    const auto types = make_ehrenfest(spec);
    for (size_t k = 0; k < types.size(); ++k) {
        const auto& q = params[k];
        const auto table = whittle_index_infinite(types[k], 1);
        for (int s = 0; s <= 10; ++s) {
            const double v = closed_form_whittle(q.c, q.mu, q.lambda, 10, s);
            for (int u = 0; u < s; ++u) {
                const double vu = closed_form_whittle(q.c, q.mu, q.lambda, 10, u);
                if (vu < v) CHECK(table.at(0, u, 0) < table.at(0, s, 0));
            }
        }
        // The extreme states agree exactly for any rates.
        CHECK(table.at(0, 0, 0) / dt == doctest::Approx(closed_form_whittle(q.c, q.mu, q.lambda, 10, 0)).epsilon(1e-4));
        CHECK(table.at(0, 10, 0) / dt == doctest::Approx(closed_form_whittle(q.c, q.mu, q.lambda, 10, 10)).epsilon(1e-4));
    }
}

TEST_CASE("Ehrenfest with equal rates matches the closed form in every state") {
    const double dt = 0.01;
    for (const auto& q : {EhrenfestParams{2.0, 1.0, 1.0}, EhrenfestParams{7.5, 6.0, 6.0}, EhrenfestParams{1.3, 0.4, 0.4}}) {
        const auto table = whittle_index_infinite(ehrenfest_arm(q, 10, dt), 1);
        for (int s = 0; s <= 10; ++s) {
            const double v = closed_form_whittle(q.c, q.mu, q.lambda, 10, s);
            CHECK(std::abs(table.at(0, s, 0) / dt - v) <= 1e-3 * std::max(1.0, std::abs(v)));
        }
    }
}

TEST_CASE("random family") {
    const auto a = make_random(spec_for(Family::Random, 3, 4, 9));
    const auto b = make_random(spec_for(Family::Random, 3, 4, 9));
    const auto c = make_random(spec_for(Family::Random, 3, 4, 10));
    for (size_t k = 0; k < a.size(); ++k) {
        CHECK(no_errors(a[k]));
        for (int s = 0; s < 4; ++s) {
            CHECK(a[k].row(s, 1)[0] == b[k].row(s, 1)[0]);
            CHECK(a[k].r(s, 0) == 0.0);
            CHECK(a[k].r(s, 1) >= 0.0);
            CHECK(a[k].r(s, 1) <= s + 1.0);
        }
    }
    CHECK(a[0].row(0, 0)[0] != c[0].row(0, 0)[0]);
}

TEST_CASE("random transition rows are flat Dirichlet") {
    const int S = 5;
    const auto types = make_random(spec_for(Family::Random, 1000, S, 2));
    double sum = 0.0;
    int rows = 0;
    for (const auto& m : types)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < 2; ++a) {
                sum += m.p(s, a, 0);
                ++rows;
            }
    CHECK(rows == 10000);
    const double var = (S - 1.0) / (S * S * (S + 1.0));
    CHECK(std::abs(sum / rows - 1.0 / S) <= 3.0 * std::sqrt(var / rows));
}

TEST_CASE("instances carry the setting") {
    const auto inst = make_instance(spec_for(Family::Mhmh, 4, 3), {4, 3, 2, 5, 6});
    CHECK(inst.n_types() == 4);
    CHECK(inst.rho == 5);
    CHECK(inst.budget == 2);
    CHECK(inst.horizon == 6);
    for (const auto& d : inst.initial) CHECK(d[kStart] == 1.0);
    const auto cp = make_instance(spec_for(Family::Cpap, 3, 4), {3, 4, 1, 2, 5});
    for (const auto& d : cp.initial) CHECK(*std::max_element(d.begin(), d.end()) == 1.0);
    CHECK(to_string(Setting{20, 5, 10, 10, 10}) == "(20,5,10,10,10)");
    CHECK(family_from_string("ehrenfest") == Family::Ehrenfest);
    CHECK_THROWS_AS(family_from_string("bandit"), Error);
}
