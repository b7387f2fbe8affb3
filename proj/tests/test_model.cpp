#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "sprmab/error.hpp"
#include "sprmab/model.hpp"
#include "sprmab/model_io.hpp"

using namespace sprmab;
using testutil::arm;

namespace {

bool has_error_containing(const ValidationReport& report, const std::string& needle) {
    for (const auto& issue : report.issues)
        if (issue.severity == Severity::Error && issue.message.find(needle) != std::string::npos) return true;
    return false;
}

// Two-state toy arm: pulling state 0 moves to state 1 with probability 0.8.
ArmModel toy() {
    return arm({{{0.9, 0.1}, {0.2, 0.8}}, {{0.3, 0.7}, {0.5, 0.5}}}, {{0.0, 1.0}, {0.5, 2.0}}, "toy");
}

}  // namespace

TEST_CASE("valid two-state arm passes validation") {
    const auto m = arm({{{0.5, 0.5}, {1.0, 0.0}}, {{0.5, 0.5}, {1.0, 0.0}}}, {{0, 1}, {0, 1}});
    const auto report = validate_arm(m);
    CHECK(report.ok);
    CHECK(report.error_count() == 0);
}

TEST_CASE("row summing to 0.9 is an error") {
    const auto m = arm({{{0.5, 0.4}, {1.0, 0.0}}, {{0.5, 0.5}, {1.0, 0.0}}}, {{0, 1}, {0, 1}});
    const auto report = validate_arm(m);
    CHECK_FALSE(report.ok);
    CHECK(has_error_containing(report, "row sum 0.9"));
}

TEST_CASE("entries outside [0,1] are errors") {
    const auto m = arm({{{1.2, -0.2}, {1.0, 0.0}}, {{0.5, 0.5}, {1.0, 0.0}}}, {{0, 1}, {0, 1}});
    CHECK_FALSE(validate_arm(m).ok);
}

TEST_CASE("report ok iff no error-severity issue") {
    // State 1 is never entered from state 0: a warning only.
    const auto m = arm({{{1.0, 0.0}, {1.0, 0.0}}, {{1.0, 0.0}, {0.0, 1.0}}}, {{0, 1}, {0, 1}});
    const auto report = validate_arm(m);
    CHECK(report.ok);
    CHECK(report.error_count() == 0);
    CHECK_FALSE(report.issues.empty());
}

TEST_CASE("expanded model with broken dummy reward tie is rejected") {
    const auto e = expand_with_dummies(toy());
    auto r = e.rewards();
    r[2 * 2 + 1] += 1.0;  // r(s0d, 1)
    const auto bad = e.with_rewards(r);
    const auto report = validate_arm(bad);
    CHECK_FALSE(report.ok);
    CHECK(has_error_containing(report, "dummy reward tie"));
}

TEST_CASE("expansion of the two-state toy arm") {
    const auto m = toy();
    const auto e = expand_with_dummies(m);
    REQUIRE(e.n_states() == 4);
    CHECK(e.is_expanded());
    CHECK(e.original_states() == 2);
    CHECK(e.dummy_of(2) == 0);
    CHECK(e.dummy_of(3) == 1);
    CHECK_FALSE(e.dummy_of(1).has_value());
    for (int s = 0; s < 2; ++s) {
        for (int j = 0; j < 2; ++j) {
            // Passive stays on normal states, active lands on dummy copies.
            CHECK(e.p(s, 0, j) == m.p(s, 0, j));
            CHECK(e.p(s, 0, j + 2) == 0.0);
            CHECK(e.p(s, 1, j) == 0.0);
            CHECK(e.p(s, 1, j + 2) == m.p(s, 1, j));
            // Dummy rows are the passive rows, moved onto the dummy block, for both actions.
            for (int a = 0; a < 2; ++a) {
                CHECK(e.p(s + 2, a, j + 2) == m.p(s, 0, j));
                CHECK(e.p(s + 2, a, j) == 0.0);
            }
        }
        CHECK(e.r(s, 0) == m.r(s, 0));
        CHECK(e.r(s, 1) == m.r(s, 1));
        CHECK(e.r(s + 2, 0) == m.r(s, 0));
        CHECK(e.r(s + 2, 1) == m.r(s, 0));
    }
    CHECK(validate_arm(e).ok);
}

TEST_CASE("action-indifferent input gives a dummy block equal to the passive dynamics") {
    const auto m = arm({{{0.3, 0.7}, {0.3, 0.7}}, {{0.6, 0.4}, {0.6, 0.4}}}, {{1, 1}, {2, 2}});
    const auto e = expand_with_dummies(m);
    for (int s = 0; s < 2; ++s)
        for (int j = 0; j < 2; ++j) {
            CHECK(e.p(s + 2, 0, j + 2) == e.p(s, 0, j));
            CHECK(e.p(s + 2, 1, j + 2) == e.p(s, 0, j));
        }
}

TEST_CASE("three-state adherence arm: dummy active reward equals passive reward") {
    const auto m = arm({{{1, 0, 0}, {0.4, 0.6, 0}}, {{1, 0, 0}, {0.4, 0, 0.6}}, {{0, 1, 0}, {0, 0.4, 0.6}}},
                       {{1, 1}, {2, 2}, {3, 3}});
    const auto e = expand_with_dummies(m);
    REQUIRE(e.n_states() == 6);
    for (int s = 0; s < 3; ++s) CHECK(e.r(s + 3, 1) == m.r(s, 0));
}

TEST_CASE("expanding twice is rejected") {
    const auto e = expand_with_dummies(toy());
    CHECK_THROWS_AS(expand_with_dummies(e), Error);
}

TEST_CASE("expansion properties on random arms") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + trial % 4;
        const auto m = testutil::random_arm(rng, n);
        const auto e = expand_with_dummies(m);
        CHECK(validate_arm(e).error_count() == 0);
        // Restricting to normal states under action 0 reproduces the original.
        for (int s = 0; s < n; ++s) {
            CHECK(e.r(s, 0) == m.r(s, 0));
            for (int j = 0; j < n; ++j) CHECK(e.p(s, 0, j) == m.p(s, 0, j));
        }
        // Dummy mass never decreases along any action sequence.
        std::vector<double> dist(2 * n, 0.0);
        dist[0] = 1.0;
        double dummy_mass = 0.0;
        for (int t = 0; t < 6; ++t) {
            const int a = (trial + t) % 2;
            std::vector<double> next(2 * n, 0.0);
            for (int s = 0; s < 2 * n; ++s)
                for (int j = 0; j < 2 * n; ++j) next[j] += dist[s] * e.p(s, a, j);
            dist = next;
            double mass = 0.0;
            for (int s = n; s < 2 * n; ++s) mass += dist[s];
            CHECK(mass >= dummy_mass - 1e-12);
            dummy_mass = mass;
        }
    }
}

TEST_CASE("replicate with deterministic initial states") {
    Instance inst;
    inst.types = {toy(), toy()};
    inst.rho = 3;
    inst.budget = 1;
    inst.horizon = 2;
    inst.initial = {{0.0, 1.0}, {1.0, 0.0}};
    const auto pop = replicate(inst, 5);
    REQUIRE(pop.size() == 6);
    for (int i = 0; i < 6; ++i) {
        CHECK(pop[i].type == i / 3);
        CHECK(pop[i].state == (i < 3 ? 1 : 0));
        CHECK_FALSE(pop[i].pulled);
    }
}

TEST_CASE("replicate is deterministic and concentrates") {
    Instance inst;
    inst.types = {toy()};
    inst.rho = 1000;
    inst.budget = 1;
    inst.horizon = 1;
    inst.initial = {{0.5, 0.5}};
    const auto a = replicate(inst, 42);
    const auto b = replicate(inst, 42);
    int zeros = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].state == b[i].state);
        zeros += a[i].state == 0;
    }
    const double sigma = std::sqrt(1000 * 0.25);
    CHECK(std::abs(zeros - 500.0) <= 3 * sigma);
}

TEST_CASE("instance validation") {
    Instance inst;
    inst.types = {toy()};
    inst.rho = 2;
    inst.budget = 5;
    inst.horizon = 3;
    inst.initial = {{0.25, 0.75}};
    auto report = validate_instance(inst);
    CHECK(report.ok);
    CHECK_FALSE(report.issues.empty());  // budget never binds: flagged, allowed

    inst.initial = {{0.25, 0.7}};
    CHECK_FALSE(validate_instance(inst).ok);

    inst.initial = {{0.25, 0.75}};
    inst.horizon = 0;
    CHECK_FALSE(validate_instance(inst).ok);
}

TEST_CASE("renormalization within tolerance, rejection beyond") {
    const auto close = arm({{{0.5 + 4e-10, 0.5}, {1, 0}}, {{0.5, 0.5}, {1, 0}}}, {{0, 1}, {0, 1}});
    const auto fixed = normalize_rows(close);
    double sum = fixed.p(0, 0, 0) + fixed.p(0, 0, 1);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
    const auto far = arm({{{0.5 + 1e-6, 0.5}, {1, 0}}, {{0.5, 0.5}, {1, 0}}}, {{0, 1}, {0, 1}});
    CHECK_THROWS_AS(normalize_rows(far), Error);
}

TEST_CASE("sample_index respects cumulative boundaries") {
    const std::vector<double> p{0.2, 0.0, 0.8};
    CHECK(sample_index(p, 0.0) == 0);
    CHECK(sample_index(p, 0.19999) == 0);
    CHECK(sample_index(p, 0.2) == 2);
    CHECK(sample_index(p, 0.99999) == 2);
}

TEST_CASE("instance JSON round trip") {
    Instance inst;
    inst.types = {toy(), arm({{{1.0, 0.0}, {0.0, 1.0}}, {{0.0, 1.0}, {0.0, 1.0}}}, {{0.1, 0.2}, {0.3, 0.4}})};
    inst.rho = 2;
    inst.budget = 1;
    inst.horizon = 4;
    inst.initial = {{0.5, 0.5}, {1.0, 0.0}};
    const auto back = instance_from_json(to_json(inst));
    REQUIRE(back.n_types() == 2);
    CHECK(back.rho == 2);
    CHECK(back.budget == 1);
    CHECK(back.horizon == 4);
    for (int n = 0; n < 2; ++n) {
        CHECK(back.types[n].transitions() == inst.types[n].transitions());
        CHECK(back.types[n].rewards() == inst.types[n].rewards());
        CHECK(back.initial[n] == inst.initial[n]);
    }
}

TEST_CASE("loader renormalizes rows within 1e-9 and rejects the rest") {
    auto doc = to_json(Instance{{toy()}, 1, 1, 1, {{1.0, 0.0}}});
    doc["types"][0]["transitions"][0][0] = nlohmann::json::array({0.9 + 5e-10, 0.1});
    CHECK_NOTHROW(instance_from_json(doc));
    doc["types"][0]["transitions"][0][0] = nlohmann::json::array({0.9 + 1e-6, 0.1});
    CHECK_THROWS_AS(instance_from_json(doc), Error);
}
