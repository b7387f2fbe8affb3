#pragma once

#include <random>
#include <vector>

#include "sprmab/model.hpp"

namespace testutil {

using sprmab::ArmModel;
using sprmab::Instance;

// Arm from nested tables P[s][a][s'] and r[s][a].
inline ArmModel arm(const std::vector<std::vector<std::vector<double>>>& p, const std::vector<std::vector<double>>& r,
                    const std::string& label = {}) {
    const int n = static_cast<int>(p.size());
    std::vector<double> fp, fr;
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < 2; ++a) {
            fp.insert(fp.end(), p[s][a].begin(), p[s][a].end());
            fr.push_back(r[s][a]);
        }
    return ArmModel(n, fp, fr, label);
}

inline std::vector<double> random_row(std::mt19937_64& rng, int n) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> row(n);
    double total = 0.0;
    for (auto& v : row) total += (v = e(rng));
    for (auto& v : row) v /= total;
    return row;
}

inline ArmModel random_arm(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<std::vector<double>>> p(n, std::vector<std::vector<double>>(2));
    std::vector<std::vector<double>> r(n, std::vector<double>(2));
    for (int s = 0; s < n; ++s) {
        p[s][0] = random_row(rng, n);
        p[s][1] = random_row(rng, n);
        r[s][0] = u(rng) < 0.5 ? 0.0 : u(rng);
        r[s][1] = u(rng) * 2.0;
    }
    return arm(p, r);
}

// Random capped instance: rho * N <= 4, |S| <= 3, T <= 4.
inline Instance random_small_instance(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick_states(2, 3), pick_t(1, 4);
    Instance inst;
    const int layout = std::uniform_int_distribution<int>(0, 5)(rng);
    const int n_types[] = {1, 2, 2, 4, 3, 1};
    const int rhos[] = {2, 1, 2, 1, 1, 4};
    inst.rho = rhos[layout];
    const int n = n_types[layout];
    for (int k = 0; k < n; ++k) {
        const int s = pick_states(rng);
        inst.types.push_back(random_arm(rng, s));
        inst.initial.push_back(random_row(rng, s));
    }
    inst.budget = std::uniform_int_distribution<int>(1, n)(rng);
    if (std::uniform_int_distribution<int>(0, 9)(rng) == 0) inst.budget = 0;
    inst.horizon = pick_t(rng);
    return inst;
}

}  // namespace testutil
