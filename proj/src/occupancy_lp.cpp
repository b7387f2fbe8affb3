#include "sprmab/occupancy_lp.hpp"

#include <string>

#include "sprmab/error.hpp"

namespace sprmab {

const char* to_string(LpVariant variant) {
    switch (variant) {
    case LpVariant::MeanField: return "MEAN_FIELD";
    case LpVariant::SprmabLp: return "SPRMAB_LP";
    case LpVariant::Dummy: return "DUMMY";
    }
    return "UNKNOWN";
}

OccupancyLayout::OccupancyLayout(std::vector<ArmModel> models, int horizon)
    : models_(std::move(models)), horizon_(horizon) {
    offset_.push_back(0);
    for (const auto& m : models_) offset_.push_back(offset_.back() + m.n_states() * kActions * horizon_);
}

OccupancyLayout::Key OccupancyLayout::key(int column) const {
    if (column < 0 || column >= n_columns()) throw Error(ErrorCode::InvalidArgument, "column out of range");
    int n = 0;
    while (offset_[n + 1] <= column) ++n;
    int local = column - offset_[n];
    const int a = local % kActions;
    local /= kActions;
    const int s = local % models_[n].n_states();
    const int t = local / models_[n].n_states();
    return {n, s, a, t};
}

OccupancyLp build_occupancy_lp(const Instance& instance, LpVariant variant) {
    if (instance.horizon <= 0) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
    require_valid(validate_instance(instance), "instance");

    std::vector<ArmModel> models;
    std::vector<std::vector<double>> initial;
    for (int n = 0; n < instance.n_types(); ++n) {
        const auto& m = instance.types[n];
        if (variant == LpVariant::Dummy) {
            if (m.is_expanded())
                throw Error(ErrorCode::InvalidArgument, "DUMMY LP expects unexpanded arm types");
            models.push_back(expand_with_dummies(m));
            auto init = instance.initial[n];
            init.resize(2 * m.n_states(), 0.0);
            initial.push_back(std::move(init));
        } else {
            models.push_back(m);
            initial.push_back(instance.initial[n]);
        }
    }

    OccupancyLp out;
    out.variant = variant;
    out.layout = OccupancyLayout(std::move(models), instance.horizon);
    const auto& layout = out.layout;
    auto& lp = out.problem;
    const int T = instance.horizon;
    const double rho = instance.rho;

    for (int n = 0; n < layout.n_types(); ++n) {
        const auto& m = layout.model(n);
        for (int t = 0; t < T; ++t)
            for (int s = 0; s < m.n_states(); ++s)
                for (int a = 0; a < kActions; ++a)
                    lp.add_variable(rho * m.r(s, a), 0.0, kInfinity,
                                    "mu_" + std::to_string(n) + "_" + std::to_string(s) + "_" +
                                        std::to_string(a) + "_" + std::to_string(t + 1));
    }

    for (int t = 0; t < T; ++t) {
        std::vector<int> idx;
        std::vector<double> val;
        for (int n = 0; n < layout.n_types(); ++n)
            for (int s = 0; s < layout.n_states(n); ++s) {
                idx.push_back(layout.column(n, s, 1, t));
                val.push_back(1.0);
            }
        lp.add_row(std::move(idx), std::move(val), Relation::LessEqual, instance.budget,
                   "budget_" + std::to_string(t + 1));
    }

    if (variant == LpVariant::SprmabLp) {
        for (int n = 0; n < layout.n_types(); ++n) {
            std::vector<int> idx;
            std::vector<double> val;
            for (int t = 0; t < T; ++t)
                for (int s = 0; s < layout.n_states(n); ++s) {
                    idx.push_back(layout.column(n, s, 1, t));
                    val.push_back(1.0);
                }
            lp.add_row(std::move(idx), std::move(val), Relation::LessEqual, 1.0,
                       "single_pull_" + std::to_string(n));
        }
    }

    for (int n = 0; n < layout.n_types(); ++n)
        for (int s = 0; s < layout.n_states(n); ++s)
            lp.add_row({layout.column(n, s, 0, 0), layout.column(n, s, 1, 0)}, {1.0, 1.0}, Relation::Equal,
                       initial[n][s], "init_" + std::to_string(n) + "_" + std::to_string(s));

    for (int t = 1; t < T; ++t) {
        for (int n = 0; n < layout.n_types(); ++n) {
            const auto& m = layout.model(n);
            const int S = m.n_states();
            for (int next = 0; next < S; ++next) {
                std::vector<int> idx{layout.column(n, next, 0, t), layout.column(n, next, 1, t)};
                std::vector<double> val{1.0, 1.0};
                for (int s = 0; s < S; ++s)
                    for (int a = 0; a < kActions; ++a) {
                        const double p = m.p(s, a, next);
                        if (p == 0.0) continue;
                        idx.push_back(layout.column(n, s, a, t - 1));
                        val.push_back(-p);
                    }
                lp.add_row(std::move(idx), std::move(val), Relation::Equal, 0.0,
                           "flow_" + std::to_string(n) + "_" + std::to_string(next) + "_" +
                               std::to_string(t + 1));
            }
        }
    }
    return out;
}

OccupancySolution solve_occupancy(const OccupancyLp& lp, const SimplexOptions& options) {
    const LpResult result = solve_lp(lp.problem, options);
    OccupancySolution sol;
    sol.variant = lp.variant;
    sol.status = result.status;
    sol.objective = result.objective;
    sol.layout = lp.layout;
    sol.x = result.x;
    sol.iterations = result.iterations;
    for (auto& v : sol.x)
        if (v < 0.0 && v > -1e-9) v = 0.0;
    return sol;
}

OccupancySolution solve_occupancy(const Instance& instance, LpVariant variant, const SimplexOptions& options) {
    return solve_occupancy(build_occupancy_lp(instance, variant), options);
}

double upper_bound(const Instance& instance) {
    const auto sol = solve_occupancy(instance, LpVariant::Dummy);
    if (sol.status != LpStatus::Optimal)
        throw Error(ErrorCode::SolverStall, std::string("upper-bound LP ended ") + to_string(sol.status));
    return sol.objective;
}

}  // namespace sprmab
