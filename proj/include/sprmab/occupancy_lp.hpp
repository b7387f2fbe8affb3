#pragma once

#include <vector>

#include "sprmab/lp.hpp"
#include "sprmab/model.hpp"

namespace sprmab {

/// Which occupancy-measure relaxation to build.
///  MeanField: per-step budget only (the single-pull constraint is dropped).
///  SprmabLp:  adds the expected single-pull row sum_t sum_s mu_n(s,1,t) <= 1 per type.
///  Dummy:     poses the problem on the dummy-expanded state space; pulled-ness is structural.
enum class LpVariant { MeanField, SprmabLp, Dummy };

const char* to_string(LpVariant variant);

/// Column layout shared by an occupancy LP and its solution. Times are 0-based here
/// (t = 0 is the first decision epoch).
class OccupancyLayout {
public:
    OccupancyLayout() = default;
    OccupancyLayout(std::vector<ArmModel> models, int horizon);

    int n_types() const { return static_cast<int>(models_.size()); }
    int horizon() const { return horizon_; }
    int n_states(int n) const { return models_[n].n_states(); }
    const ArmModel& model(int n) const { return models_[n]; }
    const std::vector<ArmModel>& models() const { return models_; }
    int n_columns() const { return offset_.empty() ? 0 : offset_.back(); }

    int column(int n, int s, int a, int t) const {
        return offset_[n] + (t * models_[n].n_states() + s) * kActions + a;
    }

    struct Key {
        int n, s, a, t;
    };
    Key key(int column) const;

private:
    std::vector<ArmModel> models_;
    int horizon_ = 0;
    std::vector<int> offset_;
};

struct OccupancyLp {
    LpVariant variant = LpVariant::MeanField;
    OccupancyLayout layout;
    LpProblem problem;
};

/// Rows in order: activation (one per t), single-pull (SprmabLp only, one per type),
/// initial distribution at t = 0, then flow balance for t >= 1 in ascending t.
/// Objective coefficients are rho * r so the optimum is a bound on the total reward.
OccupancyLp build_occupancy_lp(const Instance& instance, LpVariant variant);

struct OccupancySolution {
    LpVariant variant = LpVariant::MeanField;
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    OccupancyLayout layout;
    std::vector<double> x;
    int iterations = 0;

    double mu(int n, int s, int a, int t) const { return x[layout.column(n, s, a, t)]; }
};

OccupancySolution solve_occupancy(const OccupancyLp& lp, const SimplexOptions& options = {});
OccupancySolution solve_occupancy(const Instance& instance, LpVariant variant,
                                  const SimplexOptions& options = {});

/// Optimal value of the dummy-expanded LP: an upper bound on the expected total
/// reward of every feasible policy.
double upper_bound(const Instance& instance);

}  // namespace sprmab
