#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sprmab/model.hpp"
#include "sprmab/occupancy_lp.hpp"

namespace sprmab {

/// chi_n(s, t): probability of the active action implied by an optimal occupancy measure.
class ActivationProbabilities {
public:
    ActivationProbabilities() = default;
    ActivationProbabilities(std::vector<int> n_states, int horizon);

    int n_types() const { return static_cast<int>(n_states_.size()); }
    int horizon() const { return horizon_; }
    int n_states(int n) const { return n_states_[n]; }
    double at(int n, int s, int t) const { return values_[n][static_cast<size_t>(t) * n_states_[n] + s]; }
    void set(int n, int s, int t, double v) { values_[n][static_cast<size_t>(t) * n_states_[n] + s] = v; }

private:
    std::vector<int> n_states_;
    int horizon_ = 0;
    std::vector<std::vector<double>> values_;
};

/// Denominators below this are treated as "state never occupied" and give chi = 0.
inline constexpr double kChiDenominatorTol = 1e-12;

ActivationProbabilities compute_chi(const OccupancySolution& solution);

/// Index values per (type, state, time). Stationary tables hold one value per state
/// and answer the same value for every t.
class IndexTable {
public:
    IndexTable() = default;
    IndexTable(std::vector<int> n_states, int horizon, bool time_dependent);

    int n_types() const { return static_cast<int>(n_states_.size()); }
    int horizon() const { return horizon_; }
    int n_states(int n) const { return n_states_[n]; }
    bool time_dependent() const { return time_dependent_; }

    double at(int n, int s, int t) const { return values_[n][slot(n, s, t)]; }
    void set(int n, int s, int t, double v) { values_[n][slot(n, s, t)] = v; }

    /// Concatenates single-type tables (all stationary or all time-dependent) in order.
    static IndexTable stack(const std::vector<IndexTable>& parts);

private:
    size_t slot(int n, int s, int t) const {
        return time_dependent_ ? static_cast<size_t>(t) * n_states_[n] + s : static_cast<size_t>(s);
    }

    std::vector<int> n_states_;
    int horizon_ = 0;
    bool time_dependent_ = false;
    std::vector<std::vector<double>> values_;
};

/// I_n(s, t) = chi_n(s, t) * r_n(s, 1) over the expanded state space.
IndexTable spi_indices(const ActivationProbabilities& chi, const std::vector<ArmModel>& expanded_types);

/// One arm as seen by a selector. In the expanded view, `state` is an S' index and
/// `dummy` marks arms that were already pulled; in the original view `dummy` is false.
struct ArmState {
    int type = 0;
    int state = 0;
    bool dummy = false;
};

using Actions = std::vector<int>;

struct SpiSelectOptions {
    /// Stop the walk at the first index <= 0 instead of letting such arms use budget.
    bool zero_cutoff = true;
};

/// Walks arms by descending index (ties: lower arm id). Each visited arm uses one unit
/// of budget; only arms outside dummy states are actually pulled.
Actions spi_select(const IndexTable& indices, std::span<const ArmState> arms, int t, int budget,
                   const SpiSelectOptions& options = {});

/// Thresholds separating the three priority classes of the fluid policy.
inline constexpr double kPriorityTol = 1e-9;

/// High-priority states (no passive mass) first, then medium states by descending chi.
/// States with no active mass are never pulled.
Actions mean_field_select(const OccupancySolution& solution, std::span<const ArmState> arms, int t, int budget,
                          std::span<const char> pulled);

/// Up to `budget` eligible arms with the largest indices (ties: lower arm id).
/// Arms already pulled or sitting in dummy states are not eligible.
Actions greedy_budget_select(const IndexTable& indices, std::span<const ArmState> arms, int t, int budget,
                             std::span<const char> pulled);

/// Uniform subset of min(budget, #eligible) arms drawn from the counter stream `stream`.
Actions random_select(std::span<const ArmState> arms, int budget, std::span<const char> pulled,
                      std::uint64_t stream);

}  // namespace sprmab
