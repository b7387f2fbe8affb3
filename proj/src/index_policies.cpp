#include "sprmab/index_policies.hpp"

#include <algorithm>
#include <numeric>

#include "sprmab/error.hpp"
#include "sprmab/rng.hpp"

namespace sprmab {

ActivationProbabilities::ActivationProbabilities(std::vector<int> n_states, int horizon)
    : n_states_(std::move(n_states)), horizon_(horizon) {
    for (int s : n_states_) values_.emplace_back(static_cast<size_t>(s) * horizon_, 0.0);
}

ActivationProbabilities compute_chi(const OccupancySolution& solution) {
    if (solution.status != LpStatus::Optimal)
        throw Error(ErrorCode::InvalidArgument, "chi needs an optimal occupancy measure");
    const auto& layout = solution.layout;
    std::vector<int> sizes;
    for (int n = 0; n < layout.n_types(); ++n) sizes.push_back(layout.n_states(n));
    ActivationProbabilities chi(sizes, layout.horizon());
    for (int n = 0; n < layout.n_types(); ++n)
        for (int t = 0; t < layout.horizon(); ++t)
            for (int s = 0; s < layout.n_states(n); ++s) {
                const double m0 = std::max(solution.mu(n, s, 0, t), 0.0);
                const double m1 = std::max(solution.mu(n, s, 1, t), 0.0);
                const double total = m0 + m1;
                chi.set(n, s, t, total < kChiDenominatorTol ? 0.0 : m1 / total);
            }
    return chi;
}

IndexTable::IndexTable(std::vector<int> n_states, int horizon, bool time_dependent)
    : n_states_(std::move(n_states)), horizon_(horizon), time_dependent_(time_dependent) {
    for (int s : n_states_) values_.emplace_back(static_cast<size_t>(s) * (time_dependent_ ? horizon_ : 1), 0.0);
}

IndexTable IndexTable::stack(const std::vector<IndexTable>& parts) {
    IndexTable out;
    if (parts.empty()) return out;
    out.horizon_ = parts.front().horizon_;
    out.time_dependent_ = parts.front().time_dependent_;
    for (const auto& p : parts) {
        if (p.time_dependent_ != out.time_dependent_ || (out.time_dependent_ && p.horizon_ != out.horizon_))
            throw Error(ErrorCode::InvalidArgument, "cannot stack index tables of different shapes");
        out.horizon_ = std::max(out.horizon_, p.horizon_);
        out.n_states_.insert(out.n_states_.end(), p.n_states_.begin(), p.n_states_.end());
        out.values_.insert(out.values_.end(), p.values_.begin(), p.values_.end());
    }
    return out;
}

IndexTable spi_indices(const ActivationProbabilities& chi, const std::vector<ArmModel>& expanded_types) {
    if (static_cast<int>(expanded_types.size()) != chi.n_types())
        throw Error(ErrorCode::InvalidArgument, "one arm model per chi table is required");
    std::vector<int> sizes;
    for (int n = 0; n < chi.n_types(); ++n) sizes.push_back(chi.n_states(n));
    IndexTable table(sizes, chi.horizon(), true);
    for (int n = 0; n < chi.n_types(); ++n)
        for (int t = 0; t < chi.horizon(); ++t)
            for (int s = 0; s < chi.n_states(n); ++s)
                table.set(n, s, t, chi.at(n, s, t) * expanded_types[n].r(s, 1));
    return table;
}

namespace {

// Arm ids sorted by descending key; stable sort keeps lower ids first on ties.
std::vector<int> order_by(const std::vector<double>& key, const std::vector<int>& ids) {
    std::vector<int> order = ids;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key[a] > key[b]; });
    return order;
}

bool eligible(std::span<const ArmState> arms, std::span<const char> pulled, int i) {
    return !arms[i].dummy && (pulled.empty() || !pulled[i]);
}

}  // namespace

Actions spi_select(const IndexTable& indices, std::span<const ArmState> arms, int t, int budget,
                   const SpiSelectOptions& options) {
    const int n = static_cast<int>(arms.size());
    Actions actions(n, 0);
    std::vector<double> key(n);
    std::vector<int> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    for (int i = 0; i < n; ++i) key[i] = indices.at(arms[i].type, arms[i].state, t);
    for (int i : order_by(key, ids)) {
        if (budget <= 0) break;
        if (options.zero_cutoff && key[i] <= 0.0) break;
        --budget;
        if (!arms[i].dummy) actions[i] = 1;
    }
    return actions;
}

Actions mean_field_select(const OccupancySolution& solution, std::span<const ArmState> arms, int t, int budget,
                          std::span<const char> pulled) {
    const int n = static_cast<int>(arms.size());
    Actions actions(n, 0);
    std::vector<int> high, medium;
    std::vector<double> chi(n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (!eligible(arms, pulled, i)) continue;
        const double m0 = solution.mu(arms[i].type, arms[i].state, 0, t);
        const double m1 = solution.mu(arms[i].type, arms[i].state, 1, t);
        if (m1 < kPriorityTol) continue;
        if (m0 < kPriorityTol) {
            high.push_back(i);
        } else {
            medium.push_back(i);
            chi[i] = m1 / (m0 + m1);
        }
    }
    for (int i : high) {
        if (budget <= 0) return actions;
        actions[i] = 1;
        --budget;
    }
    for (int i : order_by(chi, medium)) {
        if (budget <= 0) break;
        actions[i] = 1;
        --budget;
    }
    return actions;
}

Actions greedy_budget_select(const IndexTable& indices, std::span<const ArmState> arms, int t, int budget,
                             std::span<const char> pulled) {
    const int n = static_cast<int>(arms.size());
    Actions actions(n, 0);
    std::vector<double> key(n, 0.0);
    std::vector<int> candidates;
    for (int i = 0; i < n; ++i) {
        if (!eligible(arms, pulled, i)) continue;
        key[i] = indices.at(arms[i].type, arms[i].state, t);
        candidates.push_back(i);
    }
    for (int i : order_by(key, candidates)) {
        if (budget <= 0) break;
        actions[i] = 1;
        --budget;
    }
    return actions;
}

Actions random_select(std::span<const ArmState> arms, int budget, std::span<const char> pulled,
                      std::uint64_t stream) {
    const int n = static_cast<int>(arms.size());
    Actions actions(n, 0);
    std::vector<int> candidates;
    for (int i = 0; i < n; ++i)
        if (eligible(arms, pulled, i)) candidates.push_back(i);
    const int take = std::min<int>(std::max(budget, 0), static_cast<int>(candidates.size()));
    // Partial Fisher-Yates driven by the counter stream.
    for (int k = 0; k < take; ++k) {
        const int remaining = static_cast<int>(candidates.size()) - k;
        const int j = k + std::min(remaining - 1, static_cast<int>(uniform_at(stream, k) * remaining));
        std::swap(candidates[k], candidates[j]);
        actions[candidates[k]] = 1;
    }
    return actions;
}

}  // namespace sprmab
