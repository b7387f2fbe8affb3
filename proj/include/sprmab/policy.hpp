#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sprmab/index_policies.hpp"
#include "sprmab/model.hpp"
#include "sprmab/occupancy_lp.hpp"
#include "sprmab/whittle.hpp"

namespace sprmab {

/// A population-level policy. Everything expensive happens at construction (the
/// "precomputation"); select() is const and safe to call from concurrent episodes.
class Policy {
public:
    virtual ~Policy() = default;

    virtual std::string name() const = 0;

    /// Actions for the population at (0-based) time t. `stream` keys any randomness.
    virtual Actions select(const Population& population, int t, std::uint64_t stream) const = 0;

    /// All actions the policy may take in this situation with their probabilities.
    /// Deterministic policies return a single entry.
    virtual std::vector<std::pair<Actions, double>> action_distribution(const Population& population, int t) const {
        return {{select(population, t, 0), 1.0}};
    }

    double precompute_ms() const { return precompute_ms_; }

protected:
    double precompute_ms_ = 0.0;
};

struct PolicyConfig {
    /// The SPI walk stops at the first non-positive index.
    bool spi_zero_cutoff = true;
    WhittleOptions whittle;
};

/// Registered names: spi, meanfield, whittle-original, whittle-infinite, whittle-finite, qdiff, random.
const std::vector<std::string>& policy_names();
bool is_policy_name(const std::string& name);

std::unique_ptr<Policy> make_policy(const std::string& name, const Instance& instance,
                                    const PolicyConfig& config = {});

/// Population seen through the dummy-expanded state space: pulled arms sit in the dummy
/// copy of their current state.
std::vector<ArmState> expanded_view(const Instance& instance, const Population& population);
std::vector<ArmState> original_view(const Population& population);
std::vector<char> pulled_mask(const Population& population);

/// Policy pieces exposed for tests and tools.
class SpiPolicy final : public Policy {
public:
    SpiPolicy(const Instance& instance, const SpiSelectOptions& options = {});
    std::string name() const override { return "spi"; }
    Actions select(const Population& population, int t, std::uint64_t stream) const override;

    const OccupancySolution& solution() const { return solution_; }
    const IndexTable& indices() const { return indices_; }

private:
    Instance instance_;
    SpiSelectOptions options_;
    OccupancySolution solution_;
    IndexTable indices_;
};

}  // namespace sprmab
