#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sprmab/model.hpp"

namespace sprmab {

enum class Family { Cpap, Mhmh, Ehrenfest, Random };

const char* to_string(Family family);
Family family_from_string(const std::string& name);

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

/// (N, S, K, rho, T) as used to label experiment settings.
struct Setting {
    int n_types = 1;
    int n_states = 2;
    int budget = 1;
    int rho = 1;
    int horizon = 1;
};

std::string to_string(const Setting& setting);

struct DomainSpec {
    Family family = Family::Random;
    int n_types = 1;
    /// CPAP and random: number of states. Ehrenfest: top state S (states 0..S). MHMH: always 3.
    int n_states = 2;
    std::uint64_t seed = 0;

    /// CPAP pays the adherence reward s + 1 under both actions unless this is set.
    bool cpap_active_only_reward = false;

    Range mhmh_start{0.2, 0.8};     // eta_{g,s}, eta_{r,s}: start -> engaged when passive
    Range mhmh_engaged{0.3, 0.9};   // eta_{r,e}: reliable stays engaged when passive
    Range mhmh_dropout{0.05, 0.5};  // eta_{g,d}, eta_{r,d}: dropout -> start
    Range mhmh_reward{0.3, 0.9};    // C, the reliable engaged reward

    Range ehrenfest_c{1.0, 10.0};
    Range ehrenfest_mu{0.0, 10.0};
    Range ehrenfest_lambda{0.0, 10.0};
    double ehrenfest_dt = 0.01;
};

/// Birth-death adherence chain: passive moves down deterministically, a pull moves up
/// with a per-type probability and down otherwise.
std::vector<ArmModel> make_cpap(const DomainSpec& spec);

enum MhmhState { kStart = 0, kEngaged = 1, kDropout = 2 };

struct MhmhParams {
    bool greedy = true;
    double eta_start = 0.5;
    double eta_engaged = 0.5;  // unused for greedy types
    double eta_dropout = 0.5;
    double reward = 1.0;       // engaged reward when pulled: 1 for greedy, C for reliable
};

ArmModel mhmh_arm(const MhmhParams& params);
/// First half of the types greedy, second half reliable.
std::vector<MhmhParams> mhmh_draws(const DomainSpec& spec);
std::vector<ArmModel> make_mhmh(const DomainSpec& spec);

struct EhrenfestParams {
    double c = 1.0;
    double mu = 1.0;
    double lambda = 1.0;
};

/// States 0..top; a pull earns c*s*dt and moves down at rate mu*s, rest moves up at rate lambda*(top-s).
ArmModel ehrenfest_arm(const EhrenfestParams& params, int top, double dt);
std::vector<EhrenfestParams> ehrenfest_draws(const DomainSpec& spec);
std::vector<ArmModel> make_ehrenfest(const DomainSpec& spec);

/// Continuous-time Whittle index v(s) = c / (mu S) (mu s^2 - lambda (S - s)^2).
double closed_form_whittle(double c, double mu, double lambda, int top, int s);

/// Flat-Dirichlet transition rows, r(s,1) ~ U(0,1) * (s + 1), r(s,0) = 0.
std::vector<ArmModel> make_random(const DomainSpec& spec);

std::vector<ArmModel> make_types(const DomainSpec& spec);

/// Full instance: generated types, setting's rho/K/T, and one deterministic starting state
/// per type (MHMH starts in the start state; other families draw a state from the seed).
Instance make_instance(const DomainSpec& spec, const Setting& setting);

}  // namespace sprmab
