#include "sprmab/domains.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "sprmab/error.hpp"

namespace sprmab {

namespace {

// Independent generator per (family, purpose) so adding draws to one stream never
// shifts another.
std::mt19937_64 generator(std::uint64_t seed, std::uint64_t salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
    return std::mt19937_64(seq);
}

double draw(std::mt19937_64& rng, const Range& r) { return std::uniform_real_distribution<double>(r.lo, r.hi)(rng); }

void check_open_unit(const Range& r, const char* what) {
    if (!(r.lo > 0.0 && r.hi < 1.0 && r.lo <= r.hi))
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " range must lie inside (0, 1)");
}

ArmModel build(int n, const std::vector<std::vector<std::vector<double>>>& p, const std::vector<std::vector<double>>& r,
               std::string label) {
    std::vector<double> flat_p, flat_r;
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < kActions; ++a) {
            flat_p.insert(flat_p.end(), p[s][a].begin(), p[s][a].end());
            flat_r.push_back(r[s][a]);
        }
    ArmModel m(n, std::move(flat_p), std::move(flat_r), std::move(label));
    require_valid(validate_arm(m), "generated arm");
    return m;
}

using Kernel = std::vector<std::vector<std::vector<double>>>;
using Rewards = std::vector<std::vector<double>>;

Kernel zero_kernel(int n) { return Kernel(n, std::vector<std::vector<double>>(kActions, std::vector<double>(n, 0.0))); }

}  // namespace

const char* to_string(Family family) {
    switch (family) {
    case Family::Cpap: return "cpap";
    case Family::Mhmh: return "mhmh";
    case Family::Ehrenfest: return "ehrenfest";
    case Family::Random: return "random";
    }
    return "unknown";
}

Family family_from_string(const std::string& name) {
    if (name == "cpap") return Family::Cpap;
    if (name == "mhmh") return Family::Mhmh;
    if (name == "ehrenfest") return Family::Ehrenfest;
    if (name == "random") return Family::Random;
    throw Error(ErrorCode::ConfigError, "unknown domain family '" + name + "'");
}

std::string to_string(const Setting& s) {
    std::ostringstream os;
    os << '(' << s.n_types << ',' << s.n_states << ',' << s.budget << ',' << s.rho << ',' << s.horizon << ')';
    return os.str();
}

std::vector<ArmModel> make_cpap(const DomainSpec& spec) {
    const int n = spec.n_states;
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "CPAP needs at least two adherence levels");
    auto rng = generator(spec.seed, 0xc9a9);
    std::vector<ArmModel> out;
    for (int type = 0; type < spec.n_types; ++type) {
        const double up = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        Kernel p = zero_kernel(n);
        Rewards r(n, std::vector<double>(kActions));
        for (int s = 0; s < n; ++s) {
            p[s][0][s > 0 ? s - 1 : 0] = 1.0;
            p[s][1][s < n - 1 ? s + 1 : s] += up;
            p[s][1][s > 0 ? s - 1 : 0] += 1.0 - up;
            r[s][1] = s + 1.0;
            r[s][0] = spec.cpap_active_only_reward ? 0.0 : s + 1.0;
        }
        out.push_back(build(n, p, r, "cpap-" + std::to_string(type)));
    }
    return out;
}

ArmModel mhmh_arm(const MhmhParams& q) {
    auto inside = [](double v) { return v > 0.0 && v < 1.0; };
    const bool ok = inside(q.eta_start) && inside(q.eta_dropout) &&
                    (q.greedy || (inside(q.eta_engaged) && inside(q.reward)));
    if (!ok) throw Error(ErrorCode::InvalidArgument, "MHMH parameters must lie in (0, 1)");
    Kernel p = zero_kernel(3);
    // Active
    p[kStart][1][kEngaged] = 1.0;
    if (q.greedy) p[kEngaged][1][kDropout] = 1.0;
    else p[kEngaged][1][kEngaged] = 1.0;
    p[kDropout][1][kStart] = q.eta_dropout;
    p[kDropout][1][kDropout] = 1.0 - q.eta_dropout;
    // Passive
    p[kStart][0][kEngaged] = q.eta_start;
    p[kStart][0][kDropout] = 1.0 - q.eta_start;
    if (q.greedy) {
        p[kEngaged][0][kDropout] = 1.0;
    } else {
        p[kEngaged][0][kEngaged] = q.eta_engaged;
        p[kEngaged][0][kDropout] = 1.0 - q.eta_engaged;
    }
    p[kDropout][0][kStart] = q.eta_dropout;
    p[kDropout][0][kDropout] = 1.0 - q.eta_dropout;

    Rewards r(3, std::vector<double>(kActions, 0.0));
    r[kEngaged][1] = q.reward;
    return build(3, p, r, q.greedy ? "greedy" : "reliable");
}

std::vector<MhmhParams> mhmh_draws(const DomainSpec& spec) {
    check_open_unit(spec.mhmh_start, "eta start");
    check_open_unit(spec.mhmh_engaged, "eta engaged");
    check_open_unit(spec.mhmh_dropout, "eta dropout");
    check_open_unit(spec.mhmh_reward, "C");
    auto rng = generator(spec.seed, 0x3a3a);
    std::vector<MhmhParams> out;
    const int n_greedy = (spec.n_types + 1) / 2;
    for (int type = 0; type < spec.n_types; ++type) {
        MhmhParams q;
        q.greedy = type < n_greedy;
        q.eta_start = draw(rng, spec.mhmh_start);
        q.eta_engaged = draw(rng, spec.mhmh_engaged);
        q.eta_dropout = draw(rng, spec.mhmh_dropout);
        const double c = draw(rng, spec.mhmh_reward);
        q.reward = q.greedy ? 1.0 : c;
        out.push_back(q);
    }
    return out;
}

std::vector<ArmModel> make_mhmh(const DomainSpec& spec) {
    std::vector<ArmModel> out;
    for (const auto& q : mhmh_draws(spec)) out.push_back(mhmh_arm(q));
    return out;
}

ArmModel ehrenfest_arm(const EhrenfestParams& q, int top, double dt) {
    if (top < 1) throw Error(ErrorCode::InvalidArgument, "Ehrenfest needs S >= 1");
    if (!(dt > 0.0) || dt * std::max(q.mu, q.lambda) * top > 1.0 || q.mu < 0.0 || q.lambda < 0.0)
        throw Error(ErrorCode::InvalidArgument, "discretization needs dt * max(mu, lambda) * S <= 1");
    const int n = top + 1;
    Kernel p = zero_kernel(n);
    Rewards r(n, std::vector<double>(kActions, 0.0));
    for (int s = 0; s < n; ++s) {
        const double down = q.mu * s * dt;
        if (s > 0) p[s][1][s - 1] = down;
        p[s][1][s] += 1.0 - down;
        const double up = q.lambda * (top - s) * dt;
        if (s < top) p[s][0][s + 1] = up;
        p[s][0][s] += 1.0 - up;
        r[s][1] = q.c * s * dt;
    }
    return build(n, p, r, "ehrenfest");
}

std::vector<EhrenfestParams> ehrenfest_draws(const DomainSpec& spec) {
    auto rng = generator(spec.seed, 0xe4e4);
    std::vector<EhrenfestParams> out;
    for (int type = 0; type < spec.n_types; ++type) {
        EhrenfestParams q;
        q.c = draw(rng, spec.ehrenfest_c);
        q.mu = draw(rng, spec.ehrenfest_mu);
        q.lambda = draw(rng, spec.ehrenfest_lambda);
        out.push_back(q);
    }
    return out;
}

std::vector<ArmModel> make_ehrenfest(const DomainSpec& spec) {
    std::vector<ArmModel> out;
    for (const auto& q : ehrenfest_draws(spec)) out.push_back(ehrenfest_arm(q, spec.n_states, spec.ehrenfest_dt));
    return out;
}

double closed_form_whittle(double c, double mu, double lambda, int top, int s) {
    if (!(mu > 0.0) || top < 1) throw Error(ErrorCode::InvalidArgument, "closed form needs mu > 0 and S >= 1");
    const double up = top - s;
    return c / (mu * top) * (mu * s * s - lambda * up * up);
}

std::vector<ArmModel> make_random(const DomainSpec& spec) {
    const int n = spec.n_states;
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "random MDPs need at least two states");
    auto rng = generator(spec.seed, 0x7a7a);
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<ArmModel> out;
    for (int type = 0; type < spec.n_types; ++type) {
        Kernel p = zero_kernel(n);
        Rewards r(n, std::vector<double>(kActions, 0.0));
        for (int s = 0; s < n; ++s) {
            for (int a = 0; a < kActions; ++a) {
                double total = 0.0;
                for (auto& v : p[s][a]) total += (v = expo(rng));
                for (auto& v : p[s][a]) v /= total;
            }
            r[s][1] = unit(rng) * (s + 1);
        }
        out.push_back(build(n, p, r, "random-" + std::to_string(type)));
    }
    return out;
}

std::vector<ArmModel> make_types(const DomainSpec& spec) {
    switch (spec.family) {
    case Family::Cpap: return make_cpap(spec);
    case Family::Mhmh: return make_mhmh(spec);
    case Family::Ehrenfest: return make_ehrenfest(spec);
    case Family::Random: return make_random(spec);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown family");
}

Instance make_instance(const DomainSpec& base, const Setting& setting) {
    DomainSpec spec = base;
    spec.n_types = setting.n_types;
    spec.n_states = setting.n_states;
    Instance instance;
    instance.types = make_types(spec);
    instance.rho = setting.rho;
    instance.budget = setting.budget;
    instance.horizon = setting.horizon;
    auto rng = generator(spec.seed, 0x1417);
    for (const auto& m : instance.types) {
        std::vector<double> init(m.n_states(), 0.0);
        if (spec.family == Family::Mhmh) {
            init[kStart] = 1.0;
        } else {
            init[std::uniform_int_distribution<int>(0, m.n_states() - 1)(rng)] = 1.0;
        }
        instance.initial.push_back(std::move(init));
    }
    require_valid(validate_instance(instance), "generated instance");
    return instance;
}

}  // namespace sprmab
