#include "sprmab/model.hpp"

#include <cmath>
#include <sstream>

#include "sprmab/error.hpp"
#include "sprmab/rng.hpp"

namespace sprmab {

ArmModel::ArmModel(int n_states, std::vector<double> transitions, std::vector<double> rewards,
                   std::string label)
    : n_states_(n_states),
      transitions_(std::move(transitions)),
      rewards_(std::move(rewards)),
      label_(std::move(label)) {
    if (n_states_ <= 0) throw Error(ErrorCode::InvalidArgument, "arm model needs at least one state");
    const size_t n = static_cast<size_t>(n_states_);
    if (transitions_.size() != n * kActions * n) {
        std::ostringstream os;
        os << "transition tensor has " << transitions_.size() << " entries, expected "
           << n * kActions * n;
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
    if (rewards_.size() != n * kActions) {
        std::ostringstream os;
        os << "reward table has " << rewards_.size() << " entries, expected " << n * kActions;
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
}

ArmModel ArmModel::with_rewards(std::vector<double> rewards) const {
    if (rewards.size() != rewards_.size()) throw Error(ErrorCode::InvalidArgument, "reward table size mismatch");
    ArmModel copy = *this;
    copy.rewards_ = std::move(rewards);
    return copy;
}

void ValidationReport::add(Severity severity, std::string message) {
    if (severity == Severity::Error) ok = false;
    issues.push_back({severity, std::move(message)});
}

size_t ValidationReport::error_count() const {
    size_t count = 0;
    for (const auto& issue : issues)
        if (issue.severity == Severity::Error) ++count;
    return count;
}

ValidationReport validate_arm(const ArmModel& model) {
    ValidationReport report;
    const int n = model.n_states();
    const std::string prefix = model.label().empty() ? "" : "[" + model.label() + "] ";

    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < kActions; ++a) {
            double sum = 0.0;
            for (int next = 0; next < n; ++next) {
                const double p = model.p(s, a, next);
                if (!(p >= 0.0 && p <= 1.0)) {
                    std::ostringstream os;
                    os << prefix << "P(" << s << "," << a << "," << next << ") = " << p
                       << " outside [0, 1]";
                    report.add(Severity::Error, os.str());
                }
                sum += p;
            }
            if (!(std::abs(sum - 1.0) <= kRowSumTol)) {
                std::ostringstream os;
                os << prefix << "row sum " << sum << " != 1 at (s=" << s << ", a=" << a << ")";
                report.add(Severity::Error, os.str());
            }
            if (!std::isfinite(model.r(s, a))) {
                std::ostringstream os;
                os << prefix << "reward r(" << s << "," << a << ") is not finite";
                report.add(Severity::Error, os.str());
            }
        }
    }

    if (model.is_expanded()) {
        const int base = model.original_states();
        if (n != 2 * base) report.add(Severity::Error, prefix + "expanded model must have 2|S| states");
        for (int d = base; d < n; ++d) {
            const int origin = d - base;
            for (int next = 0; next < n; ++next) {
                if (model.p(d, 0, next) != model.p(d, 1, next)) {
                    std::ostringstream os;
                    os << prefix << "dummy state " << d << " has action-dependent transitions";
                    report.add(Severity::Error, os.str());
                    break;
                }
            }
            for (int a = 0; a < kActions; ++a) {
                for (int next = 0; next < base; ++next) {
                    if (model.p(d, a, next) != 0.0) {
                        std::ostringstream os;
                        os << prefix << "dummy state " << d << " leaks to normal state " << next;
                        report.add(Severity::Error, os.str());
                    }
                }
            }
            const double tie = model.r(origin, 0);
            if (model.r(d, 0) != tie || model.r(d, 1) != tie) {
                std::ostringstream os;
                os << prefix << "dummy reward tie violated at state " << d << ": r(d,0)="
                   << model.r(d, 0) << ", r(d,1)=" << model.r(d, 1) << ", r(" << origin
                   << ",0)=" << tie;
                report.add(Severity::Error, os.str());
            }
        }
    }

    // Unreachable: no other state ever moves into s.
    for (int s = 0; s < n; ++s) {
        bool reachable = false;
        for (int from = 0; from < n && !reachable; ++from) {
            if (from == s) continue;
            for (int a = 0; a < kActions; ++a)
                if (model.p(from, a, s) > 0.0) reachable = true;
        }
        if (!reachable && n > 1) {
            std::ostringstream os;
            os << prefix << "state " << s << " is unreachable from other states";
            report.add(Severity::Warning, os.str());
        }
    }
    return report;
}

ValidationReport validate_instance(const Instance& instance) {
    ValidationReport report;
    if (instance.types.empty()) report.add(Severity::Error, "instance has no arm types");
    if (instance.rho < 1) report.add(Severity::Error, "rho must be a positive integer");
    if (instance.budget < 0) report.add(Severity::Error, "budget must be non-negative");
    if (instance.horizon < 1) report.add(Severity::Error, "horizon must be a positive integer");
    if (instance.initial.size() != instance.types.size()) {
        report.add(Severity::Error, "need exactly one initial distribution per type");
        return report;
    }
    for (size_t n = 0; n < instance.types.size(); ++n) {
        const auto& model = instance.types[n];
        auto arm_report = validate_arm(model);
        for (auto& issue : arm_report.issues)
            report.add(issue.severity, "type " + std::to_string(n) + ": " + issue.message);
        const auto& init = instance.initial[n];
        if (static_cast<int>(init.size()) != model.n_states()) {
            report.add(Severity::Error,
                       "type " + std::to_string(n) + ": initial distribution has wrong length");
            continue;
        }
        double sum = 0.0;
        for (int s = 0; s < model.n_states(); ++s) {
            if (init[s] < 0.0)
                report.add(Severity::Error, "type " + std::to_string(n) + ": negative initial mass");
            if (model.is_dummy(s) && init[s] != 0.0)
                report.add(Severity::Error,
                           "type " + std::to_string(n) + ": initial mass on dummy state");
            sum += init[s];
        }
        if (!(std::abs(sum - 1.0) <= kRowSumTol)) {
            std::ostringstream os;
            os << "type " << n << ": initial distribution sums to " << sum;
            report.add(Severity::Error, os.str());
        }
    }
    if (instance.rho >= 1 && !instance.types.empty() &&
        instance.population_budget() >= instance.n_arms()) {
        report.add(Severity::Warning, "budget K*rho >= number of arms; the budget never binds");
    }
    return report;
}

void require_valid(const ValidationReport& report, const std::string& what) {
    for (const auto& issue : report.issues)
        if (issue.severity == Severity::Error)
            throw Error(ErrorCode::InvalidArgument, what + ": " + issue.message);
}

std::vector<double> normalize_distribution(std::span<const double> dist) {
    double sum = 0.0;
    for (double p : dist) {
        if (!(p >= -kRowSumTol && p <= 1.0 + kRowSumTol))
            throw Error(ErrorCode::InvalidArgument, "probability outside [0, 1]");
        sum += p;
    }
    if (!(std::abs(sum - 1.0) <= kRowSumTol)) {
        std::ostringstream os;
        os << "distribution sums to " << sum << ", outside the 1e-9 renormalization tolerance";
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
    std::vector<double> out(dist.size());
    for (size_t i = 0; i < dist.size(); ++i) out[i] = std::max(0.0, dist[i]) / sum;
    return out;
}

ArmModel normalize_rows(const ArmModel& model) {
    if (model.is_expanded())
        throw Error(ErrorCode::InvalidArgument, "normalize_rows expects an unexpanded model");
    const int n = model.n_states();
    std::vector<double> transitions(model.transitions());
    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < kActions; ++a) {
            auto row = model.row(s, a);
            auto fixed = normalize_distribution(row);
            std::copy(fixed.begin(), fixed.end(),
                      transitions.begin() + (static_cast<size_t>(s) * kActions + a) * n);
        }
    }
    return ArmModel(n, std::move(transitions), model.rewards(), model.label());
}

ArmModel expand_with_dummies(const ArmModel& model) {
    if (model.is_expanded())
        throw Error(ErrorCode::InvalidArgument, "model already contains dummy states");
    const int n = model.n_states();
    const int m = 2 * n;
    std::vector<double> transitions(static_cast<size_t>(m) * kActions * m, 0.0);
    std::vector<double> rewards(static_cast<size_t>(m) * kActions, 0.0);
    auto at = [m](int s, int a, int next) {
        return (static_cast<size_t>(s) * kActions + a) * m + next;
    };
    for (int s = 0; s < n; ++s) {
        const int d = s + n;
        for (int next = 0; next < n; ++next) {
            transitions[at(s, 0, next)] = model.p(s, 0, next);
            transitions[at(s, 1, next + n)] = model.p(s, 1, next);
            transitions[at(d, 0, next + n)] = model.p(s, 0, next);
            transitions[at(d, 1, next + n)] = model.p(s, 0, next);
        }
        rewards[static_cast<size_t>(s) * kActions + 0] = model.r(s, 0);
        rewards[static_cast<size_t>(s) * kActions + 1] = model.r(s, 1);
        rewards[static_cast<size_t>(d) * kActions + 0] = model.r(s, 0);
        rewards[static_cast<size_t>(d) * kActions + 1] = model.r(s, 0);
    }
    ArmModel expanded(m, std::move(transitions), std::move(rewards), model.label());
    expanded.original_states_ = n;
    return expanded;
}

int sample_index(std::span<const double> probabilities, double u) {
    double acc = 0.0;
    int last_positive = 0;
    for (size_t i = 0; i < probabilities.size(); ++i) {
        if (probabilities[i] <= 0.0) continue;
        last_positive = static_cast<int>(i);
        acc += probabilities[i];
        if (u < acc) return static_cast<int>(i);
    }
    return last_positive;
}

Population replicate(const Instance& instance, std::uint64_t seed) {
    Population population;
    population.reserve(static_cast<size_t>(instance.n_arms()));
    for (int n = 0; n < instance.n_types(); ++n) {
        for (int k = 0; k < instance.rho; ++k) {
            const auto arm = population.size();
            const double u = uniform_at(seed, kTagInitial, arm);
            population.push_back({n, sample_index(instance.initial[n], u), false});
        }
    }
    return population;
}

}  // namespace sprmab
