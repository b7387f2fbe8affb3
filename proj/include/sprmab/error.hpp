#pragma once

#include <stdexcept>
#include <string>

namespace sprmab {

enum class ErrorCode {
    InvalidArgument,
    SolverStall,
    NonConvergent,
    BracketFail,
    InfeasibleAction,
    CapExceeded,
    DegenerateRange,
    ConfigError,
    AuditFailure,
};

const char* to_string(ErrorCode code);

/// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::SolverStall: return "SOLVER_STALL";
    case ErrorCode::NonConvergent: return "NON_CONVERGENT";
    case ErrorCode::BracketFail: return "BRACKET_FAIL";
    case ErrorCode::InfeasibleAction: return "INFEASIBLE_ACTION";
    case ErrorCode::CapExceeded: return "CAP_EXCEEDED";
    case ErrorCode::DegenerateRange: return "DEGENERATE_RANGE";
    case ErrorCode::ConfigError: return "CONFIG_ERROR";
    case ErrorCode::AuditFailure: return "AUDIT_FAILURE";
    }
    return "UNKNOWN";
}

}  // namespace sprmab
