#pragma once

#include <limits>
#include <string>
#include <vector>

namespace sprmab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, Equal, GreaterEqual };

struct LpRow {
    std::vector<int> index;
    std::vector<double> value;
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
    std::string name;
};

/// A maximization LP: max c^T x subject to rows and per-variable bounds.
class LpProblem {
public:
    int add_variable(double objective, double lower = 0.0, double upper = kInfinity,
                     std::string name = {});
    /// Entries referencing the same column are summed; rows must reference valid columns.
    int add_row(std::vector<int> index, std::vector<double> value, Relation relation, double rhs,
                std::string name = {});

    int n_vars() const { return static_cast<int>(objective_.size()); }
    int n_rows() const { return static_cast<int>(rows_.size()); }
    const std::vector<double>& objective() const { return objective_; }
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& upper() const { return upper_; }
    const std::vector<std::string>& var_names() const { return names_; }
    const std::vector<LpRow>& rows() const { return rows_; }

private:
    std::vector<double> objective_;
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<std::string> names_;
    std::vector<LpRow> rows_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus status);

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
    int iterations = 0;
    int phase1_iterations = 0;
    bool crash_used = false;
};

struct SimplexOptions {
    double pivot_tol = 1e-10;
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    /// 0 selects 50 * (rows + columns) + 1000.
    int max_iterations = 0;
    /// Consecutive degenerate pivots before switching to Bland's rule; 0 selects 2 * n_vars.
    int bland_after = 0;
    int refactor_interval = 64;
    /// Try a triangular starting basis before falling back to slacks and artificials.
    bool crash = true;
    /// Drop variables pinned to zero by forcing rows (a zero right-hand side with all
    /// coefficients of one sign on non-negative variables) before the simplex starts.
    bool presolve = true;
};

/// Bounded revised simplex (Phase I / Phase II). Deterministic for a given problem.
/// Throws Error(SolverStall) when the iteration limit is hit or the basis degenerates
/// numerically, never returning a silently wrong answer.
LpResult solve_lp(const LpProblem& problem, const SimplexOptions& options = {});

/// Writes the problem in CPLEX LP text format for cross-checking with external solvers.
std::string to_lp_format(const LpProblem& problem);

}  // namespace sprmab
