#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "sprmab/error.hpp"
#include "sprmab/lp.hpp"
#include "sprmab/sparse_lu.hpp"

namespace sprmab {

const char* to_string(LpStatus status) {
    switch (status) {
    case LpStatus::Optimal: return "OPTIMAL";
    case LpStatus::Infeasible: return "INFEASIBLE";
    case LpStatus::Unbounded: return "UNBOUNDED";
    }
    return "UNKNOWN";
}

int LpProblem::add_variable(double objective, double lower, double upper, std::string name) {
    if (!(lower <= upper)) throw Error(ErrorCode::InvalidArgument, "variable bounds are crossed");
    objective_.push_back(objective);
    lower_.push_back(lower);
    upper_.push_back(upper);
    names_.push_back(std::move(name));
    return n_vars() - 1;
}

int LpProblem::add_row(std::vector<int> index, std::vector<double> value, Relation relation,
                       double rhs, std::string name) {
    if (index.size() != value.size())
        throw Error(ErrorCode::InvalidArgument, "row index/value length mismatch");
    std::map<int, double> merged;
    for (size_t k = 0; k < index.size(); ++k) {
        if (index[k] < 0 || index[k] >= n_vars())
            throw Error(ErrorCode::InvalidArgument, "row references an unknown column");
        merged[index[k]] += value[k];
    }
    LpRow row;
    for (const auto& [j, v] : merged) {
        if (v == 0.0) continue;
        row.index.push_back(j);
        row.value.push_back(v);
    }
    row.relation = relation;
    row.rhs = rhs;
    row.name = std::move(name);
    rows_.push_back(std::move(row));
    return n_rows() - 1;
}

namespace {

// Standard form: max c^T z s.t. A z = b, z >= 0, b >= 0. Columns are the
// transformed structurals followed by one slack per inequality row.
// Artificial columns are implicit unit vectors with index n_cols + row.
struct StandardForm {
    int m = 0;
    int n_cols = 0;
    std::vector<int> col_start;
    std::vector<int> row_idx;
    std::vector<double> val;
    std::vector<double> cost;
    std::vector<double> b;
    std::vector<int> slack_of_row;

    // Recovery of the original variables: x_j = shift_j + sign_j * z[pos_j] - z[neg_j].
    std::vector<double> shift;
    std::vector<double> sign;
    std::vector<int> pos_col;
    std::vector<int> neg_col;
};

StandardForm to_standard_form(const LpProblem& lp) {
    StandardForm sf;
    const int n = lp.n_vars();
    sf.shift.assign(n, 0.0);
    sf.sign.assign(n, 1.0);
    sf.pos_col.assign(n, -1);
    sf.neg_col.assign(n, -1);

    std::vector<double> cost;
    struct Bound {
        int col;
        double ub;
    };
    std::vector<Bound> upper_rows;
    for (int j = 0; j < n; ++j) {
        const double lo = lp.lower()[j];
        const double hi = lp.upper()[j];
        const double c = lp.objective()[j];
        if (std::isfinite(lo)) {
            sf.shift[j] = lo;
            sf.pos_col[j] = static_cast<int>(cost.size());
            cost.push_back(c);
            if (std::isfinite(hi)) upper_rows.push_back({sf.pos_col[j], hi - lo});
        } else if (std::isfinite(hi)) {
            sf.shift[j] = hi;
            sf.sign[j] = -1.0;
            sf.pos_col[j] = static_cast<int>(cost.size());
            cost.push_back(-c);
        } else {
            sf.pos_col[j] = static_cast<int>(cost.size());
            cost.push_back(c);
            sf.neg_col[j] = static_cast<int>(cost.size());
            cost.push_back(-c);
        }
    }
    const int n_struct = static_cast<int>(cost.size());

    struct RowBuild {
        std::vector<std::pair<int, double>> entries;
        Relation relation;
        double rhs;
    };
    std::vector<RowBuild> rows;
    for (const auto& row : lp.rows()) {
        RowBuild rb{{}, row.relation, row.rhs};
        for (size_t k = 0; k < row.index.size(); ++k) {
            const int j = row.index[k];
            const double a = row.value[k];
            rb.rhs -= a * sf.shift[j];
            rb.entries.push_back({sf.pos_col[j], a * sf.sign[j]});
            if (sf.neg_col[j] >= 0) rb.entries.push_back({sf.neg_col[j], -a});
        }
        rows.push_back(std::move(rb));
    }
    for (const auto& ub : upper_rows) rows.push_back({{{ub.col, 1.0}}, Relation::LessEqual, ub.ub});

    sf.m = static_cast<int>(rows.size());
    sf.b.resize(sf.m);
    sf.slack_of_row.assign(sf.m, -1);
    std::vector<double> row_sign(sf.m, 1.0);
    int next_col = n_struct;
    std::vector<double> slack_coef;
    for (int i = 0; i < sf.m; ++i) {
        if (rows[i].relation != Relation::Equal) {
            sf.slack_of_row[i] = next_col++;
            slack_coef.push_back(rows[i].relation == Relation::LessEqual ? 1.0 : -1.0);
        }
        if (rows[i].rhs < 0.0) row_sign[i] = -1.0;
        sf.b[i] = rows[i].rhs * row_sign[i];
    }
    sf.n_cols = next_col;
    sf.cost = cost;
    sf.cost.resize(sf.n_cols, 0.0);

    // Column-major assembly.
    std::vector<std::vector<std::pair<int, double>>> cols(sf.n_cols);
    for (int i = 0; i < sf.m; ++i) {
        for (const auto& [j, a] : rows[i].entries) cols[j].push_back({i, a * row_sign[i]});
        if (sf.slack_of_row[i] >= 0)
            cols[sf.slack_of_row[i]].push_back({i, slack_coef[sf.slack_of_row[i] - n_struct] * row_sign[i]});
    }
    sf.col_start.push_back(0);
    for (auto& col : cols) {
        std::sort(col.begin(), col.end());
        for (const auto& [i, a] : col) {
            sf.row_idx.push_back(i);
            sf.val.push_back(a);
        }
        sf.col_start.push_back(static_cast<int>(sf.row_idx.size()));
    }
    return sf;
}

enum class IterStatus { Optimal, Unbounded };

class RevisedSimplex {
public:
    RevisedSimplex(const StandardForm& sf, const SimplexOptions& opt, int n_vars)
        : sf_(sf), opt_(opt) {
        max_iter_ = opt.max_iterations > 0 ? opt.max_iterations : 50 * (sf.m + sf.n_cols) + 1000;
        bland_after_ = opt.bland_after > 0 ? opt.bland_after : 2 * std::max(1, n_vars);
        pos_of_.assign(sf.n_cols + sf.m, -1);
        basis_.assign(sf.m, -1);
    }

    bool is_artificial(int j) const { return j >= sf_.n_cols; }

    SparseVector column(int j) const {
        SparseVector v;
        if (is_artificial(j)) {
            v.index.push_back(j - sf_.n_cols);
            v.value.push_back(1.0);
            return v;
        }
        for (int k = sf_.col_start[j]; k < sf_.col_start[j + 1]; ++k) {
            v.index.push_back(sf_.row_idx[k]);
            v.value.push_back(sf_.val[k]);
        }
        return v;
    }

    void set_basis(const std::vector<int>& basis) {
        std::fill(pos_of_.begin(), pos_of_.end(), -1);
        basis_ = basis;
        for (int p = 0; p < sf_.m; ++p) pos_of_[basis_[p]] = p;
    }

    bool refactor() {
        std::vector<SparseVector> cols;
        cols.reserve(sf_.m);
        for (int p = 0; p < sf_.m; ++p) cols.push_back(column(basis_[p]));
        if (!factor_.factorize(sf_.m, std::move(cols))) return false;
        xb_ = sf_.b;
        factor_.ftran(xb_);
        return true;
    }

    /// Lower-triangular crash: row i takes a column whose first nonzero is in row i.
    std::vector<int> crash_basis() const {
        std::vector<int> first_row(sf_.n_cols, sf_.m);
        std::vector<std::vector<int>> starts_at(sf_.m);
        for (int j = 0; j < sf_.n_cols; ++j) {
            if (sf_.col_start[j] == sf_.col_start[j + 1]) continue;
            first_row[j] = sf_.row_idx[sf_.col_start[j]];
            starts_at[first_row[j]].push_back(j);
        }
        std::vector<int> basis(sf_.m, -1);
        for (int i = 0; i < sf_.m; ++i) {
            const int slack = sf_.slack_of_row[i];
            if (slack >= 0 && sf_.val[sf_.col_start[slack]] > 0.0) {
                basis[i] = slack;
                continue;
            }
            int best = -1;
            double best_abs = 0.0;
            for (int j : starts_at[i]) {
                if (j == slack) continue;
                const double a = std::abs(sf_.val[sf_.col_start[j]]);
                if (a > best_abs * (1.0 + 1e-12)) {
                    best = j;
                    best_abs = a;
                }
            }
            if (best >= 0 && best_abs >= 1e-3) basis[i] = best;
            else if (slack >= 0) basis[i] = slack;
            else basis[i] = sf_.n_cols + i;
        }
        return basis;
    }

    std::vector<int> slack_basis() const {
        std::vector<int> basis(sf_.m);
        for (int i = 0; i < sf_.m; ++i) {
            const int slack = sf_.slack_of_row[i];
            basis[i] = (slack >= 0 && sf_.val[sf_.col_start[slack]] > 0.0) ? slack : sf_.n_cols + i;
        }
        return basis;
    }

    bool basis_feasible() const {
        for (int p = 0; p < sf_.m; ++p) {
            if (xb_[p] < -opt_.feasibility_tol) return false;
            if (is_artificial(basis_[p]) && xb_[p] > opt_.feasibility_tol) return false;
        }
        return true;
    }

    double reduced_cost(int j, const std::vector<double>& cost, const std::vector<double>& y) const {
        double d = cost[j];
        for (int k = sf_.col_start[j]; k < sf_.col_start[j + 1]; ++k) d -= y[sf_.row_idx[k]] * sf_.val[k];
        return d;
    }

    void pivot(int r, int q, const std::vector<double>& alpha, double theta) {
        for (int p = 0; p < sf_.m; ++p) xb_[p] -= theta * alpha[p];
        xb_[r] = theta;
        pos_of_[basis_[r]] = -1;
        basis_[r] = q;
        pos_of_[q] = r;
        factor_.push_eta(r, alpha);
        if (factor_.eta_count() >= opt_.refactor_interval) {
            if (!refactor()) throw Error(ErrorCode::SolverStall, "basis became singular during refactorization");
            clean_primal();
        }
    }

    void clean_primal() {
        for (auto& x : xb_) {
            if (x < 0.0) {
                if (x < -1e-6) throw Error(ErrorCode::SolverStall, "lost primal feasibility");
                x = 0.0;
            }
        }
    }

    /// costs indexed over structural+slack columns; artificials cost cost_art.
    IterStatus iterate(const std::vector<double>& cost, double cost_art) {
        int degenerate_run = 0;
        bool bland = false;
        std::vector<double> y(sf_.m), alpha(sf_.m);
        while (true) {
            if (iterations_ >= max_iter_) {
                std::ostringstream os;
                os << "no convergence after " << iterations_ << " simplex iterations";
                throw Error(ErrorCode::SolverStall, os.str());
            }
            for (int p = 0; p < sf_.m; ++p) y[p] = is_artificial(basis_[p]) ? cost_art : cost[basis_[p]];
            factor_.btran(y);

            int q = -1;
            double best = opt_.optimality_tol;
            for (int j = 0; j < sf_.n_cols; ++j) {
                if (pos_of_[j] >= 0) continue;
                const double d = reduced_cost(j, cost, y);
                if (d > best) {
                    q = j;
                    best = d;
                    if (bland) break;
                }
            }
            if (q < 0) return IterStatus::Optimal;

            std::fill(alpha.begin(), alpha.end(), 0.0);
            for (int k = sf_.col_start[q]; k < sf_.col_start[q + 1]; ++k) alpha[sf_.row_idx[k]] = sf_.val[k];
            factor_.ftran(alpha);

            int r = -1;
            double theta = kInfinity;
            for (int p = 0; p < sf_.m; ++p) {
                double ratio;
                if (alpha[p] > opt_.pivot_tol) {
                    ratio = std::max(xb_[p], 0.0) / alpha[p];
                } else if (alpha[p] < -opt_.pivot_tol && is_artificial(basis_[p])) {
                    ratio = std::max(xb_[p], 0.0) / -alpha[p];
                } else {
                    continue;
                }
                if (r < 0 || ratio < theta - 1e-12) {
                    r = p;
                    theta = ratio;
                } else if (ratio <= theta + 1e-12) {
                    const bool take = bland ? basis_[p] < basis_[r] : std::abs(alpha[p]) > std::abs(alpha[r]);
                    if (take) {
                        r = p;
                        theta = std::min(theta, ratio);
                    }
                }
            }
            if (r < 0) return IterStatus::Unbounded;

            if (alpha[r] < 0.0) {
                // Artificial pinned at zero leaves; entering value follows the same step.
                theta = -theta;
            }
            pivot(r, q, alpha, theta);
            ++iterations_;

            if (std::abs(theta) <= 1e-12) {
                if (++degenerate_run > bland_after_) bland = true;
            } else {
                degenerate_run = 0;
                bland = false;
            }
        }
    }

    /// Pivots zero-valued basic artificials out wherever a structural column allows it.
    void drive_out_artificials() {
        std::vector<double> rho(sf_.m);
        for (int p = 0; p < sf_.m; ++p) {
            if (!is_artificial(basis_[p])) continue;
            std::fill(rho.begin(), rho.end(), 0.0);
            rho[p] = 1.0;
            factor_.btran(rho);
            int best = -1;
            double best_abs = 1e-7;
            for (int j = 0; j < sf_.n_cols; ++j) {
                if (pos_of_[j] >= 0) continue;
                double a = 0.0;
                for (int k = sf_.col_start[j]; k < sf_.col_start[j + 1]; ++k) a += rho[sf_.row_idx[k]] * sf_.val[k];
                if (std::abs(a) > best_abs) {
                    best = j;
                    best_abs = std::abs(a);
                }
            }
            if (best < 0) continue;  // redundant row: the artificial stays basic at zero
            std::vector<double> alpha(sf_.m, 0.0);
            for (int k = sf_.col_start[best]; k < sf_.col_start[best + 1]; ++k) alpha[sf_.row_idx[k]] = sf_.val[k];
            factor_.ftran(alpha);
            pivot(p, best, alpha, 0.0);
            xb_[p] = 0.0;
        }
    }

    LpResult solve() {
        LpResult result;
        bool phase2_ready = false;
        if (opt_.crash) {
            set_basis(crash_basis());
            if (refactor() && basis_feasible()) {
                clean_primal();
                phase2_ready = true;
                result.crash_used = true;
            }
        }
        if (!phase2_ready) {
            set_basis(slack_basis());
            if (!refactor()) throw Error(ErrorCode::SolverStall, "initial basis is singular");
            bool need_phase1 = false;
            for (int p = 0; p < sf_.m; ++p)
                if (is_artificial(basis_[p]) && xb_[p] > opt_.feasibility_tol) need_phase1 = true;
            if (need_phase1) {
                std::vector<double> zero(sf_.n_cols, 0.0);
                iterate(zero, -1.0);
                result.phase1_iterations = iterations_;
                double infeasibility = 0.0;
                double scale = 1.0;
                for (double v : sf_.b) scale = std::max(scale, std::abs(v));
                for (int p = 0; p < sf_.m; ++p)
                    if (is_artificial(basis_[p])) infeasibility += std::max(xb_[p], 0.0);
                if (infeasibility > 1e-7 * scale) {
                    result.status = LpStatus::Infeasible;
                    result.iterations = iterations_;
                    return result;
                }
                for (int p = 0; p < sf_.m; ++p)
                    if (is_artificial(basis_[p])) xb_[p] = 0.0;
                drive_out_artificials();
            }
            clean_primal();
        }
        const auto status = iterate(sf_.cost, 0.0);
        result.iterations = iterations_;
        if (status == IterStatus::Unbounded) {
            result.status = LpStatus::Unbounded;
            return result;
        }
        if (!refactor()) throw Error(ErrorCode::SolverStall, "final basis is singular");
        clean_primal();
        result.status = LpStatus::Optimal;
        z_.assign(sf_.n_cols, 0.0);
        for (int p = 0; p < sf_.m; ++p)
            if (!is_artificial(basis_[p])) z_[basis_[p]] = xb_[p];
        return result;
    }

    const std::vector<double>& z() const { return z_; }

private:
    const StandardForm& sf_;
    SimplexOptions opt_;
    int max_iter_ = 0;
    int bland_after_ = 0;
    int iterations_ = 0;
    std::vector<int> basis_;
    std::vector<int> pos_of_;
    std::vector<double> xb_;
    std::vector<double> z_;
    BasisFactor factor_;
};

}  // namespace

namespace {

struct Presolved {
    bool infeasible = false;
    LpProblem reduced;
    std::vector<int> kept;  // reduced column -> original column
};

Presolved presolve(const LpProblem& problem) {
    const int n = problem.n_vars();
    const auto& rows = problem.rows();
    std::vector<char> removed(n, 0), row_done(rows.size(), 0);
    Presolved out;

    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t r = 0; r < rows.size(); ++r) {
            if (row_done[r]) continue;
            const auto& row = rows[r];
            int pos = 0, neg = 0;
            bool bounded_below = true;
            for (size_t k = 0; k < row.index.size(); ++k) {
                const int j = row.index[k];
                if (removed[j] || row.value[k] == 0.0) continue;
                (row.value[k] > 0.0 ? pos : neg) += 1;
                bounded_below = bounded_below && problem.lower()[j] == 0.0;
            }
            if (pos + neg == 0) {
                const double tol = 1e-12 * std::max(1.0, std::abs(row.rhs));
                const bool ok = row.relation == Relation::Equal          ? std::abs(row.rhs) <= tol
                                : row.relation == Relation::LessEqual ? row.rhs >= -tol
                                                                       : row.rhs <= tol;
                if (!ok) {
                    out.infeasible = true;
                    return out;
                }
                row_done[r] = 1;
                changed = true;
                continue;
            }
            if (row.rhs != 0.0 || !bounded_below) continue;
            const bool forcing = (neg == 0 && row.relation != Relation::GreaterEqual) ||
                                 (pos == 0 && row.relation != Relation::LessEqual);
            if (!forcing) continue;
            for (size_t k = 0; k < row.index.size(); ++k)
                if (row.value[k] != 0.0) removed[row.index[k]] = 1;
            row_done[r] = 1;
            changed = true;
        }
    }

    std::vector<int> new_index(n, -1);
    for (int j = 0; j < n; ++j) {
        if (removed[j]) continue;
        new_index[j] = static_cast<int>(out.kept.size());
        out.kept.push_back(j);
        out.reduced.add_variable(problem.objective()[j], problem.lower()[j], problem.upper()[j],
                                 problem.var_names()[j]);
    }
    for (size_t r = 0; r < rows.size(); ++r) {
        if (row_done[r]) continue;
        const auto& row = rows[r];
        std::vector<int> idx;
        std::vector<double> val;
        for (size_t k = 0; k < row.index.size(); ++k) {
            if (removed[row.index[k]]) continue;
            idx.push_back(new_index[row.index[k]]);
            val.push_back(row.value[k]);
        }
        out.reduced.add_row(std::move(idx), std::move(val), row.relation, row.rhs, row.name);
    }
    return out;
}

LpResult solve_direct(const LpProblem& problem, const SimplexOptions& options) {
    const StandardForm sf = to_standard_form(problem);
    RevisedSimplex simplex(sf, options, problem.n_vars());
    LpResult result = simplex.solve();
    if (result.status != LpStatus::Optimal) return result;

    const auto& z = simplex.z();
    const int n = problem.n_vars();
    result.x.assign(n, 0.0);
    result.objective = 0.0;
    for (int j = 0; j < n; ++j) {
        double x = sf.shift[j] + sf.sign[j] * z[sf.pos_col[j]];
        if (sf.neg_col[j] >= 0) x -= z[sf.neg_col[j]];
        result.x[j] = x;
        result.objective += problem.objective()[j] * x;
    }
    return result;
}

}  // namespace

LpResult solve_lp(const LpProblem& problem, const SimplexOptions& options) {
    if (!options.presolve) return solve_direct(problem, options);
    const Presolved pre = presolve(problem);
    if (pre.infeasible) return LpResult{};
    LpResult result = solve_direct(pre.reduced, options);
    if (result.status != LpStatus::Optimal) return result;
    std::vector<double> x(problem.n_vars(), 0.0);
    for (size_t k = 0; k < pre.kept.size(); ++k) x[pre.kept[k]] = result.x[k];
    result.x = std::move(x);
    return result;
}

}  // namespace sprmab
