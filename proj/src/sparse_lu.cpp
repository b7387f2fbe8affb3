#include "sprmab/sparse_lu.hpp"

#include <cmath>

namespace sprmab {

namespace {
constexpr double kSingletonTol = 1e-11;
constexpr double kBumpPivotTol = 1e-11;
constexpr double kDropTol = 1e-14;
}  // namespace

double BasisFactor::entry(int row, int col) const {
    const auto& c = columns_[col];
    for (size_t k = 0; k < c.index.size(); ++k)
        if (c.index[k] == row) return c.value[k];
    return 0.0;
}

bool BasisFactor::factorize(int m, std::vector<SparseVector> columns) {
    m_ = m;
    columns_ = std::move(columns);
    col_singletons_.clear();
    row_singletons_.clear();
    bump_rows_.clear();
    bump_cols_.clear();
    bump_lu_.clear();
    bump_perm_.clear();
    etas_.clear();
    eta_nnz_ = 0;

    std::vector<char> row_active(m, 1), col_active(m, 1);
    std::vector<int> col_count(m, 0), row_count(m, 0);
    std::vector<std::vector<int>> row_cols(m);
    for (int j = 0; j < m; ++j) {
        for (size_t k = 0; k < columns_[j].index.size(); ++k) {
            if (columns_[j].value[k] == 0.0) continue;
            const int i = columns_[j].index[k];
            row_cols[i].push_back(j);
            ++col_count[j];
            ++row_count[i];
        }
    }

    // Column singletons peel off an upper-triangular block.
    std::vector<int> queue;
    for (int j = 0; j < m; ++j)
        if (col_count[j] == 1) queue.push_back(j);
    for (size_t head = 0; head < queue.size(); ++head) {
        const int j = queue[head];
        if (!col_active[j] || col_count[j] != 1) continue;
        int r = -1;
        double v = 0.0;
        const auto& c = columns_[j];
        for (size_t k = 0; k < c.index.size(); ++k) {
            if (c.value[k] != 0.0 && row_active[c.index[k]]) {
                r = c.index[k];
                v = c.value[k];
                break;
            }
        }
        if (r < 0 || std::abs(v) <= kSingletonTol) continue;
        col_singletons_.push_back({r, j, v});
        col_active[j] = 0;
        row_active[r] = 0;
        for (int other : row_cols[r]) {
            if (!col_active[other]) continue;
            if (--col_count[other] == 1) queue.push_back(other);
        }
    }

    // Row singletons of what remains peel off a lower-triangular block.
    queue.clear();
    for (int i = 0; i < m; ++i) {
        if (!row_active[i]) continue;
        int count = 0;
        for (int j : row_cols[i]) count += col_active[j];
        row_count[i] = count;
        if (count == 1) queue.push_back(i);
    }
    for (size_t head = 0; head < queue.size(); ++head) {
        const int i = queue[head];
        if (!row_active[i] || row_count[i] != 1) continue;
        int col = -1;
        for (int j : row_cols[i]) {
            if (col_active[j]) {
                col = j;
                break;
            }
        }
        if (col < 0) continue;
        const double v = entry(i, col);
        if (std::abs(v) <= kSingletonTol) continue;
        row_singletons_.push_back({i, col, v});
        row_active[i] = 0;
        col_active[col] = 0;
        const auto& c = columns_[col];
        for (size_t k = 0; k < c.index.size(); ++k) {
            const int other = c.index[k];
            if (c.value[k] == 0.0 || !row_active[other]) continue;
            if (--row_count[other] == 1) queue.push_back(other);
        }
    }

    for (int i = 0; i < m; ++i)
        if (row_active[i]) bump_rows_.push_back(i);
    for (int j = 0; j < m; ++j)
        if (col_active[j]) bump_cols_.push_back(j);
    if (bump_rows_.size() != bump_cols_.size()) return false;

    const int k = static_cast<int>(bump_rows_.size());
    if (k == 0) return true;
    std::vector<int> local_row(m, -1);
    for (int r = 0; r < k; ++r) local_row[bump_rows_[r]] = r;
    bump_lu_.assign(static_cast<size_t>(k) * k, 0.0);
    for (int c = 0; c < k; ++c) {
        const auto& col = columns_[bump_cols_[c]];
        for (size_t e = 0; e < col.index.size(); ++e) {
            const int r = local_row[col.index[e]];
            if (r >= 0) bump_lu_[static_cast<size_t>(r) * k + c] = col.value[e];
        }
    }
    bump_perm_.resize(k);
    for (int r = 0; r < k; ++r) bump_perm_[r] = r;
    auto at = [&](int r, int c) -> double& { return bump_lu_[static_cast<size_t>(r) * k + c]; };
    for (int p = 0; p < k; ++p) {
        int best = p;
        for (int r = p + 1; r < k; ++r)
            if (std::abs(at(r, p)) > std::abs(at(best, p))) best = r;
        if (std::abs(at(best, p)) <= kBumpPivotTol) return false;
        if (best != p) {
            for (int c = 0; c < k; ++c) std::swap(at(p, c), at(best, c));
            std::swap(bump_perm_[p], bump_perm_[best]);
        }
        const double piv = at(p, p);
        for (int r = p + 1; r < k; ++r) {
            const double f = at(r, p) / piv;
            at(r, p) = f;
            if (f == 0.0) continue;
            for (int c = p + 1; c < k; ++c) at(r, c) -= f * at(p, c);
        }
    }
    return true;
}

void BasisFactor::ftran(std::vector<double>& v) const {
    std::vector<double> w = std::move(v);
    std::vector<double> x(m_, 0.0);
    auto eliminate = [&](int col, double xc) {
        const auto& c = columns_[col];
        for (size_t e = 0; e < c.index.size(); ++e) w[c.index[e]] -= c.value[e] * xc;
    };

    for (const auto& piv : row_singletons_) {
        const double xc = w[piv.row] / piv.value;
        x[piv.col] = xc;
        if (xc != 0.0) eliminate(piv.col, xc);
    }

    const int k = static_cast<int>(bump_rows_.size());
    if (k > 0) {
        std::vector<double> z(k);
        for (int r = 0; r < k; ++r) z[r] = w[bump_rows_[bump_perm_[r]]];
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < r; ++c) z[r] -= bump_lu_[static_cast<size_t>(r) * k + c] * z[c];
        for (int r = k - 1; r >= 0; --r) {
            for (int c = r + 1; c < k; ++c) z[r] -= bump_lu_[static_cast<size_t>(r) * k + c] * z[c];
            z[r] /= bump_lu_[static_cast<size_t>(r) * k + r];
        }
        for (int c = 0; c < k; ++c) {
            x[bump_cols_[c]] = z[c];
            if (z[c] != 0.0) eliminate(bump_cols_[c], z[c]);
        }
    }

    for (auto it = col_singletons_.rbegin(); it != col_singletons_.rend(); ++it) {
        const double xc = w[it->row] / it->value;
        x[it->col] = xc;
        if (xc != 0.0) eliminate(it->col, xc);
    }

    for (const auto& eta : etas_) {
        const double xp = x[eta.pos] / eta.pivot;
        x[eta.pos] = xp;
        if (xp == 0.0) continue;
        for (size_t e = 0; e < eta.others.index.size(); ++e)
            x[eta.others.index[e]] -= eta.others.value[e] * xp;
    }
    v = std::move(x);
}

void BasisFactor::btran(std::vector<double>& v) const {
    std::vector<double> c = std::move(v);
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
        double acc = c[it->pos];
        for (size_t e = 0; e < it->others.index.size(); ++e)
            acc -= it->others.value[e] * c[it->others.index[e]];
        c[it->pos] = acc / it->pivot;
    }

    std::vector<double> y(m_, 0.0);
    auto dot_column = [&](int col) {
        const auto& cc = columns_[col];
        double acc = 0.0;
        for (size_t e = 0; e < cc.index.size(); ++e) acc += cc.value[e] * y[cc.index[e]];
        return acc;
    };

    for (const auto& piv : col_singletons_) y[piv.row] = (c[piv.col] - dot_column(piv.col)) / piv.value;

    const int k = static_cast<int>(bump_rows_.size());
    if (k > 0) {
        std::vector<double> z(k);
        for (int j = 0; j < k; ++j) z[j] = c[bump_cols_[j]] - dot_column(bump_cols_[j]);
        // M^T = U^T L^T P: solve U^T, then L^T, then undo the permutation.
        for (int r = 0; r < k; ++r) {
            for (int p = 0; p < r; ++p) z[r] -= bump_lu_[static_cast<size_t>(p) * k + r] * z[p];
            z[r] /= bump_lu_[static_cast<size_t>(r) * k + r];
        }
        for (int r = k - 1; r >= 0; --r)
            for (int p = r + 1; p < k; ++p) z[r] -= bump_lu_[static_cast<size_t>(p) * k + r] * z[p];
        for (int r = 0; r < k; ++r) y[bump_rows_[bump_perm_[r]]] = z[r];
    }

    for (auto it = row_singletons_.rbegin(); it != row_singletons_.rend(); ++it)
        y[it->row] = (c[it->col] - dot_column(it->col)) / it->value;
    v = std::move(y);
}

void BasisFactor::push_eta(int pos, const std::vector<double>& alpha) {
    Eta eta;
    eta.pos = pos;
    eta.pivot = alpha[pos];
    for (int i = 0; i < static_cast<int>(alpha.size()); ++i) {
        if (i == pos || std::abs(alpha[i]) <= kDropTol) continue;
        eta.others.index.push_back(i);
        eta.others.value.push_back(alpha[i]);
    }
    eta_nnz_ += eta.others.index.size() + 1;
    etas_.push_back(std::move(eta));
}

}  // namespace sprmab
