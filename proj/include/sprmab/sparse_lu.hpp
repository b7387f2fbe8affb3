#pragma once

#include <vector>

namespace sprmab {

struct SparseVector {
    std::vector<int> index;
    std::vector<double> value;
};

/**
 * Factorization of a square simplex basis with product-form updates.
 *
 * The basis is peeled into column singletons (an upper-triangular block),
 * row singletons (a lower-triangular block) and a remaining "bump" that is
 * factored densely with partial pivoting. Occupancy-measure bases are
 * nearly triangular in time, so the bump stays small.
 *
 * Vectors indexed "by row" live in constraint space; vectors indexed
 * "by position" live in basis-column space.
 */
class BasisFactor {
public:
    /// Returns false when the basis is numerically singular.
    bool factorize(int m, std::vector<SparseVector> columns);

    /// In place: rhs by row -> solution of B x = rhs by position.
    void ftran(std::vector<double>& v) const;
    /// In place: costs by position -> solution of y^T B = c^T by row.
    void btran(std::vector<double>& v) const;

    /// Records the replacement of basis position pos; alpha = B^-1 a_entering (by position).
    void push_eta(int pos, const std::vector<double>& alpha);

    int eta_count() const { return static_cast<int>(etas_.size()); }
    size_t eta_nonzeros() const { return eta_nnz_; }
    int bump_size() const { return static_cast<int>(bump_rows_.size()); }

private:
    struct Pivot {
        int row;
        int col;
        double value;
    };
    struct Eta {
        int pos;
        double pivot;
        SparseVector others;
    };

    double entry(int row, int col) const;

    int m_ = 0;
    std::vector<SparseVector> columns_;
    std::vector<Pivot> col_singletons_;
    std::vector<Pivot> row_singletons_;
    std::vector<int> bump_rows_;
    std::vector<int> bump_cols_;
    std::vector<double> bump_lu_;    // k x k, row-major, L unit-lower and U packed
    std::vector<int> bump_perm_;     // row permutation of the partial pivoting
    std::vector<Eta> etas_;
    size_t eta_nnz_ = 0;
};

}  // namespace sprmab
