#include <cmath>
#include <sstream>

#include "sprmab/lp.hpp"

namespace sprmab {

namespace {

std::string var_name(const LpProblem& lp, int j) {
    const auto& name = lp.var_names()[j];
    return name.empty() ? "x" + std::to_string(j) : name;
}

std::string row_name(const LpRow& row, int i) { return row.name.empty() ? "c" + std::to_string(i) : row.name; }

// Writes " + 2 x - 0.5 y", wrapping long expressions.
void write_terms(std::ostringstream& os, const LpProblem& lp, const std::vector<int>& index,
                 const std::vector<double>& value) {
    os.precision(17);
    if (index.empty()) {
        os << " 0 " << var_name(lp, 0);
        return;
    }
    for (size_t k = 0; k < index.size(); ++k) {
        const double v = value[k];
        os << (v < 0.0 ? " - " : " + ") << std::abs(v) << ' ' << var_name(lp, index[k]);
        if (k % 8 == 7) os << "\n   ";
    }
}

}  // namespace

std::string to_lp_format(const LpProblem& lp) {
    std::ostringstream os;
    os.precision(17);
    os << "\\ " << lp.n_vars() << " variables, " << lp.n_rows() << " rows\n";
    os << "Maximize\n obj:";
    std::vector<int> idx;
    std::vector<double> val;
    for (int j = 0; j < lp.n_vars(); ++j) {
        if (lp.objective()[j] == 0.0) continue;
        idx.push_back(j);
        val.push_back(lp.objective()[j]);
    }
    if (lp.n_vars() > 0) write_terms(os, lp, idx, val);
    os << "\nSubject To\n";
    for (int i = 0; i < lp.n_rows(); ++i) {
        const auto& row = lp.rows()[i];
        os << ' ' << row_name(row, i) << ':';
        write_terms(os, lp, row.index, row.value);
        switch (row.relation) {
        case Relation::LessEqual: os << " <= "; break;
        case Relation::Equal: os << " = "; break;
        case Relation::GreaterEqual: os << " >= "; break;
        }
        os << row.rhs << '\n';
    }
    os << "Bounds\n";
    for (int j = 0; j < lp.n_vars(); ++j) {
        const double lo = lp.lower()[j];
        const double hi = lp.upper()[j];
        const auto name = var_name(lp, j);
        if (!std::isfinite(lo) && !std::isfinite(hi)) {
            os << ' ' << name << " free\n";
        } else if (lo == 0.0 && !std::isfinite(hi)) {
            continue;
        } else {
            os << ' ';
            if (std::isfinite(lo)) os << lo;
            else os << "-inf";
            os << " <= " << name << " <= ";
            if (std::isfinite(hi)) os << hi;
            else os << "+inf";
            os << '\n';
        }
    }
    os << "End\n";
    return os.str();
}

}  // namespace sprmab
