#include "mpc3/lp.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace mpc3 {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-10;
constexpr double kPhaseOneTol = 1e-9;

/// Standard-form tableau: rows are constraints, the last column is the RHS.
/// The objective row is kept separately as reduced costs.
struct Tableau {
    Matrix T;
    std::vector<int> basis;  // basic column per row
    int pivots = 0;

    int rows() const { return static_cast<int>(T.rows()); }
    int rhs_col() const { return static_cast<int>(T.cols()) - 1; }

    void pivot(int r, int c) {
        T.row(r) /= T(r, c);
        for (int i = 0; i < rows(); ++i) {
            if (i != r && T(i, c) != 0.0) T.row(i) -= T(i, c) * T.row(r);
        }
        basis[r] = c;
        ++pivots;
    }

    Vector reduced_costs(const Vector& cost) const {
        Vector rc = cost;
        for (int i = 0; i < rows(); ++i) {
            const double cb = cost(basis[i]);
            if (cb != 0.0) rc -= cb * T.row(i).head(cost.size()).transpose();
        }
        return rc;
    }

    /// Bland's rule simplex over columns [0, usable). Returns false if unbounded.
    bool run(const Vector& cost, int usable) {
        const int max_pivots = 50000;
        while (pivots < max_pivots) {
            const Vector rc = reduced_costs(cost);
            const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
            int enter = -1;
            for (int j = 0; j < usable; ++j) {
                if (rc(j) < -kCostTol * scale) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return true;
            int leave = -1;
            double best = 0.0;
            for (int i = 0; i < rows(); ++i) {
                const double a = T(i, enter);
                if (a <= kPivotTol) continue;
                const double ratio = T(i, rhs_col()) / a;
                if (leave < 0 || ratio < best - 1e-14 * std::max(1.0, std::abs(best)) ||
                    (std::abs(ratio - best) <= 1e-14 * std::max(1.0, std::abs(best)) &&
                     basis[i] < basis[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
        throw std::runtime_error("solve_lp: pivot limit reached");
    }
};

}  // namespace

const char* to_string(LpStatus status) {
    switch (status) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

LpResult solve_lp(const Vector& c, const Matrix& A_in, const Vector& b_in, const Matrix& A_eq,
                  const Vector& b_eq) {
    const int n = static_cast<int>(c.size());
    const int m_in = static_cast<int>(A_in.rows());
    const int m_eq = static_cast<int>(A_eq.rows());
    if ((m_in > 0 && A_in.cols() != n) || b_in.size() != m_in ||
        (m_eq > 0 && A_eq.cols() != n) || b_eq.size() != m_eq) {
        throw std::invalid_argument("solve_lp: dimension mismatch");
    }
    const int m = m_in + m_eq;

    // Columns: x+ (n), x- (n), inequality slacks (m_in), artificials.
    Matrix A_std = Matrix::Zero(m, 2 * n + m_in);
    Vector b_std(m);
    std::vector<double> sign(m, 1.0);
    for (int i = 0; i < m; ++i) {
        const bool is_in = i < m_in;
        const RowVector a = is_in ? RowVector(A_in.row(i)) : RowVector(A_eq.row(i - m_in));
        const double b = is_in ? b_in(i) : b_eq(i - m_in);
        sign[i] = b < 0.0 ? -1.0 : 1.0;
        A_std.block(i, 0, 1, n) = sign[i] * a;
        A_std.block(i, n, 1, n) = -sign[i] * a;
        if (is_in) A_std(i, 2 * n + i) = sign[i];
        b_std(i) = sign[i] * b;
    }

    std::vector<int> art_rows;
    for (int i = 0; i < m; ++i) {
        if (!(i < m_in && sign[i] > 0.0)) art_rows.push_back(i);
    }
    const int n_struct = 2 * n + m_in;
    const int n_cols = n_struct + static_cast<int>(art_rows.size());

    Tableau tab;
    tab.T = Matrix::Zero(m, n_cols + 1);
    tab.T.leftCols(n_struct) = A_std;
    tab.T.col(n_cols) = b_std;
    tab.basis.assign(m, -1);
    for (int i = 0; i < m_in; ++i) {
        if (sign[i] > 0.0) tab.basis[i] = 2 * n + i;
    }
    for (std::size_t k = 0; k < art_rows.size(); ++k) {
        tab.T(art_rows[k], n_struct + static_cast<int>(k)) = 1.0;
        tab.basis[art_rows[k]] = n_struct + static_cast<int>(k);
    }

    LpResult out;
    out.in_duals = Vector::Zero(m_in);
    out.eq_duals = Vector::Zero(m_eq);
    out.x = Vector::Zero(n);

    std::vector<int> row_origin(m);
    for (int i = 0; i < m; ++i) row_origin[i] = i;

    if (!art_rows.empty()) {
        Vector phase1 = Vector::Zero(n_cols);
        phase1.tail(art_rows.size()).setOnes();
        tab.run(phase1, n_cols);
        double infeas = 0.0;
        for (int i = 0; i < tab.rows(); ++i) {
            if (tab.basis[i] >= n_struct) infeas += tab.T(i, tab.rhs_col());
        }
        if (infeas > kPhaseOneTol * (1.0 + b_std.cwiseAbs().maxCoeff())) {
            out.status = LpStatus::Infeasible;
            out.pivots = tab.pivots;
            return out;
        }
        // Drive zero-level artificials out; drop rows that are redundant.
        for (int i = 0; i < tab.rows();) {
            if (tab.basis[i] < n_struct) {
                ++i;
                continue;
            }
            int col = -1;
            for (int j = 0; j < n_struct; ++j) {
                if (std::abs(tab.T(i, j)) > 1e-9) {
                    col = j;
                    break;
                }
            }
            if (col >= 0) {
                tab.pivot(i, col);
                ++i;
            } else {
                const int last = tab.rows() - 1;
                Matrix trimmed(last, tab.T.cols());
                trimmed << tab.T.topRows(i), tab.T.bottomRows(last - i);
                tab.T = trimmed;
                tab.basis.erase(tab.basis.begin() + i);
                row_origin.erase(row_origin.begin() + i);
            }
        }
    }

    Vector cost = Vector::Zero(n_cols);
    cost.head(n) = c;
    cost.segment(n, n) = -c;
    if (!tab.run(cost, n_struct)) {
        out.status = LpStatus::Unbounded;
        out.pivots = tab.pivots;
        return out;
    }
    out.pivots = tab.pivots;

    // Recompute the basic solution and duals from the original data.
    const int r = tab.rows();
    Matrix B(r, r);
    Vector b_red(r), c_b(r);
    for (int i = 0; i < r; ++i) {
        b_red(i) = b_std(row_origin[i]);
        c_b(i) = cost(tab.basis[i]);
        for (int k = 0; k < r; ++k) B(k, i) = A_std(row_origin[k], tab.basis[i]);
    }
    Vector full = Vector::Zero(n_struct);
    if (r > 0) {
        const Eigen::PartialPivLU<Matrix> lu(B);
        const Vector xb = lu.solve(b_red);
        const Vector pi = lu.transpose().solve(c_b);
        for (int i = 0; i < r; ++i) {
            full(tab.basis[i]) = xb(i);
            if (std::abs(xb(i)) <= 1e-10) out.degenerate = true;
            const int orig = row_origin[i];
            const double y = -sign[orig] * pi(i);
            if (orig < m_in) out.in_duals(orig) = y;
            else out.eq_duals(orig - m_in) = y;
        }
    }
    out.x = full.head(n) - full.segment(n, n);
    out.objective = c.dot(out.x);
    out.status = LpStatus::Optimal;
    return out;
}

}  // namespace mpc3
