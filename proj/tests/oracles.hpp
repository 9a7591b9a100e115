#pragma once

// Reference solvers used only by the tests. They are deliberately naive and
// share no code with the library routines they check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Euclidean projection onto {lo <= x <= hi, a'x = c} by bisection on the
/// hyperplane multiplier.
inline VectorXd project_box_hyperplane(const VectorXd& y, const VectorXd& lo, const VectorXd& hi,
                                       const VectorXd& a, double c) {
    auto at = [&](double mu) {
        VectorXd x = y - mu * a;
        return VectorXd(x.cwiseMax(lo).cwiseMin(hi));
    };
    double left = -1.0, right = 1.0;
    while (a.dot(at(left)) < c) left *= 2.0;
    while (a.dot(at(right)) > c) right *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (left + right);
        if (a.dot(at(mid)) > c) left = mid;
        else right = mid;
    }
    return at(0.5 * (left + right));
}

/// Projected gradient for min 1/2 x'Hx + f'x over a box intersected with a
/// hyperplane, iterated until successive iterates differ by < 1e-13.
inline VectorXd projected_gradient_box_hyperplane(const MatrixXd& H, const VectorXd& f,
                                                  const VectorXd& lo, const VectorXd& hi,
                                                  const VectorXd& a, double c) {
    const double L = Eigen::SelfAdjointEigenSolver<MatrixXd>(H).eigenvalues().maxCoeff();
    VectorXd x = project_box_hyperplane(VectorXd::Zero(f.size()), lo, hi, a, c);
    for (int it = 0; it < 2000000; ++it) {
        const VectorXd next = project_box_hyperplane(x - (H * x + f) / L, lo, hi, a, c);
        const double step = (next - x).cwiseAbs().maxCoeff();
        x = next;
        if (step < 1e-13) break;
    }
    return x;
}

/// Brute-force LP optimum by enumerating every basic solution of
/// min c'x s.t. A_in x <= b_in, A_eq x = b_eq (bounded problems only).
inline double vertex_enumeration_lp(const VectorXd& c, const MatrixXd& A_in, const VectorXd& b_in,
                                    const MatrixXd& A_eq, const VectorXd& b_eq) {
    const int n = static_cast<int>(c.size());
    const int m_in = static_cast<int>(A_in.rows());
    const int m_eq = static_cast<int>(A_eq.rows());
    const int pick = n - m_eq;
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> idx(pick);
    for (int i = 0; i < pick; ++i) idx[i] = i;
    if (pick > m_in) return best;
    for (;;) {
        MatrixXd M(n, n);
        VectorXd r(n);
        for (int i = 0; i < m_eq; ++i) {
            M.row(i) = A_eq.row(i);
            r(i) = b_eq(i);
        }
        for (int i = 0; i < pick; ++i) {
            M.row(m_eq + i) = A_in.row(idx[i]);
            r(m_eq + i) = b_in(idx[i]);
        }
        Eigen::FullPivLU<MatrixXd> lu(M);
        if (lu.rank() == n) {
            const VectorXd x = lu.solve(r);
            bool feasible = true;
            for (int i = 0; i < m_in && feasible; ++i)
                feasible = A_in.row(i).dot(x) <= b_in(i) + 1e-9;
            for (int i = 0; i < m_eq && feasible; ++i)
                feasible = std::abs(A_eq.row(i).dot(x) - b_eq(i)) <= 1e-9;
            if (feasible) best = std::min(best, c.dot(x));
        }
        int k = pick - 1;
        while (k >= 0 && idx[k] == m_in - pick + k) --k;
        if (k < 0) break;
        ++idx[k];
        for (int j = k + 1; j < pick; ++j) idx[j] = idx[j - 1] + 1;
    }
    return best;
}

/// Composite trapezoid rule of g over [a, b] with `panels` panels.
template <class F>
double trapezoid(F&& g, double a, double b, int panels) {
    const double h = (b - a) / panels;
    double sum = 0.5 * (g(a) + g(b));
    for (int i = 1; i < panels; ++i) sum += g(a + i * h);
    return sum * h;
}

/// Barycentric interpolant through values at first-kind Chebyshev points
/// cos((k + 1/2) pi / m), k = 0..m-1.
inline double chebyshev1_interpolant(const VectorXd& values, double x) {
    const int m = static_cast<int>(values.size());
    double num = 0.0, den = 0.0;
    for (int k = 0; k < m; ++k) {
        const double theta = (k + 0.5) * M_PI / m;
        const double node = std::cos(theta);
        const double wk = ((k % 2) ? -1.0 : 1.0) * std::sin(theta);
        if (x == node) return values(k);
        const double c = wk / (x - node);
        num += c * values(k);
        den += c;
    }
    return num / den;
}

/// Power-basis coefficients of T_j, lowest degree first.
inline std::vector<double> chebyshev_monomials(int j) {
    std::vector<double> prev{1.0}, cur{0.0, 1.0};
    if (j == 0) return prev;
    for (int k = 1; k < j; ++k) {
        std::vector<double> next(k + 2, 0.0);
        for (int i = 0; i <= k; ++i) next[i + 1] += 2.0 * cur[i];
        for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= prev[i];
        prev = cur;
        cur = next;
    }
    return cur;
}

/// Power-basis polynomial helpers.
inline double poly_eval(const std::vector<double>& c, double x) {
    double r = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) r = r * x + c[i];
    return r;
}

/// Antiderivative vanishing at x = -1.
inline std::vector<double> poly_integrate_from_minus_one(const std::vector<double>& c) {
    std::vector<double> out(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) out[i + 1] = c[i] / static_cast<double>(i + 1);
    out[0] = -poly_eval(out, -1.0);
    return out;
}

/// Power-basis coefficients of sum_j alpha_j T_j.
inline std::vector<double> chebyshev_series_monomials(const VectorXd& alpha) {
    std::vector<double> out(alpha.size(), 0.0);
    for (int j = 0; j < alpha.size(); ++j) {
        const std::vector<double> t = chebyshev_monomials(j);
        for (std::size_t i = 0; i < t.size(); ++i) out[i] += alpha(j) * t[i];
    }
    return out;
}

/// Is {x in R^3 : G x <= h} non-empty? Enumerates every vertex candidate
/// from triples of rows (the set is assumed bounded).
inline bool polyhedron3_nonempty(const MatrixXd& G, const VectorXd& h, double tol = 1e-12) {
    const int m = static_cast<int>(G.rows());
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            for (int k = j + 1; k < m; ++k) {
                Eigen::Matrix3d M;
                M << G.row(i), G.row(j), G.row(k);
                Eigen::FullPivLU<Eigen::Matrix3d> lu(M);
                if (lu.rank() < 3) continue;
                const Eigen::Vector3d x = lu.solve(Eigen::Vector3d(h(i), h(j), h(k)));
                if (((G * x - h).array() <= tol * (1.0 + h.cwiseAbs().maxCoeff())).all()) return true;
            }
    return false;
}

/// Smallest sigma with {N1 x <= sigma b1 + N1 c1} and {N2 x <= sigma b2 + N2 c2}
/// intersecting, found by bisection on the feasibility oracle above.
inline double bisection_scaling(const MatrixXd& N1, const VectorXd& b1, const VectorXd& c1,
                                const MatrixXd& N2, const VectorXd& b2, const VectorXd& c2) {
    MatrixXd G(N1.rows() + N2.rows(), 3);
    G << N1, N2;
    auto feasible = [&](double sigma) {
        VectorXd h(G.rows());
        h << sigma * b1 + N1 * c1, sigma * b2 + N2 * c2;
        return polyhedron3_nonempty(G, h);
    };
    double lo = 0.0, hi = 1.0;
    while (!feasible(hi)) hi *= 2.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid)) hi = mid;
        else lo = mid;
    }
    return hi;
}

}  // namespace oracles
