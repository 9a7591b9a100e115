#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "mpc3/chebyshev.hpp"

namespace mpc3 {

/// Dense convex QP
///
///   minimise   1/2 chi' H chi + f' chi
///   subject to A_eq chi  = b_eq
///              A_in chi <= b_in
///
/// Multipliers follow the Lagrangian L = J + mu'(A_eq chi - b_eq) +
/// lambda'(A_in chi - b_in), so optimal inequality multipliers are >= 0.
struct QpProblem {
    Matrix H;
    Vector f;
    Matrix A_eq;
    Vector b_eq;
    Matrix A_in;
    Vector b_in;

    int dim() const { return static_cast<int>(H.rows()); }
    int num_eq() const { return static_cast<int>(A_eq.rows()); }
    int num_in() const { return static_cast<int>(A_in.rows()); }

    /// Throws std::invalid_argument on inconsistent shapes or asymmetric H.
    void validate() const;

    /// Entries held by H, f and the constraint blocks, times sizeof(double).
    std::size_t footprint_bytes() const;
};

struct WarmStart {
    Vector chi0;
    /// Inequality rows guessed active. When empty, rows active at chi0 are used.
    std::vector<int> active_set;
};

enum class QpStatus { Optimal, Infeasible, MaxIterations };

const char* to_string(QpStatus status);

struct QpResult {
    QpStatus status = QpStatus::Optimal;
    Vector chi;
    Vector eq_duals;
    Vector in_duals;
    std::vector<int> active_set;  // sorted inequality indices
    int iterations = 0;           // active-set changes (additions + drops)
    double objective = 0.0;
    /// Farkas certificate when Infeasible: A_eq'y_eq + A_in'y_in = 0,
    /// y_in >= 0 and b_eq'y_eq + b_in'y_in < 0.
    Vector certificate_eq;
    Vector certificate_in;

    bool ok() const { return status == QpStatus::Optimal; }
};

struct QpStats {
    int solves = 0;
    int factorizations = 0;
    int last_iterations = 0;
    double last_wall_us = 0.0;
};

/// Cholesky factor of H, shareable between solvers with the same Hessian.
class HessianFactor {
public:
    explicit HessianFactor(const Matrix& H);
    const Eigen::LLT<Matrix>& llt() const { return llt_; }
    const Matrix& L() const { return L_; }

private:
    Eigen::LLT<Matrix> llt_;
    Matrix L_;
};

/// KKT residuals of a candidate (chi, mu, lambda); used by tests and self-test.
struct KktResiduals {
    double stationarity = 0.0;
    double primal = 0.0;
    double complementarity = 0.0;
    double dual = 0.0;  // most negative inequality multiplier, clipped at 0
};

KktResiduals kkt_residuals(const QpProblem& problem, const QpResult& result);

/// Dual active-set (Goldfarb-Idnani) solver session. Keeps the Hessian
/// factorisation and the reduced equality rows across calls so receding-
/// horizon use only pays for the changed linear terms.
///
/// Not thread-safe; use one instance per thread.
class QpSolver {
public:
    explicit QpSolver(QpProblem problem,
                      std::shared_ptr<const HessianFactor> factor = nullptr);

    const QpProblem& problem() const { return problem_; }
    const QpStats& stats() const { return stats_; }
    std::shared_ptr<const HessianFactor> hessian_factor() const { return factor_; }

    /// Replaces f and b_in in place; the factorisation is kept.
    void update_linear_terms(const Vector& f, const Vector& b_in);
    void update_linear_terms(const Vector& f, const Vector& b_in, const Vector& b_eq);

    QpResult solve(const std::optional<WarmStart>& warm = std::nullopt);

private:
    QpProblem problem_;
    std::shared_ptr<const HessianFactor> factor_;
    std::vector<int> eq_rows_;  // linearly independent subset of A_eq rows
    Matrix metric_eq_;          // L^{-1} A_eq'
    Matrix metric_in_;          // L^{-1} A_in'
    QpStats stats_;
};

QpResult solve_qp(const QpProblem& problem,
                  const std::optional<WarmStart>& warm = std::nullopt);

/// Copy of `problem` with f and b_in replaced. Throws on dimension mismatch.
QpProblem update_linear_terms(QpProblem problem, const Vector& f_new, const Vector& b_new);

}  // namespace mpc3
