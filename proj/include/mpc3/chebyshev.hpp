#pragma once

#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

namespace mpc3 {

using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Matrix = Eigen::MatrixXd;

/// T_j(tau) by the three-term recurrence. Throws std::domain_error for
/// |tau| > 1 beyond rounding slack.
double eval_chebyshev(int j, double tau);

/// Row [T_0(tau) ... T_{count-1}(tau)].
RowVector chebyshev_row(int count, double tau);

/// Roots of T_{n+1}, tau_{k-1} = cos((k - 1/2) pi / (n+1)), strictly decreasing.
Vector cg_nodes(int n);

/// Fejer first-rule weights on the n+1 CG nodes; exact for degree <= n.
Vector quadrature_weights(int n);

/// Linear map between a physical window [t0, tf] and tau in [-1, 1].
class TimeMap {
public:
    TimeMap(double t0, double tf);

    double t0() const { return t0_; }
    double tf() const { return tf_; }
    double dt() const { return tf_ - t0_; }

    /// Throws std::domain_error outside [t0, tf].
    double to_tau(double t) const;
    double to_time(double tau) const;

private:
    double t0_;
    double tf_;
};

/// Chebyshev coefficients of the antiderivative of the series `coeffs`,
/// normalised to vanish at tau = -1. Result has one more entry.
Vector integrate_series(const Vector& coeffs);

/// Constant collocation data for a fixed order n: nodes, weights and the
/// second-derivative / first-integral / second-integral operators sampled at
/// the nodes and at tau = -1.
///
/// For coefficients alpha of x''(tau) = T(tau) alpha:
///   x'(tau) = beta(tau) alpha + x'(-1)
///   x(tau)  = gamma(tau) alpha + x'(-1) (tau + 1) + x(-1)
///
/// Immutable once built.
class ChebyshevBasis {
public:
    explicit ChebyshevBasis(int n);

    int order() const { return n_; }
    int size() const { return n_ + 1; }

    const Vector& nodes() const { return nodes_; }
    const Vector& weights() const { return weights_; }

    const Matrix& T_mat() const { return T_mat_; }
    const Matrix& beta_mat() const { return beta_mat_; }
    const Matrix& gamma_mat() const { return gamma_mat_; }

    const RowVector& T_start() const { return T_start_; }
    const RowVector& beta_start() const { return beta_start_; }
    const RowVector& gamma_start() const { return gamma_start_; }

    RowVector T_row(double tau) const;
    RowVector beta_row(double tau) const;
    RowVector gamma_row(double tau) const;

    /// Solves T_mat * alpha = values (values sampled at the nodes).
    Matrix solve_T(const Matrix& values) const;

    /// Test hook: replaces the quadrature weights. Only used to exercise
    /// failure paths of the self-test.
    void override_weights(const Vector& w) { weights_ = w; }

private:
    int n_;
    Vector nodes_;
    Vector weights_;
    Matrix T_mat_;
    Matrix beta_coef_;   // (n+2) x (n+1): Chebyshev coefficients of each first integral
    Matrix gamma_coef_;  // (n+3) x (n+1)
    Matrix beta_mat_;
    Matrix gamma_mat_;
    RowVector T_start_;
    RowVector beta_start_;
    RowVector gamma_start_;
    Eigen::PartialPivLU<Matrix> T_lu_;
};

/// Thrown by icc_propagate when the fixed-point iteration stalls.
class IccConvergenceError : public std::runtime_error {
public:
    IccConvergenceError(int iterations, double residual);
    int iterations() const { return iterations_; }
    double residual() const { return residual_; }

private:
    int iterations_;
    double residual_;
};

/// Second-order vector field: returns x_ddot(t, x, x_dot).
using SecondOrderField =
    std::function<Vector(double t, const Vector& x, const Vector& v)>;

struct IccOptions {
    double tolerance = 1e-12;
    int max_iterations = 100;
    /// Initial (n+1) x dim coefficient guess; zero when empty.
    Matrix initial_guess;
};

struct IccResult {
    Vector x_final;
    Vector v_final;
    Matrix coefficients;  // (n+1) x dim, computational-domain x''
    int iterations = 0;
    double residual = 0.0;
};

/// Integrates x'' = g(t, x, x') over `window` with integral Chebyshev
/// collocation and Picard iteration on the coefficients.
IccResult icc_propagate(const SecondOrderField& dynamics, const Vector& x0,
                        const Vector& v0, const TimeMap& window, int n,
                        const IccOptions& options = {});

}  // namespace mpc3
