#include "mpc3/chebyshev.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mpc3 {

namespace {

constexpr double kDomainSlack = 1e-12;

void require_order(int n, int min_order) {
    if (n < min_order) {
        throw std::invalid_argument("Chebyshev order must be >= " +
                                    std::to_string(min_order) + ", got " +
                                    std::to_string(n));
    }
}

}  // namespace

double eval_chebyshev(int j, double tau) {
    if (j < 0) throw std::invalid_argument("Chebyshev index must be non-negative");
    if (!(std::abs(tau) <= 1.0 + kDomainSlack)) {
        throw std::domain_error("tau outside [-1, 1]: " + std::to_string(tau));
    }
    if (j == 0) return 1.0;
    double prev = 1.0;
    double curr = tau;
    for (int k = 1; k < j; ++k) {
        const double next = 2.0 * tau * curr - prev;
        prev = curr;
        curr = next;
    }
    return curr;
}

RowVector chebyshev_row(int count, double tau) {
    if (!(std::abs(tau) <= 1.0 + kDomainSlack)) {
        throw std::domain_error("tau outside [-1, 1]: " + std::to_string(tau));
    }
    RowVector row(count);
    if (count > 0) row(0) = 1.0;
    if (count > 1) row(1) = tau;
    for (int k = 2; k < count; ++k) row(k) = 2.0 * tau * row(k - 1) - row(k - 2);
    return row;
}

Vector cg_nodes(int n) {
    require_order(n, 1);
    const int count = n + 1;
    Vector tau(count);
    for (int k = 1; k <= count; ++k) {
        tau(k - 1) = std::cos((k - 0.5) * std::numbers::pi / count);
    }
    return tau;
}

Vector quadrature_weights(int n) {
    require_order(n, 1);
    const int count = n + 1;
    Vector w(count);
    for (int k = 1; k <= count; ++k) {
        const double theta = (k - 0.5) * std::numbers::pi / count;
        double sum = 0.0;
        for (int j = 1; j <= count / 2; ++j) {
            sum += std::cos(2.0 * j * theta) / (4.0 * j * j - 1.0);
        }
        w(k - 1) = 2.0 / count * (1.0 - 2.0 * sum);
    }
    return w;
}

TimeMap::TimeMap(double t0, double tf) : t0_(t0), tf_(tf) {
    if (!(tf > t0)) throw std::invalid_argument("TimeMap requires tf > t0");
}

double TimeMap::to_tau(double t) const {
    const double slack = 1e-12 * std::max(1.0, std::abs(tf_) + std::abs(t0_));
    if (t < t0_ - slack || t > tf_ + slack) {
        throw std::domain_error("time " + std::to_string(t) + " outside window [" +
                                std::to_string(t0_) + ", " + std::to_string(tf_) + "]");
    }
    return std::clamp((2.0 * t - (tf_ + t0_)) / dt(), -1.0, 1.0);
}

double TimeMap::to_time(double tau) const { return 0.5 * (dt() * tau + (tf_ + t0_)); }

Vector integrate_series(const Vector& coeffs) {
    const int m = static_cast<int>(coeffs.size());
    Vector out = Vector::Zero(m + 1);
    for (int j = 0; j < m; ++j) {
        const double c = coeffs(j);
        if (c == 0.0) continue;
        if (j == 0) {
            out(1) += c;
        } else if (j == 1) {
            out(2) += c / 4.0;
        } else {
            out(j + 1) += c / (2.0 * (j + 1));
            out(j - 1) -= c / (2.0 * (j - 1));
        }
    }
    // T_k(-1) = (-1)^k; shift the constant so the antiderivative vanishes at -1.
    double at_minus_one = 0.0;
    for (int k = 0; k <= m; ++k) at_minus_one += (k % 2 == 0 ? 1.0 : -1.0) * out(k);
    out(0) -= at_minus_one;
    return out;
}

ChebyshevBasis::ChebyshevBasis(int n) : n_(n) {
    require_order(n, 1);
    const int count = n + 1;
    nodes_ = cg_nodes(n);
    weights_ = quadrature_weights(n);

    beta_coef_ = Matrix::Zero(count + 1, count);
    gamma_coef_ = Matrix::Zero(count + 2, count);
    for (int j = 0; j < count; ++j) {
        Vector unit = Vector::Unit(count, j);
        const Vector first = integrate_series(unit);
        beta_coef_.col(j) = first;
        gamma_coef_.col(j) = integrate_series(first);
    }

    T_mat_.resize(count, count);
    beta_mat_.resize(count, count);
    gamma_mat_.resize(count, count);
    for (int i = 0; i < count; ++i) {
        T_mat_.row(i) = T_row(nodes_(i));
        beta_mat_.row(i) = beta_row(nodes_(i));
        gamma_mat_.row(i) = gamma_row(nodes_(i));
    }
    T_start_ = T_row(-1.0);
    beta_start_ = beta_row(-1.0);
    gamma_start_ = gamma_row(-1.0);
    T_lu_.compute(T_mat_);
}

RowVector ChebyshevBasis::T_row(double tau) const { return chebyshev_row(n_ + 1, tau); }

RowVector ChebyshevBasis::beta_row(double tau) const {
    return chebyshev_row(n_ + 2, tau) * beta_coef_;
}

RowVector ChebyshevBasis::gamma_row(double tau) const {
    return chebyshev_row(n_ + 3, tau) * gamma_coef_;
}

Matrix ChebyshevBasis::solve_T(const Matrix& values) const { return T_lu_.solve(values); }

IccConvergenceError::IccConvergenceError(int iterations, double residual)
    : std::runtime_error("ICC iteration did not converge after " +
                         std::to_string(iterations) +
                         " iterations (residual " + std::to_string(residual) + ")"),
      iterations_(iterations),
      residual_(residual) {}

IccResult icc_propagate(const SecondOrderField& dynamics, const Vector& x0,
                        const Vector& v0, const TimeMap& window, int n,
                        const IccOptions& options) {
    require_order(n, 3);
    if (x0.size() != v0.size()) {
        throw std::invalid_argument("icc_propagate: x0 and v0 sizes differ");
    }
    const ChebyshevBasis basis(n);
    const int count = basis.size();
    const int dim = static_cast<int>(x0.size());
    const double half = 0.5 * window.dt();

    // Initial conditions in computational units.
    const RowVector xs = x0.transpose();
    const RowVector vs = (half * v0).transpose();
    const Vector tau_plus_one = basis.nodes().array() + 1.0;

    Matrix alpha = Matrix::Zero(count, dim);
    if (options.initial_guess.size() > 0) {
        if (options.initial_guess.rows() != count || options.initial_guess.cols() != dim) {
            throw std::invalid_argument("icc_propagate: initial guess has wrong shape");
        }
        alpha = options.initial_guess;
    }

    Matrix accel(count, dim);
    double residual = 0.0;
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        const Matrix x_nodes =
            basis.gamma_mat() * alpha + tau_plus_one * vs + Vector::Ones(count) * xs;
        const Matrix v_nodes = basis.beta_mat() * alpha + Vector::Ones(count) * vs;
        for (int i = 0; i < count; ++i) {
            const double t = window.to_time(basis.nodes()(i));
            const Vector g = dynamics(t, x_nodes.row(i).transpose(),
                                      v_nodes.row(i).transpose() / half);
            if (g.size() != dim) {
                throw std::invalid_argument("icc_propagate: dynamics returned wrong size");
            }
            accel.row(i) = half * half * g.transpose();
        }
        const Matrix next = basis.solve_T(accel);
        residual = (next - alpha).cwiseAbs().maxCoeff();
        alpha = next;
        if (residual < options.tolerance) {
            IccResult out;
            const RowVector beta_end = basis.beta_row(1.0);
            const RowVector gamma_end = basis.gamma_row(1.0);
            out.x_final = (gamma_end * alpha + 2.0 * vs + xs).transpose();
            out.v_final = ((beta_end * alpha + vs) / half).transpose();
            out.coefficients = alpha;
            out.iterations = iter;
            out.residual = residual;
            return out;
        }
    }
    throw IccConvergenceError(options.max_iterations, residual);
}

}  // namespace mpc3
