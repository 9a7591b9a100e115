#pragma once

#include <optional>

#include "mpc3/qp.hpp"

namespace mpc3 {

/// Condensed discrete MPC over x_{k+1} = Ad x_k + Bd u_k with y = x.
/// Weights are diagonals; bounds may be infinite.
struct DiscreteMpcSpec {
    Matrix Ad;
    Matrix Bd;
    double Ts = 0.5;
    int p = 5;
    Vector W_u;  // m
    Vector W_y;  // q
    Vector y_r;  // q
    Vector u_min, u_max;  // m
    Vector y_min, y_max;  // q

    int q() const { return static_cast<int>(Ad.rows()); }
    int m() const { return static_cast<int>(Bd.cols()); }
    /// p m decision variables.
    int dim() const { return p * m(); }
    /// 2 p q output-box rows plus 2 p m input rows when any input bound is finite.
    int num_in() const;

    void validate() const;
};

/// Exact zero-order-hold discretisation of `axes` decoupled double
/// integrators of mass `mass`. State order is [pos_0, vel_0, pos_1, vel_1, ...].
/// Weights default to W_u = 1, W_y = 1, zero reference, unbounded.
DiscreteMpcSpec double_integrator_spec(int axes, double Ts, int p, double mass = 1.0);

struct Condensed {
    Matrix S_x;  // (p q) x q
    Matrix S_u;  // (p q) x (p m), block lower triangular
};

/// Stacked prediction [x_{k+1}; ...; x_{k+p}] = S_x x_k + S_u [u_k; ...; u_{k+p-1}].
Condensed condense(const DiscreteMpcSpec& spec);

/// QP over the stacked input sequence for the current state.
QpProblem build_discrete_qp(const DiscreteMpcSpec& spec, const Condensed& c, const Vector& x_now);
QpProblem build_discrete_qp(const DiscreteMpcSpec& spec, const Vector& x_now);

struct DiscreteSolution {
    Vector u_sequence;  // p m
    Vector u_now;       // m
    Vector predicted;   // p q
    double objective = 0.0;
    QpStatus status = QpStatus::Optimal;
    int iterations = 0;

    bool ok() const { return status == QpStatus::Optimal; }
};

/// Receding-horizon session; H and A_in are built once.
class DiscreteMpcController {
public:
    explicit DiscreteMpcController(DiscreteMpcSpec spec);

    const DiscreteMpcSpec& spec() const { return spec_; }
    const Condensed& condensed() const { return condensed_; }
    const QpProblem& problem() const { return solver_.problem(); }
    const QpSolver& solver() const { return solver_; }

    const QpProblem& prepare(const Vector& x_now);
    DiscreteSolution solve_step(const Vector& x_now,
                                const std::optional<WarmStart>& warm = std::nullopt);

private:
    DiscreteMpcSpec spec_;
    Condensed condensed_;
    QpSolver solver_;
    std::optional<WarmStart> previous_;
};

DiscreteSolution solve_discrete_step(const DiscreteMpcSpec& spec, const Vector& x_now,
                                     const std::optional<WarmStart>& warm = std::nullopt);

}  // namespace mpc3
