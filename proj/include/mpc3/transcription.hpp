#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "mpc3/chebyshev.hpp"
#include "mpc3/qp.hpp"

namespace mpc3 {

/// Weights, bounds and softness for one double-integrator degree of freedom.
/// Bounds are physical (N, m/s); infinite bounds are allowed.
struct AxisSpec {
    double W_u = 1.0;
    double W_x = 0.0;
    double W_xp = 0.0;
    double x_target = 0.0;
    double v_target = 0.0;
    double u_min = -std::numeric_limits<double>::infinity();
    double u_max = std::numeric_limits<double>::infinity();
    double V_u = 0.0;
    double v_min = -std::numeric_limits<double>::infinity();
    double v_max = std::numeric_limits<double>::infinity();
    double V_xp = 0.0;

    void validate() const;
};

/// One MPC3 instance: basis, horizon window, per-axis data and slack weight.
struct TranscriptionSpec {
    std::shared_ptr<const ChebyshevBasis> basis;
    TimeMap horizon{0.0, 2.5};
    std::vector<AxisSpec> axes;
    double rho = 1e4;
    double mass = 1.0;

    int order() const { return basis->order(); }
    int q() const { return static_cast<int>(axes.size()); }
    int coeffs() const { return basis->size(); }
    /// q(n+1) + 1.
    int dim() const { return q() * coeffs() + 1; }
    int slack_index() const { return dim() - 1; }
    int num_in() const { return 4 * coeffs() * q(); }
    int num_eq() const { return 2 * q(); }

    void validate() const;
};

TranscriptionSpec make_spec(int n, double horizon, std::vector<AxisSpec> axes,
                            double rho = 1e4, double mass = 1.0);

/// Physical <-> computational-domain conversions (x' = (dt/2) v,
/// x'' = (dt/2)^2 u / m).
double velocity_to_computational(const TranscriptionSpec& spec, double v);
double velocity_to_physical(const TranscriptionSpec& spec, double v_scaled);
double control_to_computational(const TranscriptionSpec& spec, double u);
double control_to_physical(const TranscriptionSpec& spec, double u_scaled);

/// Full QP for the current state (positions in m, velocities in m/s).
QpProblem build_qp(const TranscriptionSpec& spec, const Vector& x_now, const Vector& v_now);

/// The state-dependent parts of build_qp: f and b_in.
struct LinearTerms {
    Vector f;
    Vector b_in;
};
LinearTerms build_linear_terms(const TranscriptionSpec& spec, const Vector& x_now,
                               const Vector& v_now);

struct ControlSolution {
    Matrix alpha;     // (n+1) x q, computational-domain x''
    double epsilon = 0.0;
    Vector u_now;     // physical force at the start of the window
    double objective = 0.0;
    Vector chi;
    std::vector<int> active_set;
    QpStatus status = QpStatus::Optimal;
    int iterations = 0;
    Vector x0;        // state the solution was computed from
    Vector v0;

    bool ok() const { return status == QpStatus::Optimal; }
};

/// Unpacks a QP result computed for (x_now, v_now).
ControlSolution make_solution(const TranscriptionSpec& spec, const QpResult& result,
                              const Vector& x_now, const Vector& v_now);

/// Receding-horizon session. H, A_eq and A_in are built once; each step only
/// rebuilds f and b_in and warm-starts from the previous chi.
class Mpc3Controller {
public:
    explicit Mpc3Controller(TranscriptionSpec spec);

    const TranscriptionSpec& spec() const { return spec_; }
    /// Problem with the linear terms of the most recent step.
    const QpProblem& problem() const { return solver_.problem(); }
    const QpSolver& solver() const { return solver_; }

    /// Replaces the per-axis position and velocity targets. Only the linear
    /// terms depend on them, so the Hessian factor is kept.
    void set_targets(const Vector& x_target, const Vector& v_target);

    /// Loads the linear terms for (x_now, v_now) without solving.
    const QpProblem& prepare(const Vector& x_now, const Vector& v_now);

    ControlSolution solve_step(const Vector& x_now, const Vector& v_now,
                               const std::optional<WarmStart>& warm = std::nullopt);

    /// Solves a problem that extends problem() with extra inequality rows,
    /// sharing the Hessian factorisation.
    ControlSolution solve_extended(const QpProblem& extended, const Vector& x_now,
                                   const Vector& v_now,
                                   const std::optional<WarmStart>& warm = std::nullopt);

    /// Warm start seeded from the previous solution, if any.
    std::optional<WarmStart> previous_warm_start() const;

private:
    TranscriptionSpec spec_;
    QpSolver solver_;
    std::optional<WarmStart> previous_;
};

/// One-shot convenience wrapper around Mpc3Controller.
ControlSolution solve_step(const TranscriptionSpec& spec, const Vector& x_now,
                           const Vector& v_now,
                           const std::optional<WarmStart>& warm = std::nullopt);

struct TrajectorySample {
    Matrix x;  // times x q, metres
    Matrix v;  // m/s
    Matrix u;  // N
};

/// Evaluates the planned trajectory at absolute times inside spec.horizon.
TrajectorySample sample_trajectory(const ControlSolution& solution,
                                   const TranscriptionSpec& spec,
                                   const std::vector<double>& times);

/// Positions of axis `axis` at tau as an affine function of chi:
/// x(tau) = row * chi + offset.
struct AffinePosition {
    RowVector row;
    double offset = 0.0;
};
AffinePosition position_affine(const TranscriptionSpec& spec, int axis, double tau,
                               double x_now, double v_now);

}  // namespace mpc3
