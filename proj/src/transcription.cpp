#include "mpc3/transcription.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mpc3 {

void AxisSpec::validate() const {
    for (double w : {W_u, W_x, W_xp}) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("AxisSpec: weights must be finite and >= 0");
    }
    if (W_u + W_x + W_xp <= 0.0) throw std::invalid_argument("AxisSpec: at least one weight must be positive");
    if (!(u_min < u_max)) throw std::invalid_argument("AxisSpec: u_min must be < u_max");
    if (!(v_min < v_max)) throw std::invalid_argument("AxisSpec: v_min must be < v_max");
    if (!(V_u >= 0.0) || !(V_xp >= 0.0)) throw std::invalid_argument("AxisSpec: softness must be >= 0");
    if (!std::isfinite(x_target) || !std::isfinite(v_target)) {
        throw std::invalid_argument("AxisSpec: target must be finite");
    }
}

void TranscriptionSpec::validate() const {
    if (!basis) throw std::invalid_argument("TranscriptionSpec: missing basis");
    if (axes.empty()) throw std::invalid_argument("TranscriptionSpec: need at least one axis");
    if (!(rho > 0.0)) throw std::invalid_argument("TranscriptionSpec: rho must be > 0");
    if (!(mass > 0.0)) throw std::invalid_argument("TranscriptionSpec: mass must be > 0");
    for (const AxisSpec& a : axes) a.validate();
}

TranscriptionSpec make_spec(int n, double horizon, std::vector<AxisSpec> axes, double rho,
                            double mass) {
    TranscriptionSpec spec;
    spec.basis = std::make_shared<const ChebyshevBasis>(n);
    spec.horizon = TimeMap(0.0, horizon);
    spec.axes = std::move(axes);
    spec.rho = rho;
    spec.mass = mass;
    spec.validate();
    return spec;
}

double velocity_to_computational(const TranscriptionSpec& spec, double v) {
    return 0.5 * spec.horizon.dt() * v;
}

double velocity_to_physical(const TranscriptionSpec& spec, double v_scaled) {
    return v_scaled / (0.5 * spec.horizon.dt());
}

double control_to_computational(const TranscriptionSpec& spec, double u) {
    const double h = 0.5 * spec.horizon.dt();
    return h * h * u / spec.mass;
}

double control_to_physical(const TranscriptionSpec& spec, double u_scaled) {
    const double h = 0.5 * spec.horizon.dt();
    return u_scaled * spec.mass / (h * h);
}

namespace {

void check_state(const TranscriptionSpec& spec, const Vector& x_now, const Vector& v_now) {
    if (x_now.size() != spec.q() || v_now.size() != spec.q()) {
        throw std::invalid_argument("transcription: state has " + std::to_string(x_now.size()) +
                                    " entries, spec has " + std::to_string(spec.q()) + " axes");
    }
    if (!x_now.allFinite() || !v_now.allFinite()) {
        throw std::invalid_argument("transcription: non-finite state");
    }
}

}  // namespace

LinearTerms build_linear_terms(const TranscriptionSpec& spec, const Vector& x_now,
                               const Vector& v_now) {
    check_state(spec, x_now, v_now);
    const ChebyshevBasis& B = *spec.basis;
    const int c = B.size();
    const double dt = spec.horizon.dt();
    const Vector& w = B.weights();
    const Vector tau_plus_one = B.nodes().array() + 1.0;

    LinearTerms out;
    out.f = Vector::Zero(spec.dim());
    out.b_in = Vector(spec.num_in());
    for (int a = 0; a < spec.q(); ++a) {
        const AxisSpec& ax = spec.axes[a];
        const double xp0 = velocity_to_computational(spec, v_now(a));
        const double xpt = velocity_to_computational(spec, ax.v_target);
        const Vector pos_offset = (xp0 * tau_plus_one).array() + (x_now(a) - ax.x_target);
        const Vector pos_term = ax.W_x * w.cwiseProduct(pos_offset);
        const Vector vel_term = ax.W_xp * (xp0 - xpt) * w;
        out.f.segment(a * c, c) =
            dt * (B.gamma_mat().transpose() * pos_term + B.beta_mat().transpose() * vel_term);

        const int base = 4 * c * a;
        out.b_in.segment(base, c).setConstant(control_to_computational(spec, ax.u_max));
        out.b_in.segment(base + c, c).setConstant(-control_to_computational(spec, ax.u_min));
        out.b_in.segment(base + 2 * c, c)
            .setConstant(velocity_to_computational(spec, ax.v_max) - xp0);
        out.b_in.segment(base + 3 * c, c)
            .setConstant(-velocity_to_computational(spec, ax.v_min) + xp0);
    }
    return out;
}

QpProblem build_qp(const TranscriptionSpec& spec, const Vector& x_now, const Vector& v_now) {
    spec.validate();
    const ChebyshevBasis& B = *spec.basis;
    const int c = B.size();
    const int d = spec.dim();
    const int eps = spec.slack_index();
    const double dt = spec.horizon.dt();
    const auto W = B.weights().asDiagonal();

    QpProblem p;
    p.H = Matrix::Zero(d, d);
    p.A_eq = Matrix::Zero(spec.num_eq(), d);
    p.b_eq = Vector::Zero(spec.num_eq());
    p.A_in = Matrix::Zero(spec.num_in(), d);
    for (int a = 0; a < spec.q(); ++a) {
        const AxisSpec& ax = spec.axes[a];
        const Matrix& T = B.T_mat();
        const Matrix& beta = B.beta_mat();
        const Matrix& gamma = B.gamma_mat();
        Matrix Ha = dt * (ax.W_u * T.transpose() * W * T + ax.W_x * gamma.transpose() * W * gamma +
                          ax.W_xp * beta.transpose() * W * beta);
        p.H.block(a * c, a * c, c, c) = 0.5 * (Ha + Ha.transpose());

        p.A_eq.block(2 * a, a * c, 1, c) = B.gamma_start();
        p.A_eq.block(2 * a + 1, a * c, 1, c) = B.beta_start();

        const int base = 4 * c * a;
        p.A_in.block(base, a * c, c, c) = T;
        p.A_in.block(base + c, a * c, c, c) = -T;
        p.A_in.block(base + 2 * c, a * c, c, c) = beta;
        p.A_in.block(base + 3 * c, a * c, c, c) = -beta;
        p.A_in.block(base, eps, 2 * c, 1).setConstant(-ax.V_u);
        p.A_in.block(base + 2 * c, eps, 2 * c, 1).setConstant(-ax.V_xp);
    }
    p.H(eps, eps) = spec.rho;

    LinearTerms lin = build_linear_terms(spec, x_now, v_now);
    p.f = std::move(lin.f);
    p.b_in = std::move(lin.b_in);
    return p;
}

ControlSolution make_solution(const TranscriptionSpec& spec, const QpResult& result,
                              const Vector& x_now, const Vector& v_now) {
    const int c = spec.coeffs();
    ControlSolution s;
    s.status = result.status;
    s.iterations = result.iterations;
    s.objective = result.objective;
    s.chi = result.chi;
    s.active_set = result.active_set;
    s.x0 = x_now;
    s.v0 = v_now;
    s.alpha = Matrix(c, spec.q());
    s.u_now = Vector(spec.q());
    for (int a = 0; a < spec.q(); ++a) {
        s.alpha.col(a) = result.chi.segment(a * c, c);
        s.u_now(a) = control_to_physical(spec, spec.basis->T_start().dot(s.alpha.col(a)));
    }
    s.epsilon = result.chi(spec.slack_index());
    return s;
}

Mpc3Controller::Mpc3Controller(TranscriptionSpec spec)
    : spec_(std::move(spec)),
      solver_(build_qp(spec_, Vector::Zero(spec_.q()), Vector::Zero(spec_.q()))) {}

const QpProblem& Mpc3Controller::prepare(const Vector& x_now, const Vector& v_now) {
    LinearTerms lin = build_linear_terms(spec_, x_now, v_now);
    solver_.update_linear_terms(lin.f, lin.b_in);
    return solver_.problem();
}

void Mpc3Controller::set_targets(const Vector& x_target, const Vector& v_target) {
    if (x_target.size() != spec_.q() || v_target.size() != spec_.q()) {
        throw std::invalid_argument("Mpc3Controller::set_targets: size mismatch");
    }
    for (int a = 0; a < spec_.q(); ++a) {
        spec_.axes[a].x_target = x_target(a);
        spec_.axes[a].v_target = v_target(a);
    }
}

std::optional<WarmStart> Mpc3Controller::previous_warm_start() const { return previous_; }

ControlSolution Mpc3Controller::solve_step(const Vector& x_now, const Vector& v_now,
                                           const std::optional<WarmStart>& warm) {
    prepare(x_now, v_now);
    const QpResult r = solver_.solve(warm ? warm : previous_);
    ControlSolution s = make_solution(spec_, r, x_now, v_now);
    if (s.ok()) previous_ = WarmStart{r.chi, r.active_set};
    return s;
}

ControlSolution Mpc3Controller::solve_extended(const QpProblem& extended, const Vector& x_now,
                                               const Vector& v_now,
                                               const std::optional<WarmStart>& warm) {
    QpSolver ext(extended, solver_.hessian_factor());
    const QpResult r = ext.solve(warm);
    ControlSolution s = make_solution(spec_, r, x_now, v_now);
    if (s.ok()) {
        // Only rows of the base problem carry over to the next step.
        WarmStart next{r.chi, {}};
        for (int i : r.active_set)
            if (i < spec_.num_in()) next.active_set.push_back(i);
        previous_ = next;
    }
    return s;
}

ControlSolution solve_step(const TranscriptionSpec& spec, const Vector& x_now,
                           const Vector& v_now, const std::optional<WarmStart>& warm) {
    Mpc3Controller controller(spec);
    return controller.solve_step(x_now, v_now, warm);
}

TrajectorySample sample_trajectory(const ControlSolution& solution,
                                   const TranscriptionSpec& spec,
                                   const std::vector<double>& times) {
    const int q = spec.q();
    const int k = static_cast<int>(times.size());
    TrajectorySample out{Matrix(k, q), Matrix(k, q), Matrix(k, q)};
    for (int i = 0; i < k; ++i) {
        const double tau = spec.horizon.to_tau(times[i]);
        const RowVector T = spec.basis->T_row(tau);
        const RowVector beta = spec.basis->beta_row(tau);
        const RowVector gamma = spec.basis->gamma_row(tau);
        for (int a = 0; a < q; ++a) {
            const Vector alpha = solution.alpha.col(a);
            const double xp0 = velocity_to_computational(spec, solution.v0(a));
            out.u(i, a) = control_to_physical(spec, T.dot(alpha));
            out.v(i, a) = velocity_to_physical(spec, beta.dot(alpha) + xp0);
            out.x(i, a) = gamma.dot(alpha) + xp0 * (tau + 1.0) + solution.x0(a);
        }
    }
    return out;
}

AffinePosition position_affine(const TranscriptionSpec& spec, int axis, double tau,
                               double x_now, double v_now) {
    const int c = spec.coeffs();
    AffinePosition out;
    out.row = RowVector::Zero(spec.dim());
    out.row.segment(axis * c, c) = spec.basis->gamma_row(tau);
    out.offset = velocity_to_computational(spec, v_now) * (tau + 1.0) + x_now;
    return out;
}

}  // namespace mpc3
