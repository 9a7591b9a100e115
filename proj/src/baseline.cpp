#include "mpc3/baseline.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mpc3 {

namespace {

bool any_finite(const Vector& a, const Vector& b) {
    for (int i = 0; i < a.size(); ++i)
        if (std::isfinite(a(i)) || std::isfinite(b(i))) return true;
    return false;
}

Vector tile(const Vector& v, int times) {
    Vector out(v.size() * times);
    for (int k = 0; k < times; ++k) out.segment(k * v.size(), v.size()) = v;
    return out;
}

}  // namespace

int DiscreteMpcSpec::num_in() const {
    return 2 * p * q() + (any_finite(u_min, u_max) ? 2 * p * m() : 0);
}

void DiscreteMpcSpec::validate() const {
    const int nq = q();
    const int nm = m();
    if (Ad.cols() != nq || Bd.rows() != nq || nm < 1 || nq < 1) {
        throw std::invalid_argument("DiscreteMpcSpec: inconsistent Ad/Bd shapes");
    }
    if (p < 1) throw std::invalid_argument("DiscreteMpcSpec: p must be >= 1");
    if (!(Ts > 0.0)) throw std::invalid_argument("DiscreteMpcSpec: Ts must be > 0");
    if (W_u.size() != nm || u_min.size() != nm || u_max.size() != nm) {
        throw std::invalid_argument("DiscreteMpcSpec: input-sized vectors must have m entries");
    }
    if (W_y.size() != nq || y_r.size() != nq || y_min.size() != nq || y_max.size() != nq) {
        throw std::invalid_argument("DiscreteMpcSpec: output-sized vectors must have q entries");
    }
    if ((W_u.array() < 0.0).any() || (W_y.array() < 0.0).any()) {
        throw std::invalid_argument("DiscreteMpcSpec: weights must be >= 0");
    }
}

DiscreteMpcSpec double_integrator_spec(int axes, double Ts, int p, double mass) {
    if (axes < 1) throw std::invalid_argument("double_integrator_spec: axes must be >= 1");
    const double inf = std::numeric_limits<double>::infinity();
    DiscreteMpcSpec s;
    s.Ts = Ts;
    s.p = p;
    s.Ad = Matrix::Identity(2 * axes, 2 * axes);
    s.Bd = Matrix::Zero(2 * axes, axes);
    for (int a = 0; a < axes; ++a) {
        s.Ad(2 * a, 2 * a + 1) = Ts;
        s.Bd(2 * a, a) = 0.5 * Ts * Ts / mass;
        s.Bd(2 * a + 1, a) = Ts / mass;
    }
    s.W_u = Vector::Ones(axes);
    s.W_y = Vector::Ones(2 * axes);
    s.y_r = Vector::Zero(2 * axes);
    s.u_min = Vector::Constant(axes, -inf);
    s.u_max = Vector::Constant(axes, inf);
    s.y_min = Vector::Constant(2 * axes, -inf);
    s.y_max = Vector::Constant(2 * axes, inf);
    s.validate();
    return s;
}

Condensed condense(const DiscreteMpcSpec& spec) {
    spec.validate();
    const int q = spec.q(), m = spec.m(), p = spec.p;
    Condensed c{Matrix::Zero(p * q, q), Matrix::Zero(p * q, p * m)};
    // powers[k] = Ad^k
    std::vector<Matrix> powers(p + 1);
    powers[0] = Matrix::Identity(q, q);
    for (int k = 1; k <= p; ++k) powers[k] = spec.Ad * powers[k - 1];
    for (int i = 0; i < p; ++i) {
        c.S_x.block(i * q, 0, q, q) = powers[i + 1];
        for (int j = 0; j <= i; ++j) c.S_u.block(i * q, j * m, q, m) = powers[i - j] * spec.Bd;
    }
    return c;
}

QpProblem build_discrete_qp(const DiscreteMpcSpec& spec, const Condensed& c, const Vector& x_now) {
    if (x_now.size() != spec.q()) throw std::invalid_argument("build_discrete_qp: state size");
    const int p = spec.p;
    const Vector Wy = tile(spec.W_y, p);
    const Vector Wu = tile(spec.W_u, p);
    const Vector free_response = c.S_x * x_now;

    QpProblem qp;
    Matrix H = 2.0 * (c.S_u.transpose() * Wy.asDiagonal() * c.S_u);
    H.diagonal() += 2.0 * Wu;
    qp.H = 0.5 * (H + H.transpose());
    qp.f = 2.0 * c.S_u.transpose() * Wy.asDiagonal() * (free_response - tile(spec.y_r, p));
    qp.A_eq = Matrix(0, spec.dim());
    qp.b_eq = Vector(0);

    const int pq = p * spec.q();
    const int pm = p * spec.m();
    const bool input_rows = any_finite(spec.u_min, spec.u_max);
    qp.A_in = Matrix::Zero(spec.num_in(), pm);
    qp.b_in = Vector(spec.num_in());
    qp.A_in.topRows(pq) = c.S_u;
    qp.A_in.middleRows(pq, pq) = -c.S_u;
    qp.b_in.head(pq) = tile(spec.y_max, p) - free_response;
    qp.b_in.segment(pq, pq) = -tile(spec.y_min, p) + free_response;
    if (input_rows) {
        qp.A_in.block(2 * pq, 0, pm, pm) = Matrix::Identity(pm, pm);
        qp.A_in.block(2 * pq + pm, 0, pm, pm) = -Matrix::Identity(pm, pm);
        qp.b_in.segment(2 * pq, pm) = tile(spec.u_max, p);
        qp.b_in.segment(2 * pq + pm, pm) = -tile(spec.u_min, p);
    }
    return qp;
}

QpProblem build_discrete_qp(const DiscreteMpcSpec& spec, const Vector& x_now) {
    return build_discrete_qp(spec, condense(spec), x_now);
}

DiscreteMpcController::DiscreteMpcController(DiscreteMpcSpec spec)
    : spec_(std::move(spec)),
      condensed_(condense(spec_)),
      solver_(build_discrete_qp(spec_, condensed_, Vector::Zero(spec_.q()))) {}

const QpProblem& DiscreteMpcController::prepare(const Vector& x_now) {
    const QpProblem fresh = build_discrete_qp(spec_, condensed_, x_now);
    solver_.update_linear_terms(fresh.f, fresh.b_in);
    return solver_.problem();
}

DiscreteSolution DiscreteMpcController::solve_step(const Vector& x_now,
                                                   const std::optional<WarmStart>& warm) {
    prepare(x_now);
    const QpResult r = solver_.solve(warm ? warm : previous_);
    DiscreteSolution s;
    s.status = r.status;
    s.iterations = r.iterations;
    s.objective = r.objective;
    s.u_sequence = r.chi;
    s.u_now = r.chi.head(spec_.m());
    s.predicted = condensed_.S_x * x_now + condensed_.S_u * r.chi;
    if (r.ok()) previous_ = WarmStart{r.chi, r.active_set};
    return s;
}

DiscreteSolution solve_discrete_step(const DiscreteMpcSpec& spec, const Vector& x_now,
                                     const std::optional<WarmStart>& warm) {
    DiscreteMpcController ctl(spec);
    return ctl.solve_step(x_now, warm);
}

}  // namespace mpc3
