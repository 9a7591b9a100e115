#include "doctest.h"

#include <random>

#include "mpc3/baseline.hpp"
#include "mpc3/transcription.hpp"

using namespace mpc3;

namespace {

Vector random_vector(std::mt19937_64& rng, int size) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(size);
    for (auto& e : v) e = g(rng);
    return v;
}

}  // namespace

TEST_CASE("zero-order-hold double integrator") {
    const DiscreteMpcSpec s = double_integrator_spec(1, 0.5, 5, 2.0);
    CHECK(s.Ad(0, 0) == 1.0);
    CHECK(s.Ad(0, 1) == 0.5);
    CHECK(s.Ad(1, 0) == 0.0);
    CHECK(s.Bd(0, 0) == doctest::Approx(0.0625));
    CHECK(s.Bd(1, 0) == doctest::Approx(0.25));
    // One ZOH step equals exact kinematics under constant force.
    Vector x(2);
    x << 0.3, -0.2;
    const Vector next = s.Ad * x + s.Bd * Vector::Constant(1, 0.8);
    CHECK(next(0) == doctest::Approx(0.3 - 0.2 * 0.5 + 0.5 * 0.4 * 0.25));
    CHECK(next(1) == doctest::Approx(-0.2 + 0.4 * 0.5));
}

TEST_CASE("condense examples") {
    SUBCASE("p = 1") {
        const DiscreteMpcSpec s = double_integrator_spec(2, 0.5, 1);
        const Condensed c = condense(s);
        CHECK(c.S_x == s.Ad);
        CHECK(c.S_u == s.Bd);
    }
    SUBCASE("frozen plant") {
        DiscreteMpcSpec s = double_integrator_spec(1, 0.5, 4);
        s.Ad = Matrix::Identity(2, 2);
        s.Bd = Matrix::Zero(2, 1);
        const Condensed c = condense(s);
        const Vector x = Eigen::Vector2d(0.4, -1.0);
        const Vector y = c.S_x * x + c.S_u * Vector::Ones(4);
        for (int k = 0; k < 4; ++k) CHECK(y.segment(2 * k, 2) == x);
    }
}

TEST_CASE("condensed prediction equals the recursion") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 30; ++trial) {
        const int axes = 1 + trial % 3;  // q = 2, 4, 6
        const int p = 1 + (trial * 7) % 20;
        DiscreteMpcSpec s = double_integrator_spec(axes, 0.5, p);
        if (trial % 4 == 0) {
            // A generic pair as well.
            s.Ad = Matrix::Identity(s.q(), s.q()) + 0.1 * Matrix(random_vector(rng, s.q() * s.q()).reshaped(s.q(), s.q()));
            s.Bd = Matrix(random_vector(rng, s.q() * s.m()).reshaped(s.q(), s.m()));
        }
        const Condensed c = condense(s);
        CHECK(c.S_x.rows() == p * s.q());
        CHECK(c.S_u.cols() == p * s.m());
        const Vector x0 = random_vector(rng, s.q());
        const Vector U = random_vector(rng, p * s.m());
        const Vector y = c.S_x * x0 + c.S_u * U;
        Vector x = x0;
        for (int k = 0; k < p; ++k) {
            x = s.Ad * x + s.Bd * U.segment(k * s.m(), s.m());
            CHECK((y.segment(k * s.q(), s.q()) - x).cwiseAbs().maxCoeff() <= 1e-10 * (1 + x.norm()));
        }
        // Block lower triangular.
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j)
                CHECK(c.S_u.block(i * s.q(), j * s.m(), s.q(), s.m()).isZero());
    }
}

TEST_CASE("discrete problem dimensions grow with the horizon") {
    for (int p : {5, 10, 15, 20}) {
        const DiscreteMpcSpec s = double_integrator_spec(3, 0.5, p);  // q = 6, m = 3
        const QpProblem qp = build_discrete_qp(s, Vector::Zero(6));
        CHECK(qp.dim() == 3 * p);
        CHECK(qp.num_in() == 2 * p * 6);
        CHECK(qp.num_eq() == 0);
    }
    DiscreteMpcSpec bounded = double_integrator_spec(1, 0.5, 5);
    bounded.u_max << 1.0;
    CHECK(bounded.num_in() == 2 * 5 * 2 + 2 * 5);
    CHECK(build_discrete_qp(bounded, Vector::Zero(2)).num_in() == bounded.num_in());
}

TEST_CASE("at rest on the reference the control is zero") {
    DiscreteMpcSpec s = double_integrator_spec(3, 0.5, 5);
    s.y_r << 0.1, 0, -0.2, 0, 0.3, 0;
    const DiscreteSolution sol = solve_discrete_step(s, s.y_r);
    REQUIRE(sol.ok());
    CHECK(sol.u_now.norm() < 1e-12);
}

TEST_CASE("cheap control tracks the reference") {
    // Position-only output weight: every predicted position hits the reference.
    DiscreteMpcSpec pos = double_integrator_spec(1, 0.5, 6);
    pos.W_u.setZero();
    pos.W_y << 1.0, 0.0;
    pos.y_r << 0.25, 0.0;
    const DiscreteSolution a = solve_discrete_step(pos, Eigen::Vector2d(1.0, -0.3));
    REQUIRE(a.ok());
    for (int k = 0; k < 6; ++k) CHECK(a.predicted(2 * k) == doctest::Approx(0.25).epsilon(1e-10));

    // Full-state output weight: terminal error shrinks towards zero with p.
    double previous = std::numeric_limits<double>::infinity();
    for (int p : {2, 3, 5, 10, 20}) {
        DiscreteMpcSpec s = double_integrator_spec(1, 0.5, p);
        s.W_u.setZero();
        const DiscreteSolution sol = solve_discrete_step(s, Eigen::Vector2d(1.0, -0.3));
        REQUIRE(sol.ok());
        const double err = sol.predicted.tail(2).norm();
        CHECK(err < previous);
        previous = err;
    }
    CHECK(previous < 1e-3);
}

TEST_CASE("output bounds are respected") {
    DiscreteMpcSpec s = double_integrator_spec(1, 0.5, 8);
    s.W_y << 10.0, 0.0;
    s.y_min << -10.0, -0.1;
    s.y_max << 10.0, 0.1;
    const DiscreteSolution sol = solve_discrete_step(s, Eigen::Vector2d(2.0, 0.0));
    REQUIRE(sol.ok());
    for (int k = 0; k < 8; ++k) CHECK(std::abs(sol.predicted(2 * k + 1)) <= 0.1 + 1e-9);
    CHECK(sol.u_now(0) < 0.0);
}

TEST_CASE("MPC3 size is horizon independent while the baseline grows") {
    AxisSpec axis;
    axis.W_x = 1.0;
    std::vector<int> mpc3_dims, base_dims;
    for (int p : {5, 10, 15, 20}) {
        const TranscriptionSpec spec = make_spec(3, 0.5 * p, std::vector<AxisSpec>(6, axis));
        const QpProblem a = build_qp(spec, Vector::Zero(6), Vector::Zero(6));
        mpc3_dims.push_back(a.dim() * 1000 + a.num_in());
        const QpProblem b = build_discrete_qp(double_integrator_spec(3, 0.5, p), Vector::Zero(6));
        base_dims.push_back(b.dim());
        CHECK(a.footprint_bytes() == build_qp(make_spec(3, 2.5, std::vector<AxisSpec>(6, axis)),
                                              Vector::Zero(6), Vector::Zero(6))
                                         .footprint_bytes());
    }
    CHECK(std::adjacent_find(mpc3_dims.begin(), mpc3_dims.end(), std::not_equal_to<>()) == mpc3_dims.end());
    CHECK(base_dims == std::vector<int>{15, 30, 45, 60});
}

TEST_CASE("warm-started repeat needs at most one iteration") {
    DiscreteMpcSpec s = double_integrator_spec(2, 0.5, 10);
    s.y_min = Vector::Constant(4, -0.05);
    s.y_min(0) = s.y_min(2) = -10;
    s.y_max = -s.y_min;
    DiscreteMpcController ctl(s);
    const Vector x = (Vector(4) << 1.0, 0.0, -0.5, 0.02).finished();
    const DiscreteSolution cold = ctl.solve_step(x);
    REQUIRE(cold.ok());
    const DiscreteSolution warm = ctl.solve_step(x);
    CHECK(warm.iterations <= 1);
    CHECK(ctl.solver().stats().factorizations == 1);
}

TEST_CASE("spec validation") {
    DiscreteMpcSpec s = double_integrator_spec(1, 0.5, 5);
    s.p = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = double_integrator_spec(1, 0.5, 5);
    s.W_u = Vector::Ones(2);
    CHECK_THROWS_AS(condense(s), std::invalid_argument);
    CHECK_THROWS_AS(double_integrator_spec(0, 0.5, 5), std::invalid_argument);
    CHECK_THROWS_AS(build_discrete_qp(double_integrator_spec(1, 0.5, 5), Vector::Zero(3)),
                    std::invalid_argument);
}
