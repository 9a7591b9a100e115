#include "mpc3/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "mpc3/chebyshev.hpp"
#include "mpc3/collision.hpp"
#include "mpc3/qp.hpp"

namespace mpc3 {

namespace {

std::string sci(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

/// Largest relative error of sum w_i tau_i^k against the exact moment, k <= n.
SuiteResult quadrature_suite(bool corrupt) {
    SuiteResult r{"quadrature", true, ""};
    double worst = 0.0;
    for (int n : {3, 5, 8, 12, 20}) {
        ChebyshevBasis basis(n);
        if (corrupt) {
            Vector w = basis.weights();
            w(0) *= 1.01;
            basis.override_weights(w);
        }
        for (int k = 0; k <= n; ++k) {
            const double exact = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
            double sum = 0.0;
            for (int i = 0; i < basis.size(); ++i)
                sum += basis.weights()(i) * std::pow(basis.nodes()(i), k);
            worst = std::max(worst, std::abs(sum - exact) / std::max(1.0, std::abs(exact)));
        }
    }
    r.passed = worst < 1e-12;
    r.detail = "max moment error " + sci(worst);
    return r;
}

/// x(tau) = (tau + 1)^k has x(-1) = x'(-1) = 0, so gamma and beta applied to
/// the node-fitted coefficients of x'' must return x and x' exactly.
SuiteResult integration_suite() {
    SuiteResult r{"integration", true, ""};
    double worst = 0.0;
    for (int n : {3, 6, 10}) {
        const ChebyshevBasis basis(n);
        for (int k = 2; k <= n + 2; ++k) {
            Vector acc(basis.size()), vel(basis.size()), pos(basis.size());
            for (int i = 0; i < basis.size(); ++i) {
                const double s = basis.nodes()(i) + 1.0;
                acc(i) = k * (k - 1) * std::pow(s, k - 2);
                vel(i) = k * std::pow(s, k - 1);
                pos(i) = std::pow(s, k);
            }
            const Vector alpha = basis.solve_T(acc);
            worst = std::max(worst, (basis.beta_mat() * alpha - vel).cwiseAbs().maxCoeff());
            worst = std::max(worst, (basis.gamma_mat() * alpha - pos).cwiseAbs().maxCoeff());
            worst = std::max(worst, std::abs(basis.beta_start().dot(alpha)));
            worst = std::max(worst, std::abs(basis.gamma_start().dot(alpha)));
        }
    }
    r.passed = worst < 1e-10;
    r.detail = "max operator error " + sci(worst);
    return r;
}

SuiteResult qp_suite() {
    SuiteResult r{"qp_kkt", true, ""};
    std::mt19937_64 rng(20240601);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    int failures = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 3 + trial % 6;
        const int m = 2 * d;
        Matrix M(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) M(i, j) = g(rng);
        QpProblem p;
        p.H = M * M.transpose() + Matrix::Identity(d, d);
        p.f = Vector(d);
        for (int i = 0; i < d; ++i) p.f(i) = 3.0 * g(rng);
        p.A_eq = Matrix(1, d);
        for (int j = 0; j < d; ++j) p.A_eq(0, j) = g(rng);
        p.b_eq = Vector::Zero(1);
        p.A_in = Matrix(m, d);
        p.b_in = Vector(m);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < d; ++j) p.A_in(i, j) = g(rng);
            p.b_in(i) = 0.5 + std::abs(g(rng));  // chi = 0 is strictly feasible
        }
        const QpResult res = solve_qp(p);
        if (!res.ok()) {
            ++failures;
            continue;
        }
        const KktResiduals k = kkt_residuals(p, res);
        worst = std::max({worst, k.stationarity, k.primal, k.complementarity, k.dual});
    }
    r.passed = failures == 0 && worst < 1e-8;
    r.detail = "max KKT residual " + sci(worst) + ", failed solves " + std::to_string(failures);
    return r;
}

/// Unit cubes separated along each axis by d: s = d (half-widths sum to 1).
SuiteResult dcol_suite() {
    SuiteResult r{"dcol_cubes", true, ""};
    double worst = 0.0;
    for (double d : {0.5, 1.0, 2.0}) {
        for (int axis = 0; axis < 3; ++axis) {
            Vec3 offset = Vec3::Zero();
            offset(axis) = d;
            const Polytope a = Polytope::box(Vec3::Constant(0.5), offset);
            const Polytope b = Polytope::box(Vec3::Constant(0.5));
            const CollisionResult c = scaling_factor(a, b);
            worst = std::max(worst, std::abs(c.s - d));
            Vec3 expected = Vec3::Zero();
            expected(axis) = 1.0;
            worst = std::max(worst, (c.grad_rc - expected).cwiseAbs().maxCoeff());
        }
    }
    r.passed = worst < 1e-8;
    r.detail = "max closed-form error " + sci(worst);
    return r;
}

}  // namespace

std::vector<SuiteResult> run_selftest(const SelftestOptions& options) {
    const std::vector<std::pair<std::string, std::function<SuiteResult()>>> suites = {
        {"quadrature", [&] { return quadrature_suite(options.corrupt_weights); }},
        {"integration", integration_suite},
        {"qp_kkt", qp_suite},
        {"dcol_cubes", dcol_suite},
    };
    std::vector<SuiteResult> out;
    for (const auto& [name, suite] : suites) {
        try {
            out.push_back(suite());
        } catch (const std::exception& e) {
            out.push_back({name, false, std::string("threw: ") + e.what()});
        }
    }
    return out;
}

int selftest_exit_code(const std::vector<SuiteResult>& results) {
    const auto failed = std::count_if(results.begin(), results.end(),
                                      [](const SuiteResult& r) { return !r.passed; });
    return static_cast<int>(std::min<long>(failed, 125));
}

void write_selftest_report(std::ostream& out, const std::vector<SuiteResult>& results) {
    for (const SuiteResult& r : results) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail << '\n';
    }
    out << selftest_exit_code(results) << " suite(s) failed\n";
}

}  // namespace mpc3
