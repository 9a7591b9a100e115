#include "mpc3/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "mpc3/baseline.hpp"
#include "mpc3/report.hpp"
#include "mpc3/transcription.hpp"

namespace mpc3 {

namespace {

using Clock = std::chrono::steady_clock;

double micros(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::micro>(b - a).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Deterministic, non-trivial initial offsets.
Vector initial_positions(int q) {
    Vector x(q);
    for (int i = 0; i < q; ++i) x(i) = 0.5 * std::sin(1.0 + i);
    return x;
}

Vector initial_velocities(int q) {
    Vector v(q);
    for (int i = 0; i < q; ++i) v(i) = 0.01 * std::cos(1.0 + i);
    return v;
}

/// Receding-horizon steps timed per sample after the cold solve.
constexpr int kWarmSteps = 10;

struct Sample {
    double cold_us;
    std::vector<double> warm_us;
    int cold_it, warm_it;
};

Sample sample_mpc3(const TranscriptionSpec& spec, double Ts, BenchRow& row) {
    Vector x = initial_positions(spec.q());
    Vector v = initial_velocities(spec.q());
    const auto t0 = Clock::now();
    Mpc3Controller ctl(spec);
    ControlSolution sol = ctl.solve_step(x, v);
    const auto t1 = Clock::now();
    if (!sol.ok()) throw std::runtime_error("bench: MPC3 cold solve failed");
    Sample out{micros(t0, t1), {}, sol.iterations, 0};
    for (int k = 0; k < kWarmSteps; ++k) {
        const TrajectorySample next = sample_trajectory(sol, spec, {spec.horizon.t0() + Ts});
        x = next.x.row(0).transpose();
        v = next.v.row(0).transpose();
        const auto t2 = Clock::now();
        sol = ctl.solve_step(x, v);
        const auto t3 = Clock::now();
        if (!sol.ok()) throw std::runtime_error("bench: MPC3 warm solve failed");
        out.warm_us.push_back(micros(t2, t3));
        out.warm_it += sol.iterations;
    }
    out.warm_it /= kWarmSteps;
    row.dim = ctl.problem().dim();
    row.n_eq = ctl.problem().num_eq();
    row.n_in = ctl.problem().num_in();
    row.bytes = ctl.problem().footprint_bytes();
    return out;
}

Sample sample_discrete(const DiscreteMpcSpec& spec, BenchRow& row) {
    Vector x(spec.q());
    const Vector pos = initial_positions(spec.m());
    const Vector vel = initial_velocities(spec.m());
    for (int a = 0; a < spec.m(); ++a) {
        x(2 * a) = pos(a);
        x(2 * a + 1) = vel(a);
    }
    const auto t0 = Clock::now();
    DiscreteMpcController ctl(spec);
    DiscreteSolution sol = ctl.solve_step(x);
    const auto t1 = Clock::now();
    if (!sol.ok()) throw std::runtime_error("bench: discrete cold solve failed");
    Sample out{micros(t0, t1), {}, sol.iterations, 0};
    for (int k = 0; k < kWarmSteps; ++k) {
        x = spec.Ad * x + spec.Bd * sol.u_now;
        const auto t2 = Clock::now();
        sol = ctl.solve_step(x);
        const auto t3 = Clock::now();
        if (!sol.ok()) throw std::runtime_error("bench: discrete warm solve failed");
        out.warm_us.push_back(micros(t2, t3));
        out.warm_it += sol.iterations;
    }
    out.warm_it /= kWarmSteps;
    row.dim = ctl.problem().dim();
    row.n_eq = ctl.problem().num_eq();
    row.n_in = ctl.problem().num_in();
    row.bytes = ctl.problem().footprint_bytes();
    return out;
}

}  // namespace

const char* to_string(BenchMethod method) {
    return method == BenchMethod::Mpc3 ? "mpc3" : "discrete";
}

void BenchmarkCase::validate() const {
    if (q < 1 || q > 64) throw std::invalid_argument("bench: q must be in [1, 64]");
    if (p < 1 || p > 200) throw std::invalid_argument("bench: p must be in [1, 200]");
    if (n < 2 || n > 64) throw std::invalid_argument("bench: n must be in [2, 64]");
    if (repeats < 3) throw std::invalid_argument("bench: repeats must be at least 3");
    if (!(Ts > 0.0)) throw std::invalid_argument("bench: Ts must be positive");
    if (method == BenchMethod::Discrete && q % 2 != 0) {
        throw std::invalid_argument("bench: discrete q must be even (q/2 double integrators)");
    }
}

BenchRow run_benchmark(const BenchmarkCase& c) {
    c.validate();
    BenchRow row;
    row.method = c.method;
    row.q = c.q;
    row.p = c.p;
    row.n = c.n;

    std::function<Sample()> sample;
    TranscriptionSpec mpc3_spec;
    DiscreteMpcSpec discrete_spec;
    if (c.method == BenchMethod::Mpc3) {
        std::vector<AxisSpec> axes(c.q);
        for (AxisSpec& a : axes) {
            a.W_u = 1.0;
            a.W_x = 1.0;
            a.W_xp = 1.0;
            a.u_min = -0.01;
            a.u_max = 0.01;
            a.V_u = 0.01;
            a.v_min = -0.02;
            a.v_max = 0.02;
            a.V_xp = 0.1;
        }
        mpc3_spec = make_spec(c.n, c.p * c.Ts, std::move(axes));
        sample = [&] { return sample_mpc3(mpc3_spec, c.Ts, row); };
    } else {
        discrete_spec = double_integrator_spec(c.q / 2, c.Ts, c.p);
        discrete_spec.y_min = Vector::Constant(c.q, -10.0);
        discrete_spec.y_max = Vector::Constant(c.q, 10.0);
        sample = [&] { return sample_discrete(discrete_spec, row); };
    }

    sample();  // warmup
    std::vector<double> cold, warm;
    for (int r = 0; r < c.repeats; ++r) {
        const Sample s = sample();
        cold.push_back(s.cold_us);
        warm.insert(warm.end(), s.warm_us.begin(), s.warm_us.end());
        row.cold_iterations = s.cold_it;
        row.warm_iterations = s.warm_it;
    }
    row.cold_us = median(cold);
    row.warm_us = median(warm);
    return row;
}

std::vector<BenchmarkCase> default_bench_cases(int repeats) {
    std::vector<BenchmarkCase> out;
    for (BenchMethod m : {BenchMethod::Mpc3, BenchMethod::Discrete}) {
        for (int p : {5, 10, 15, 20}) {
            BenchmarkCase c;
            c.method = m;
            c.p = p;
            c.repeats = repeats;
            out.push_back(c);
        }
    }
    for (int q : {1, 3}) {
        BenchmarkCase c;
        c.q = q;
        c.repeats = repeats;
        out.push_back(c);
    }
    return out;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
    out << kSchemaLine << '\n' << "method,q,p,n,dim,n_eq,n_in,bytes,cold_us,warm_us\n";
    for (const BenchRow& r : rows) {
        out << to_string(r.method) << ',' << r.q << ',' << r.p << ',' << r.n << ',' << r.dim << ','
            << r.n_eq << ',' << r.n_in << ',' << r.bytes << ',' << format_double(r.cold_us) << ','
            << format_double(r.warm_us) << '\n';
    }
}

}  // namespace mpc3
