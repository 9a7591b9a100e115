#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mpc3 {

enum class BenchMethod { Mpc3, Discrete };

const char* to_string(BenchMethod method);

/// One benchmark configuration. For the discrete baseline q is the state
/// dimension of q/2 double integrators, so q must be even.
struct BenchmarkCase {
    BenchMethod method = BenchMethod::Mpc3;
    int q = 6;
    int p = 5;         // horizon samples; MPC3 uses dt = p Ts
    int n = 3;
    int repeats = 5;
    double Ts = 0.5;

    void validate() const;
};

struct BenchRow {
    BenchMethod method = BenchMethod::Mpc3;
    int q = 0, p = 0, n = 0;
    int dim = 0, n_eq = 0, n_in = 0;
    std::size_t bytes = 0;   // entries held by the problem data times sizeof(double)
    double cold_us = 0.0;    // build, factorise and solve from scratch
    double warm_us = 0.0;    // one receding-horizon step warm-started from the previous one
    int cold_iterations = 0;
    int warm_iterations = 0; // mean over the closed-loop warm steps
};

/// Cold time: median over `repeats` samples after one untimed warmup. Warm
/// time: median over every receding-horizon step of those samples, each
/// sample following ten closed-loop steps from the cold solution.
BenchRow run_benchmark(const BenchmarkCase& c);

/// The standard sweep: both methods, q = 6, p in {5, 10, 15, 20}, n = 3,
/// plus MPC3 at q in {1, 3, 6}, p = 5.
std::vector<BenchmarkCase> default_bench_cases(int repeats = 5);

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace mpc3
