#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mpc3/bench.hpp"
#include "mpc3/report.hpp"
#include "mpc3/scenario_config.hpp"
#include "mpc3/selftest.hpp"
#include "mpc3/simulation.hpp"

using namespace mpc3;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

/// Config errors and runtime failures map to distinct exit codes.
class RuntimeFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ScenarioConfig load_or_default(const std::string& path) {
    return path.empty() ? ScenarioConfig{} : load_scenario(path);
}

/// Opens `path` for writing; "-" means stdout.
class Output {
public:
    explicit Output(const std::string& path) {
        if (path == "-") return;
        const std::filesystem::path p(path);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw RuntimeFailure("cannot write " + path);
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

int cmd_sim(const std::string& config_path, const std::string& out_path,
            std::optional<std::uint64_t> seed) {
    const ScenarioConfig config = load_or_default(config_path);
    const std::uint64_t run_seed = seed.value_or(config.plant.seed);
    const SimTrajectory tr = run_docking(config, run_seed);
    {
        Output out(out_path);
        write_trajectory_csv(out.stream(), tr);
    }
    const RunSummary summary = summarize(tr, config, 0, run_seed);
    write_summary(std::cout, summary);
    if (!tr.docked() || tr.collided) {
        std::cerr << "run failed: "
                  << (tr.collided ? "interpenetration while avoidance was active" : tr.message)
                  << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

int cmd_mc(const std::string& config_path, const std::string& out_dir,
           std::optional<std::uint64_t> seed, std::optional<int> runs, int jobs) {
    const ScenarioConfig config = load_or_default(config_path);
    const int count = runs.value_or(config.run.mc_runs);
    const MonteCarloResult mc =
        run_monte_carlo(config, count, seed.value_or(config.plant.seed), jobs);
    std::filesystem::create_directories(out_dir);
    {
        Output runs_out((std::filesystem::path(out_dir) / "runs.csv").string());
        write_runs_csv(runs_out.stream(), mc.runs);
        Output band_out((std::filesystem::path(out_dir) / "band.csv").string());
        write_band_csv(band_out.stream(), mc.band);
    }
    std::cout << "runs                    " << count << '\n'
              << "docked                  " << mc.docked << '\n'
              << "collided                " << mc.collided << '\n'
              << "s<1 while avoiding      " << mc.violations_during_avoidance << '\n';
    return kExitOk;
}

std::vector<BenchmarkCase> parse_cases(const std::string& spec, int repeats) {
    if (spec.empty()) return default_bench_cases(repeats);
    std::vector<BenchmarkCase> out;
    std::stringstream all(spec);
    std::string item;
    while (std::getline(all, item, ',')) {
        std::stringstream parts(item);
        std::string method, q, p, n;
        if (!std::getline(parts, method, ':') || !std::getline(parts, q, ':') ||
            !std::getline(parts, p, ':') || !std::getline(parts, n, ':')) {
            throw std::invalid_argument("bench case '" + item + "': expected method:q:p:n");
        }
        BenchmarkCase c;
        if (method == "mpc3") c.method = BenchMethod::Mpc3;
        else if (method == "discrete") c.method = BenchMethod::Discrete;
        else throw std::invalid_argument("bench case '" + item + "': unknown method " + method);
        try {
            c.q = std::stoi(q);
            c.p = std::stoi(p);
            c.n = std::stoi(n);
        } catch (const std::exception&) {
            throw std::invalid_argument("bench case '" + item + "': q, p and n must be integers");
        }
        c.repeats = repeats;
        c.validate();
        out.push_back(c);
    }
    return out;
}

int cmd_bench(const std::string& cases, int repeats, const std::string& out_path) {
    const std::vector<BenchmarkCase> list = parse_cases(cases, repeats);
    std::vector<BenchRow> rows;
    for (const BenchmarkCase& c : list) rows.push_back(run_benchmark(c));
    Output out(out_path);
    write_bench_csv(out.stream(), rows);
    return kExitOk;
}

int cmd_compare(const std::string& out_path) {
    const ComparisonResult r = compare_with_baseline(ComparisonConfig{});
    Output out(out_path);
    write_comparison_csv(out.stream(), r);
    std::cerr << "max position gap " << format_double(r.max_gap) << " of full scale "
              << format_double(r.full_scale) << '\n';
    return kExitOk;
}

int cmd_dump_basis(const std::string& config_path, std::optional<int> order,
                   const std::string& out_path) {
    const int n = order ? *order : load_or_default(config_path).controller.n;
    if (n < 2 || n > 64) throw std::invalid_argument("dump-basis: n must be in [2, 64]");
    Output out(out_path);
    write_basis_csv(out.stream(), ChebyshevBasis(n));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MPC3: integral Chebyshev collocation MPC with polytope collision avoidance"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    int jobs = 1;

    auto* sim = app.add_subcommand("sim", "Run one docking scenario and write its trajectory CSV");
    sim->add_option("--config", config_path, "Scenario YAML (defaults when omitted)");
    sim->add_option("--out", out_path, "Trajectory CSV path, '-' for stdout")->default_val("trajectory.csv");
    sim->add_option("--seed", seed, "Process-noise seed (overrides plant.seed)");

    std::optional<int> runs;
    auto* mc = app.add_subcommand("mc", "Monte Carlo batch of noisy docking runs");
    mc->add_option("--config", config_path, "Scenario YAML (defaults when omitted)");
    mc->add_option("--out", out_path, "Output directory for runs.csv and band.csv")->default_val("mc");
    mc->add_option("--seed", seed, "Master seed (overrides plant.seed)");
    mc->add_option("--runs", runs, "Number of runs (overrides run.mc_runs)")->check(CLI::PositiveNumber);
    mc->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    std::string cases;
    int repeats = 5;
    auto* bench = app.add_subcommand("bench", "Problem sizes and solve times versus q and horizon");
    bench->add_option("--cases", cases, "Comma-separated method:q:p:n list (default sweep when omitted)");
    bench->add_option("--repeats", repeats, "Timed repeats per case (>= 3)")->check(CLI::Range(3, 100000));
    bench->add_option("--out", out_path, "Benchmark CSV path, '-' for stdout")->default_val("-");

    bool corrupt = false;
    auto* selftest = app.add_subcommand("selftest", "Run the built-in operator oracles");
    selftest->add_flag("--corrupt-weights", corrupt)->group("");

    std::optional<int> order;
    auto* dump = app.add_subcommand("dump-basis", "Write Chebyshev nodes, weights and operators to CSV");
    dump->add_option("--config", config_path, "Scenario YAML supplying transcription.n");
    dump->add_option("--n", order, "Polynomial order (overrides the config)");
    dump->add_option("--out", out_path, "CSV path, '-' for stdout")->default_val("-");

    auto* compare = app.add_subcommand("compare", "Closed-loop MPC3 versus discrete MPC on a double integrator");
    compare->add_option("--out", out_path, "CSV path, '-' for stdout")->default_val("-");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (*sim) return guarded([&] { return cmd_sim(config_path, out_path, seed); });
    if (*mc) return guarded([&] { return cmd_mc(config_path, out_path, seed, runs, jobs); });
    if (*bench) return guarded([&] { return cmd_bench(cases, repeats, out_path); });
    if (*dump) return guarded([&] { return cmd_dump_basis(config_path, order, out_path); });
    if (*compare) return guarded([&] { return cmd_compare(out_path); });
    if (*selftest) {
        SelftestOptions options;
        options.corrupt_weights = corrupt;
        const std::vector<SuiteResult> results = run_selftest(options);
        write_selftest_report(std::cout, results);
        return selftest_exit_code(results);
    }
    return kExitConfig;
}
