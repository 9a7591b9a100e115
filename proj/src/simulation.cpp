#include "mpc3/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

namespace mpc3 {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

Polytope cube_or_hull(const std::vector<Vec3>& vertices, double half_width, const Vec3& center) {
    if (vertices.empty()) return Polytope::box(Vec3::Constant(half_width), center);
    return Polytope::from_vertices(vertices, center);
}

/// Linear interpolation between order statistics.
double quantile(std::vector<double>& sorted, double level) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = level * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile_of(std::vector<double> values, double level) {
    std::sort(values.begin(), values.end());
    return quantile(values, level);
}

}  // namespace

PlantState step_plant(const PlantState& state, const Vec3& u, double mass, double dt,
                      double noise_std, std::mt19937_64* rng, const PerturbationHook& hook) {
    require(mass > 0.0 && dt > 0.0, "step_plant: mass and dt must be positive");
    require(noise_std >= 0.0, "step_plant: noise_std must be non-negative");
    const Vec3 a = u / mass;
    PlantState next;
    next.r = state.r + state.v * dt + 0.5 * a * dt * dt;
    next.v = state.v + a * dt;
    next.t = state.t + dt;
    if (hook) hook(next, u, dt);
    if (noise_std > 0.0 && rng != nullptr) {
        std::normal_distribution<double> noise(0.0, noise_std);
        for (int k = 0; k < 3; ++k) next.v(k) += noise(*rng);
    }
    return next;
}

const char* to_string(GuidanceMode mode) {
    switch (mode) {
        case GuidanceMode::Approach: return "APPROACH";
        case GuidanceMode::Align: return "ALIGN";
        case GuidanceMode::Dock: return "DOCK";
    }
    return "UNKNOWN";
}

const char* to_string(RunStatus status) {
    switch (status) {
        case RunStatus::Docked: return "docked";
        case RunStatus::Timeout: return "timeout";
        case RunStatus::SolverFailure: return "solver_failure";
    }
    return "unknown";
}

Vec3 GuidanceConfig::align_point() const {
    return target_position + align_standoff * port_normal.normalized();
}

Vec3 GuidanceConfig::dock_point() const {
    return target_position + dock_standoff * port_normal.normalized();
}

void GuidanceConfig::validate() const {
    require(target_position.allFinite() && approach_waypoint.allFinite(),
            "guidance: positions must be finite");
    require(port_normal.allFinite() && port_normal.norm() > 1e-9,
            "guidance: port_normal must be a non-zero vector");
    require(dock_standoff > 0.0 && align_standoff > dock_standoff,
            "guidance: need 0 < dock_standoff < align_standoff");
    require(port_plane >= 0.0 && port_plane < align_standoff,
            "guidance: need 0 <= port_plane < align_standoff");
    require(approach_radius > align_radius && align_radius > 0.0,
            "guidance: transition radii must strictly decrease (approach > align > 0)");
    require(hysteresis >= 1.0, "guidance: hysteresis must be >= 1");
    require(dock_tolerance > 0.0 && dock_speed > 0.0,
            "guidance: dock tolerance and speed must be positive");
}

GuidanceOutput guidance_update(const PlantState& state, const GuidanceConfig& config,
                               GuidanceMode current) {
    const Vec3 n = config.port_normal.normalized();
    const Vec3 rel = state.r - config.target_position;
    const double axial = rel.dot(n);
    const double lateral = (rel - axial * n).norm();
    const double to_align = (state.r - config.align_point()).norm();

    GuidanceMode next = current;
    switch (current) {
        case GuidanceMode::Approach:
            if (axial > config.port_plane && to_align < config.approach_radius)
                next = GuidanceMode::Align;
            break;
        case GuidanceMode::Align:
            if (to_align < config.align_radius)
                next = GuidanceMode::Dock;
            else if (to_align > config.hysteresis * config.approach_radius)
                next = GuidanceMode::Approach;
            break;
        case GuidanceMode::Dock:
            if (lateral > config.hysteresis * config.align_radius) next = GuidanceMode::Align;
            break;
    }

    GuidanceOutput out;
    out.mode = next;
    out.transitioned = next != current;
    switch (next) {
        case GuidanceMode::Approach: out.position = config.approach_waypoint; break;
        case GuidanceMode::Align: out.position = config.align_point(); break;
        case GuidanceMode::Dock: out.position = config.dock_point(); break;
    }
    return out;
}

void ScenarioConfig::validate() const {
    require(plant.mass > 0.0, "plant.mass must be positive");
    require(plant.noise_std >= 0.0, "plant.noise_std must be non-negative");
    require(plant.u_max >= 0.0, "plant.u_max must be non-negative");
    require(controller.n >= 2, "transcription.n must be at least 2");
    require(controller.horizon > 0.0, "transcription.horizon must be positive");
    require(controller.rho > 0.0, "transcription.rho must be positive");
    require(controller.W_u > 0.0, "transcription.W_u must be positive");
    require(controller.W_x >= 0.0 && controller.W_xp >= 0.0,
            "transcription weights must be non-negative");
    require(controller.u_limit > 0.0 && controller.v_limit > 0.0,
            "transcription limits must be positive");
    require(controller.V_u >= 0.0 && controller.V_xp >= 0.0,
            "transcription softness must be non-negative");
    guidance.validate();
    require(collision.chaser_half_width > 0.0 && collision.target_half_width > 0.0,
            "collision half widths must be positive");
    require(collision.s_thr >= 1.0, "collision.s_thr must be >= 1");
    require(collision.activation_radius > 0.0, "collision.activation_radius must be positive");
    require(collision.softness >= 0.0, "collision.softness must be non-negative");
    require(run.Ts > 0.0 && run.Ts <= controller.horizon,
            "run.Ts must be positive and not exceed the horizon");
    require(run.timeout >= 0.0, "run.timeout must be non-negative");
    require(run.mc_runs >= 1, "run.mc_runs must be at least 1");
    require(run.initial_position.allFinite() && run.initial_velocity.allFinite(),
            "run initial state must be finite");
    chaser_polytope();
    target_polytope();
}

Polytope ScenarioConfig::chaser_polytope() const {
    return cube_or_hull(collision.chaser_vertices, collision.chaser_half_width,
                        run.initial_position);
}

Polytope ScenarioConfig::target_polytope() const {
    return cube_or_hull(collision.target_vertices, collision.target_half_width,
                        guidance.target_position);
}

TranscriptionSpec ScenarioConfig::transcription() const {
    const ControllerConfig& c = controller;
    std::vector<AxisSpec> axes(3);
    for (AxisSpec& a : axes) {
        a.W_u = c.W_u;
        a.W_x = c.W_x;
        a.W_xp = c.W_xp;
        a.u_min = -c.u_limit;
        a.u_max = c.u_limit;
        a.V_u = c.V_u;
        a.v_min = -c.v_limit;
        a.v_max = c.v_limit;
        a.V_xp = c.V_xp;
    }
    return make_spec(c.n, c.horizon, std::move(axes), c.rho, plant.mass);
}

SimTrajectory run_docking(const ScenarioConfig& config) {
    return run_docking(config, config.plant.seed);
}

SimTrajectory run_docking(const ScenarioConfig& config, std::uint64_t seed,
                          const StepObserver& observer) {
    config.validate();
    const TranscriptionSpec spec = config.transcription();
    Mpc3Controller controller(spec);
    Polytope chaser = config.chaser_polytope();
    const Polytope target = config.target_polytope();
    AvoidanceConfig avoidance;
    avoidance.s_thr = config.collision.s_thr;
    avoidance.softness = config.collision.softness;

    std::mt19937_64 rng(seed);
    PlantState state{config.run.initial_position, config.run.initial_velocity, 0.0};
    GuidanceMode mode = GuidanceMode::Approach;
    const Vec3 dock = config.guidance.dock_point();
    const double u_sat = config.plant.u_max > 0.0 ? config.plant.u_max : config.controller.u_limit;
    const int max_steps = static_cast<int>(std::ceil(config.run.timeout / config.run.Ts - 1e-9));

    SimTrajectory out;
    out.steps.reserve(max_steps + 1);
    for (int k = 0; k < max_steps; ++k) {
        const GuidanceOutput g = guidance_update(state, config.guidance, mode);
        mode = g.mode;
        controller.set_targets(g.position, g.velocity);

        SimStep step;
        step.t = state.t;
        step.r = state.r;
        step.v = state.v;
        step.mode = mode;
        chaser.center = state.r;
        step.s = scaling_factor(chaser, target).s;
        step.avoidance_active = config.collision.enabled && mode != GuidanceMode::Dock &&
                                (state.r - target.center).norm() < config.collision.activation_radius;
        if (step.avoidance_active && step.s < 1.0) out.collided = true;

        ControlSolution sol = controller.solve_step(state.r, state.v);
        step.qp_iterations = sol.iterations;
        if (sol.ok() && step.avoidance_active) {
            const Injection inj =
                inject_avoidance(controller.problem(), spec, sol, chaser, target, avoidance);
            step.plan_min_s = inj.min_s;
            if (inj.rows_added > 0) {
                step.rows_injected = inj.rows_added;
                sol = controller.solve_extended(inj.problem, state.r, state.v,
                                                WarmStart{sol.chi, sol.active_set});
                step.qp_iterations += sol.iterations;
                if (sol.ok()) {
                    step.plan_min_s =
                        inject_avoidance(controller.problem(), spec, sol, chaser, target, avoidance)
                            .min_s;
                }
            }
        }
        if (!sol.ok()) {
            out.status = RunStatus::SolverFailure;
            out.failed_step = k;
            out.message = std::string("QP ") + to_string(sol.status) + " at step " +
                          std::to_string(k) + " (t = " + std::to_string(state.t) + " s)";
            out.steps.push_back(step);
            return out;
        }
        if (observer) observer(k, sol, spec);
        Vec3 u = sol.u_now;
        if (config.run.hold == ControlHold::Average) {
            const TrajectorySample plan =
                sample_trajectory(sol, spec, {spec.horizon.t0() + config.run.Ts});
            u = config.plant.mass * (plan.v.row(0).transpose() - state.v) / config.run.Ts;
        }
        step.u = u.cwiseMax(-u_sat).cwiseMin(u_sat);
        step.epsilon = sol.epsilon;
        out.steps.push_back(step);

        state = step_plant(state, step.u, config.plant.mass, config.run.Ts,
                           config.plant.noise_std, &rng);

        if (mode == GuidanceMode::Dock && (state.r - dock).norm() < config.guidance.dock_tolerance &&
            state.v.norm() < config.guidance.dock_speed) {
            SimStep final_step;
            final_step.t = state.t;
            final_step.r = state.r;
            final_step.v = state.v;
            final_step.mode = mode;
            chaser.center = state.r;
            final_step.s = scaling_factor(chaser, target).s;
            out.steps.push_back(final_step);
            out.status = RunStatus::Docked;
            return out;
        }
    }
    out.status = RunStatus::Timeout;
    out.message = "not docked after " + std::to_string(config.run.timeout) + " s";
    return out;
}

RunSummary summarize(const SimTrajectory& trajectory, const ScenarioConfig& config, int run,
                     std::uint64_t seed) {
    RunSummary s;
    s.run = run;
    s.seed = seed;
    s.status = trajectory.status;
    s.docked = trajectory.docked();
    s.collided = trajectory.collided;
    s.message = trajectory.message;
    s.steps = static_cast<int>(trajectory.steps.size());
    s.min_s = kInf;
    s.min_s_all = kInf;
    std::vector<double> injected;
    for (std::size_t k = 0; k < trajectory.steps.size(); ++k) {
        const SimStep& st = trajectory.steps[k];
        s.min_s_all = std::min(s.min_s_all, st.s);
        if (st.avoidance_active) s.min_s = std::min(s.min_s, st.s);
        if (st.rows_injected > 0) injected.push_back(st.s);
        s.effort += st.u.norm() * config.run.Ts;
        if (k > 0) s.control_tv += (st.u - trajectory.steps[k - 1].u).cwiseAbs().sum();
        s.max_speed_component = std::max(s.max_speed_component, st.v.cwiseAbs().maxCoeff());
    }
    s.median_s_injected = quantile_of(injected, 0.5);
    return s;
}

std::uint64_t derive_seed(std::uint64_t master, int index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

MonteCarloResult run_monte_carlo(const ScenarioConfig& config, int runs, std::uint64_t master_seed,
                                 int jobs) {
    require(runs >= 1, "run_monte_carlo: runs must be at least 1");
    require(jobs >= 1, "run_monte_carlo: jobs must be at least 1");
    config.validate();

    MonteCarloResult out;
    out.runs.resize(runs);
    std::vector<std::vector<double>> s_series(runs);
    std::vector<double> times;
    std::mutex times_mutex;
    std::atomic<int> next{0};

    auto worker = [&]() {
        for (int i = next++; i < runs; i = next++) {
            const std::uint64_t seed = derive_seed(master_seed, i);
            SimTrajectory traj;
            try {
                traj = run_docking(config, seed);
            } catch (const std::exception& e) {
                traj.status = RunStatus::SolverFailure;
                traj.message = e.what();
            }
            out.runs[i] = summarize(traj, config, i, seed);
            std::vector<double>& series = s_series[i];
            series.reserve(traj.steps.size());
            for (const SimStep& st : traj.steps) series.push_back(st.s);
            std::lock_guard<std::mutex> lock(times_mutex);
            if (traj.steps.size() > times.size()) {
                times.clear();
                for (const SimStep& st : traj.steps) times.push_back(st.t);
            }
        }
    };
    const int threads = std::min(jobs, runs);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < threads; ++j) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    for (const RunSummary& r : out.runs) {
        out.docked += r.docked ? 1 : 0;
        out.collided += r.collided ? 1 : 0;
        out.violations_during_avoidance += r.min_s < 1.0 ? 1 : 0;
    }

    QuantileBand& band = out.band;
    band.levels = {0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0};
    // Every run shares t_k = k Ts, so the longest run's clock covers all rows.
    band.t = times;
    std::vector<double> column;
    for (std::size_t k = 0; k < times.size(); ++k) {
        column.clear();
        for (const std::vector<double>& series : s_series)
            if (k < series.size()) column.push_back(series[k]);
        std::sort(column.begin(), column.end());
        band.count.push_back(static_cast<int>(column.size()));
        std::vector<double> row;
        for (double level : band.levels) row.push_back(quantile(column, level));
        band.values.push_back(std::move(row));
    }
    return out;
}

ComparisonResult compare_with_baseline(const ComparisonConfig& config) {
    require(config.steps >= 1 && config.p >= 1, "compare_with_baseline: steps and p must be >= 1");

    DiscreteMpcSpec base = double_integrator_spec(1, config.Ts, config.p, config.mass);
    base.W_u = Vector::Constant(1, config.base_W_u);
    base.W_y = Vector(2);
    base.W_y << config.base_W_pos, config.base_W_vel;
    base.y_r = Vector(2);
    base.y_r << config.target, 0.0;
    DiscreteMpcController discrete(base);

    AxisSpec axis;
    axis.W_u = config.W_u;
    axis.W_x = config.W_x;
    axis.W_xp = config.W_xp;
    axis.x_target = config.target;
    Mpc3Controller continuous(
        make_spec(config.n, config.p * config.Ts, {axis}, 1e4, config.mass));

    ComparisonResult out;
    out.full_scale = std::abs(config.x0 - config.target);
    Vector xd(2), xc(2);
    xd << config.x0, config.v0;
    xc = xd;
    const Matrix& Ad = base.Ad;
    const Matrix& Bd = base.Bd;
    for (int k = 0; k <= config.steps; ++k) {
        out.t.push_back(k * config.Ts);
        out.x_base.push_back(xd(0));
        out.x_mpc3.push_back(xc(0));
        out.max_gap = std::max(out.max_gap, std::abs(xd(0) - xc(0)));
        if (k == config.steps) break;

        const DiscreteSolution ds = discrete.solve_step(xd);
        const ControlSolution cs = continuous.solve_step(xc.head(1), xc.tail(1));
        if (!ds.ok() || !cs.ok()) {
            throw std::runtime_error("compare_with_baseline: QP failed at step " +
                                     std::to_string(k));
        }
        out.u_base.push_back(ds.u_now(0));
        out.u_mpc3.push_back(cs.u_now(0));
        xd = Ad * xd + Bd * ds.u_now;
        xc = Ad * xc + Bd * cs.u_now;
    }
    return out;
}

}  // namespace mpc3
