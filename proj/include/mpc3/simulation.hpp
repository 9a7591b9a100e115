#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpc3/baseline.hpp"
#include "mpc3/collision.hpp"
#include "mpc3/transcription.hpp"

namespace mpc3 {

struct PlantState {
    Vec3 r = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    double t = 0.0;
};

/// Optional truth-model perturbation applied after the nominal update.
using PerturbationHook = std::function<void(PlantState& state, const Vec3& u, double dt)>;

/// Exact double-integrator step under constant force, then the hook, then
/// zero-mean Gaussian velocity noise (skipped when noise_std == 0 or rng is null).
PlantState step_plant(const PlantState& state, const Vec3& u, double mass, double dt,
                      double noise_std = 0.0, std::mt19937_64* rng = nullptr,
                      const PerturbationHook& hook = {});

enum class GuidanceMode { Approach = 0, Align = 1, Dock = 2 };

const char* to_string(GuidanceMode mode);

/// Docking geometry. The port sits on the target face with outward normal
/// `port_normal`; the alignment point and the docked chaser position lie on
/// the docking axis through the target center along that normal.
struct GuidanceConfig {
    Vec3 target_position = Vec3::Zero();
    Vec3 port_normal = Vec3::UnitX();
    double dock_standoff = 0.10;    // chaser center when docked
    double align_standoff = 0.35;   // alignment point
    double port_plane = 0.10;       // axial distance beyond which the chaser is on the docking side
    Vec3 approach_waypoint = Vec3(0.45, 0.2, 0.0);
    double approach_radius = 0.6;   // APPROACH -> ALIGN, measured to the alignment point
    double align_radius = 0.15;     // ALIGN -> DOCK, measured to the alignment point
    double hysteresis = 1.1;        // exit radius / entry radius
    double dock_tolerance = 0.01;
    double dock_speed = 0.005;

    Vec3 align_point() const;
    Vec3 dock_point() const;
    void validate() const;
};

struct GuidanceOutput {
    Vec3 position;
    Vec3 velocity = Vec3::Zero();
    GuidanceMode mode = GuidanceMode::Approach;
    bool transitioned = false;
};

GuidanceOutput guidance_update(const PlantState& state, const GuidanceConfig& config,
                               GuidanceMode current);

struct PlantConfig {
    double mass = 1.0;
    double noise_std = 1e-4;  // velocity increment per control step, m/s
    double u_max = 0.0;       // per-axis actuator saturation, N; 0 uses the controller limit
    std::uint64_t seed = 1;
};

/// Per-axis MPC3 settings shared by x, y and z.
struct ControllerConfig {
    int n = 3;
    double horizon = 2.5;
    double rho = 1e4;
    double W_u = 1.0;
    double W_x = 1.0;
    double W_xp = 2.0;
    double u_limit = 0.01;
    double V_u = 0.01;
    double v_limit = 0.02;
    double V_xp = 0.1;
};

struct CollisionConfig {
    bool enabled = true;
    std::vector<Vec3> chaser_vertices;  // body frame; empty means a cube of chaser_half_width
    std::vector<Vec3> target_vertices;
    double chaser_half_width = 0.05;
    double target_half_width = 0.05;
    double s_thr = 1.5;
    double activation_radius = 0.4;
    double softness = 3.0;
};

/// How the continuous plan is held over one control period.
enum class ControlHold {
    Start,    // u at the start of the plan
    Average,  // constant force reproducing the planned velocity at t = Ts
};

struct RunConfig {
    double Ts = 0.5;
    ControlHold hold = ControlHold::Average;
    double timeout = 600.0;
    int mc_runs = 500;
    Vec3 initial_position = Vec3(-0.9, -0.9, 0.0);
    Vec3 initial_velocity = Vec3::Zero();
};

struct ScenarioConfig {
    PlantConfig plant;
    ControllerConfig controller;
    GuidanceConfig guidance;
    CollisionConfig collision;
    RunConfig run;

    void validate() const;
    Polytope chaser_polytope() const;
    Polytope target_polytope() const;
    TranscriptionSpec transcription() const;
};

struct SimStep {
    double t = 0.0;
    Vec3 r = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    Vec3 u = Vec3::Zero();       // applied (saturated) force
    double epsilon = 0.0;
    double s = 0.0;              // at the executed state
    GuidanceMode mode = GuidanceMode::Approach;
    bool avoidance_active = false;
    int rows_injected = 0;
    double plan_min_s = 0.0;     // min node s of the applied plan (0 when not evaluated)
    int qp_iterations = 0;
};

enum class RunStatus { Docked, Timeout, SolverFailure };

const char* to_string(RunStatus status);

struct SimTrajectory {
    std::vector<SimStep> steps;
    RunStatus status = RunStatus::Timeout;
    bool collided = false;       // DCOL active and s < 1 at an executed state
    int failed_step = -1;
    std::string message;

    bool docked() const { return status == RunStatus::Docked; }
};

/// Called after each successful solve with the step index and the applied plan.
using StepObserver =
    std::function<void(int step, const ControlSolution& plan, const TranscriptionSpec& spec)>;

/// Runs guidance -> MPC3 (+ collision injection) -> plant until docked or
/// timed out. `seed` drives the process noise.
SimTrajectory run_docking(const ScenarioConfig& config, std::uint64_t seed,
                          const StepObserver& observer = {});
SimTrajectory run_docking(const ScenarioConfig& config);

struct RunSummary {
    int run = 0;
    std::uint64_t seed = 0;
    RunStatus status = RunStatus::Timeout;
    bool docked = false;
    bool collided = false;
    double min_s = 0.0;          // over executed states while avoidance is active (inf if never)
    double min_s_all = 0.0;      // over every executed state
    double effort = 0.0;         // sum ||u|| Ts
    double control_tv = 0.0;     // sum ||u_k - u_{k-1}||_1, a chattering measure
    double max_speed_component = 0.0;
    double median_s_injected = 0.0;  // median s over steps with injected rows (NaN if none)
    int steps = 0;
    std::string message;
};

RunSummary summarize(const SimTrajectory& trajectory, const ScenarioConfig& config, int run,
                     std::uint64_t seed);

/// Quantiles of executed-state s across runs, one row per control step.
struct QuantileBand {
    std::vector<double> levels;            // e.g. 0, 0.05, ..., 1
    std::vector<double> t;
    std::vector<int> count;                // runs still active at the step
    std::vector<std::vector<double>> values;  // [step][level]
};

struct MonteCarloResult {
    std::vector<RunSummary> runs;
    QuantileBand band;
    int docked = 0;
    int collided = 0;
    int violations_during_avoidance = 0;  // runs with executed s < 1 while avoidance active
};

/// Seed of run `index` derived from the master seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, int index);

/// Independent noisy runs; results do not depend on `jobs`.
MonteCarloResult run_monte_carlo(const ScenarioConfig& config, int runs, std::uint64_t master_seed,
                                 int jobs = 1);

/// Closed-loop 1-DoF comparison of MPC3 against the condensed baseline on
/// the exact ZOH double integrator.
struct ComparisonConfig {
    double Ts = 0.5;
    int p = 5;
    int n = 3;
    int steps = 40;
    double x0 = 1.0;
    double v0 = 0.0;
    double target = 0.0;
    double mass = 1.0;
    // Baseline weights
    double base_W_u = 1.0;
    double base_W_pos = 1.0;
    double base_W_vel = 0.0;
    // MPC3 weights
    double W_u = 0.5;
    double W_x = 1.0;
    double W_xp = 0.25;
};

struct ComparisonResult {
    std::vector<double> t;
    std::vector<double> x_mpc3, x_base;
    std::vector<double> u_mpc3, u_base;
    double max_gap = 0.0;        // max |x_mpc3 - x_base|
    double full_scale = 0.0;     // |x0 - target|
};

ComparisonResult compare_with_baseline(const ComparisonConfig& config);

}  // namespace mpc3
