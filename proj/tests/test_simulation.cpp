#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mpc3/simulation.hpp"

using namespace mpc3;

namespace {

ScenarioConfig quiet_scenario() {
    ScenarioConfig c;
    c.plant.noise_std = 0.0;
    return c;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

TEST_CASE("plant: zero force drifts uniformly") {
    PlantState s{Vec3(1.0, -2.0, 0.5), Vec3(0.01, 0.02, -0.03), 0.0};
    for (int k = 0; k < 10; ++k) s = step_plant(s, Vec3::Zero(), 2.0, 0.5);
    CHECK((s.r - Vec3(1.05, -1.9, 0.35)).norm() < 1e-14);
    CHECK((s.v - Vec3(0.01, 0.02, -0.03)).norm() == 0.0);
    CHECK(s.t == doctest::Approx(5.0));
}

TEST_CASE("plant: constant force matches closed-form kinematics") {
    const Vec3 r0(0.3, -0.1, 0.2), v0(0.01, 0.0, -0.02), u(0.01, -0.004, 0.002);
    const double m = 1.7, dt = 0.5;
    PlantState s{r0, v0, 0.0};
    const int k = 37;
    for (int i = 0; i < k; ++i) s = step_plant(s, u, m, dt);
    const double t = k * dt;
    const Vec3 r = r0 + v0 * t + 0.5 * (u / m) * t * t;
    const Vec3 v = v0 + (u / m) * t;
    CHECK((s.r - r).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((s.v - v).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("plant: velocity noise has the configured standard deviation") {
    const double sigma = 1e-4;
    std::mt19937_64 rng(2024);
    PlantState s;
    std::vector<double> inc;
    for (int i = 0; i < 10000; ++i) {
        const PlantState next = step_plant(s, Vec3::Zero(), 1.0, 0.5, sigma, &rng);
        inc.push_back(next.v(0) - s.v(0));
        s = next;
    }
    const double mean = std::accumulate(inc.begin(), inc.end(), 0.0) / inc.size();
    double var = 0.0;
    for (double d : inc) var += (d - mean) * (d - mean);
    const double sd = std::sqrt(var / (inc.size() - 1));
    CHECK(std::abs(sd - sigma) < 0.05 * sigma);
    CHECK(std::abs(mean) < 4.0 * sigma / std::sqrt(10000.0));
}

TEST_CASE("plant: perturbation hook runs before noise") {
    const PerturbationHook drag = [](PlantState& st, const Vec3&, double dt) {
        st.v *= std::exp(-0.1 * dt);
    };
    PlantState s{Vec3::Zero(), Vec3(0.1, 0.0, 0.0), 0.0};
    const PlantState next = step_plant(s, Vec3::Zero(), 1.0, 1.0, 0.0, nullptr, drag);
    CHECK(next.v(0) == doctest::Approx(0.1 * std::exp(-0.1)));
    CHECK(next.r(0) == doctest::Approx(0.1));
    CHECK_THROWS_AS(step_plant(s, Vec3::Zero(), 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(step_plant(s, Vec3::Zero(), -1.0, 0.5), std::invalid_argument);
}

TEST_CASE("guidance: setpoints and transitions") {
    const GuidanceConfig g;
    const Vec3 A = g.align_point();
    const Vec3 D = g.dock_point();
    // Setpoints lie on the docking axis through the port.
    CHECK((A - g.target_position).normalized().isApprox(g.port_normal.normalized()));
    CHECK((D - g.target_position).normalized().isApprox(g.port_normal.normalized()));

    PlantState far{Vec3(-2.0, 1.0, 0.0), Vec3::Zero(), 0.0};
    GuidanceOutput out = guidance_update(far, g, GuidanceMode::Approach);
    CHECK(out.mode == GuidanceMode::Approach);
    CHECK_FALSE(out.transitioned);
    CHECK(out.position.isApprox(g.approach_waypoint));

    // Within the approach radius but on the wrong side of the port plane.
    PlantState behind{Vec3(0.0, 0.2, 0.0), Vec3::Zero(), 0.0};
    REQUIRE((behind.r - A).norm() < g.approach_radius);
    CHECK(guidance_update(behind, g, GuidanceMode::Approach).mode == GuidanceMode::Approach);

    PlantState near{A + Vec3(0.1, 0.3, 0.0), Vec3::Zero(), 0.0};
    out = guidance_update(near, g, GuidanceMode::Approach);
    CHECK(out.mode == GuidanceMode::Align);
    CHECK(out.transitioned);
    CHECK(out.position.isApprox(A));
}

TEST_CASE("guidance: ALIGN to DOCK fires once and is hysteretic") {
    const GuidanceConfig g;
    const Vec3 A = g.align_point();
    PlantState s{A + Vec3(0.0, 0.1, 0.0), Vec3::Zero(), 0.0};
    GuidanceMode mode = GuidanceMode::Align;
    int transitions = 0;
    for (int k = 0; k < 20; ++k) {
        const GuidanceOutput out = guidance_update(s, g, mode);
        transitions += out.transitioned ? 1 : 0;
        mode = out.mode;
    }
    CHECK(mode == GuidanceMode::Dock);
    CHECK(transitions == 1);
    CHECK(guidance_update(s, g, mode).position.isApprox(g.dock_point()));

    // Lateral offsets between the entry and exit radii keep DOCK.
    s.r = A + Vec3(0.0, 1.05 * g.align_radius, 0.0);
    CHECK(guidance_update(s, g, GuidanceMode::Dock).mode == GuidanceMode::Dock);
    s.r = A + Vec3(0.0, 1.2 * g.align_radius, 0.0);
    CHECK(guidance_update(s, g, GuidanceMode::Dock).mode == GuidanceMode::Align);

    // ALIGN falls back to APPROACH only past the exit radius.
    s.r = A + Vec3(0.0, 1.05 * g.approach_radius, 0.0);
    CHECK(guidance_update(s, g, GuidanceMode::Align).mode == GuidanceMode::Align);
    s.r = A + Vec3(0.0, 1.2 * g.approach_radius, 0.0);
    CHECK(guidance_update(s, g, GuidanceMode::Align).mode == GuidanceMode::Approach);
}

TEST_CASE("guidance: radii must strictly decrease") {
    GuidanceConfig g;
    g.align_radius = g.approach_radius;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    g = GuidanceConfig{};
    g.port_normal = Vec3::Zero();
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    g = GuidanceConfig{};
    g.hysteresis = 0.9;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("docking: noiseless default run docks with avoidance near the threshold") {
    const ScenarioConfig c = quiet_scenario();
    const SimTrajectory tr = run_docking(c);
    REQUIRE(tr.docked());
    CHECK_FALSE(tr.collided);

    int prev = 0;
    std::vector<double> injected_s;
    double min_active = 1e9;
    for (const SimStep& st : tr.steps) {
        CHECK(static_cast<int>(st.mode) >= prev);
        prev = static_cast<int>(st.mode);
        if (st.avoidance_active) min_active = std::min(min_active, st.s);
        if (st.rows_injected > 0) injected_s.push_back(st.s);
        CHECK(std::isfinite(st.epsilon));
    }
    REQUIRE_FALSE(injected_s.empty());
    CHECK(min_active >= 1.0);
    const double med = median(injected_s);
    CHECK(med >= 1.3);
    CHECK(med <= 1.7);

    const SimStep& last = tr.steps.back();
    CHECK((last.r - c.guidance.dock_point()).norm() < c.guidance.dock_tolerance);
    CHECK(last.v.norm() < c.guidance.dock_speed);
    CHECK(last.mode == GuidanceMode::Dock);
}

TEST_CASE("docking: the unprotected path goes through the target") {
    ScenarioConfig c = quiet_scenario();
    c.collision.enabled = false;
    const SimTrajectory tr = run_docking(c);
    double min_s = 1e9;
    for (const SimStep& st : tr.steps) {
        min_s = std::min(min_s, st.s);
        CHECK(st.rows_injected == 0);
    }
    CHECK(min_s < 1.0);
}

TEST_CASE("docking: velocity overshoot stays within a quarter of the limit") {
    const ScenarioConfig c;  // default noise
    const SimTrajectory tr = run_docking(c);
    REQUIRE(tr.docked());
    const RunSummary s = summarize(tr, c, 0, c.plant.seed);
    CHECK(s.max_speed_component <= 1.25 * c.controller.v_limit);
    CHECK(s.effort > 0.0);
    CHECK(std::isfinite(s.effort));
}

TEST_CASE("docking: hard limits hold at the collocation nodes") {
    ScenarioConfig c = quiet_scenario();
    c.controller.V_xp = 0.0;
    c.controller.V_u = 0.0;
    double worst_v = 0.0, worst_u = 0.0;
    int observed = 0;
    const StepObserver check = [&](int, const ControlSolution& plan, const TranscriptionSpec& spec) {
        std::vector<double> times;
        for (int i = 0; i < spec.basis->size(); ++i)
            times.push_back(spec.horizon.to_time(spec.basis->nodes()(i)));
        const TrajectorySample ts = sample_trajectory(plan, spec, times);
        worst_v = std::max(worst_v, ts.v.cwiseAbs().maxCoeff() - c.controller.v_limit);
        worst_u = std::max(worst_u, ts.u.cwiseAbs().maxCoeff() - c.controller.u_limit);
        ++observed;
    };
    const SimTrajectory tr = run_docking(c, 1, check);
    CHECK(tr.status != RunStatus::SolverFailure);
    CHECK(observed > 10);
    CHECK(worst_v < 1e-8);
    CHECK(worst_u < 1e-8);
}

TEST_CASE("docking: effort falls as the control weight rises") {
    ScenarioConfig light = quiet_scenario();
    ScenarioConfig heavy = quiet_scenario();
    light.controller.W_u = 1.0;
    heavy.controller.W_u = 4.0;
    const RunSummary a = summarize(run_docking(light), light, 0, 0);
    const RunSummary b = summarize(run_docking(heavy), heavy, 0, 0);
    REQUIRE(a.docked);
    REQUIRE(b.docked);
    CHECK(std::isfinite(a.effort));
    CHECK(b.effort < a.effort);
}

TEST_CASE("docking: (config, seed) fixes the trajectory") {
    const ScenarioConfig c;
    const SimTrajectory a = run_docking(c, 99);
    const SimTrajectory b = run_docking(c, 99);
    const SimTrajectory d = run_docking(c, 100);
    REQUIRE(a.steps.size() == b.steps.size());
    for (std::size_t k = 0; k < a.steps.size(); ++k) {
        CHECK(a.steps[k].r == b.steps[k].r);
        CHECK(a.steps[k].u == b.steps[k].u);
        CHECK(a.steps[k].s == b.steps[k].s);
    }
    bool differs = a.steps.size() != d.steps.size();
    for (std::size_t k = 0; !differs && k < a.steps.size(); ++k) differs = a.steps[k].r != d.steps[k].r;
    CHECK(differs);
}

TEST_CASE("docking: timeout and invalid configs") {
    ScenarioConfig c = quiet_scenario();
    c.run.timeout = 5.0;
    const SimTrajectory tr = run_docking(c);
    CHECK(tr.status == RunStatus::Timeout);
    CHECK(tr.steps.size() == 10);
    CHECK_FALSE(tr.message.empty());

    c = ScenarioConfig{};
    c.controller.W_u = 0.0;
    CHECK_THROWS_AS(run_docking(c), std::invalid_argument);
    c = ScenarioConfig{};
    c.run.Ts = 3.0;
    CHECK_THROWS_AS(run_docking(c), std::invalid_argument);
    c = ScenarioConfig{};
    c.collision.s_thr = 0.9;
    CHECK_THROWS_AS(run_docking(c), std::invalid_argument);
}

TEST_CASE("docking: the collision flag marks interpenetration while avoidance is active") {
    ScenarioConfig c = quiet_scenario();
    c.run.initial_position = Vec3(-0.08, 0.0, 0.0);  // overlapping the target
    c.run.timeout = 2.0;
    const SimTrajectory tr = run_docking(c);
    REQUIRE_FALSE(tr.steps.empty());
    CHECK(tr.steps.front().s < 1.0);
    CHECK(tr.steps.front().avoidance_active);
    CHECK(tr.collided);
    const RunSummary s = summarize(tr, c, 0, 0);
    CHECK(s.collided);
    CHECK(s.min_s < 1.0);
}

TEST_CASE("monte carlo: seeds, determinism and parallelism") {
    CHECK(derive_seed(7, 0) != derive_seed(7, 1));
    CHECK(derive_seed(7, 0) != derive_seed(8, 0));
    CHECK(derive_seed(7, 3) == derive_seed(7, 3));

    ScenarioConfig c;
    c.run.timeout = 80.0;
    const MonteCarloResult one = run_monte_carlo(c, 6, 11, 1);
    const MonteCarloResult three = run_monte_carlo(c, 6, 11, 3);
    REQUIRE(one.runs.size() == 6);
    for (int i = 0; i < 6; ++i) {
        CHECK(one.runs[i].seed == derive_seed(11, i));
        CHECK(one.runs[i].min_s_all == three.runs[i].min_s_all);
        CHECK(one.runs[i].effort == three.runs[i].effort);
        CHECK(one.runs[i].steps == three.runs[i].steps);
    }
    CHECK(one.band.values == three.band.values);
    CHECK(one.band.count == three.band.count);
    CHECK_THROWS_AS(run_monte_carlo(c, 0, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(run_monte_carlo(c, 2, 1, 0), std::invalid_argument);
}

TEST_CASE("monte carlo: zero noise reproduces the single run") {
    const ScenarioConfig c = quiet_scenario();
    const SimTrajectory single = run_docking(c, 5);
    const RunSummary ref = summarize(single, c, 0, 5);
    const MonteCarloResult mc = run_monte_carlo(c, 4, 123, 2);
    for (const RunSummary& r : mc.runs) {
        CHECK(r.min_s == ref.min_s);
        CHECK(r.effort == ref.effort);
        CHECK(r.steps == ref.steps);
        CHECK(r.docked);
    }
    CHECK(mc.docked == 4);
    CHECK(mc.violations_during_avoidance == 0);
}

TEST_CASE("monte carlo: quantile bands are ordered") {
    const ScenarioConfig c;
    const MonteCarloResult mc = run_monte_carlo(c, 8, 3, 2);
    const QuantileBand& b = mc.band;
    REQUIRE(!b.t.empty());
    REQUIRE(b.values.size() == b.t.size());
    CHECK(b.count.front() == 8);
    for (std::size_t k = 0; k < b.t.size(); ++k) {
        CHECK(b.t[k] == doctest::Approx(k * c.run.Ts));
        if (k > 0) CHECK(b.count[k] <= b.count[k - 1]);
        for (std::size_t j = 1; j < b.levels.size(); ++j) CHECK(b.values[k][j] >= b.values[k][j - 1]);
    }
    CHECK(mc.docked == 8);
    CHECK(mc.collided == 0);
}

TEST_CASE("comparison: MPC3 tracks the discrete baseline within 10% of full scale") {
    const ComparisonResult r = compare_with_baseline(ComparisonConfig{});
    REQUIRE(r.t.size() == 41);
    CHECK(r.full_scale == doctest::Approx(1.0));
    CHECK(r.max_gap < 0.1 * r.full_scale);
    CHECK(std::abs(r.x_base.back()) < 0.05);
    CHECK(std::abs(r.x_mpc3.back()) < 0.05);
    CHECK(r.u_base.front() < 0.0);
    CHECK(r.u_mpc3.front() < 0.0);
}
