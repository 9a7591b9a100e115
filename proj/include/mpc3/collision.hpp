#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mpc3/lp.hpp"
#include "mpc3/transcription.hpp"

namespace mpc3 {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Convex body {x : A_body R'(x - center) <= b_body}. The body-frame origin
/// must be strictly inside (b_body > 0) and the set bounded.
struct Polytope {
    Matrix A_body;  // h x 3
    Vector b_body;  // h
    Vec3 center = Vec3::Zero();
    Mat3 rotation = Mat3::Identity();

    int faces() const { return static_cast<int>(A_body.rows()); }
    void validate() const;

    /// World-frame half-space rows for a uniform inflation `scale` about the center.
    Matrix world_normals() const;
    Vector world_offsets(double scale) const;
    bool contains(const Vec3& point, double scale, double tol = 1e-9) const;

    static Polytope box(const Vec3& half_widths, const Vec3& center = Vec3::Zero(),
                        const Mat3& rotation = Mat3::Identity());
    /// Convex hull of body-frame vertices (at least four, not coplanar).
    static Polytope from_vertices(const std::vector<Vec3>& vertices,
                                  const Vec3& center = Vec3::Zero(),
                                  const Mat3& rotation = Mat3::Identity());
};

/// Thrown when a polytope violates its invariants.
class DegeneratePolytopeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct CollisionResult {
    double s = 0.0;        // minimal uniform inflation at which the bodies touch
    Vec3 witness = Vec3::Zero();
    Vec3 grad_rc = Vec3::Zero();  // ds / d(chaser center)
    bool degenerate = false;      // LP optimum sits on a degenerate basis
    int pivots = 0;
};

/// Minimum scaling factor by LP over (x, s). s > 1 iff the bodies are separated.
CollisionResult scaling_factor(const Polytope& chaser, const Polytope& target);

struct GradientCheck {
    double deviation = 0.0;  // max |dual gradient - central difference|
    bool non_smooth = false; // one-sided differences disagree
    Vec3 dual = Vec3::Zero();
    Vec3 central = Vec3::Zero();
};

GradientCheck gradient_check(const Polytope& chaser, const Polytope& target, double h);

struct AvoidanceConfig {
    double s_thr = 1.5;
    double softness = 1.0;  // coefficient of the shared slack in each injected row
    /// Axes of the transcription that carry x, y, z.
    std::array<int, 3> axes{0, 1, 2};
};

struct Injection {
    QpProblem problem;
    int rows_added = 0;
    std::vector<double> node_s;  // s at each collocation node of the plan
    double min_s = 0.0;
};

/// Samples the planned chaser positions at the collocation nodes and, for
/// each node with s < s_thr, appends the linearised row
///   -g . r(tau_i) - V_s eps <= -(s_thr - s_i) - g . r_i
/// with r(tau_i) affine in chi. Returns the problem unchanged when no node
/// violates the threshold.
Injection inject_avoidance(const QpProblem& problem, const TranscriptionSpec& spec,
                           const ControlSolution& solution, const Polytope& chaser,
                           const Polytope& target, const AvoidanceConfig& config);

}  // namespace mpc3
