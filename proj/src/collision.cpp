#include "mpc3/collision.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mpc3 {

void Polytope::validate() const {
    if (A_body.cols() != 3 || A_body.rows() != b_body.size() || A_body.rows() < 4) {
        throw DegeneratePolytopeError("Polytope: need h >= 4 rows of a h x 3 normal matrix");
    }
    if (!(b_body.array() > 0.0).all()) {
        throw DegeneratePolytopeError("Polytope: origin must be strictly inside (b_body > 0)");
    }
    if (!center.allFinite() || !A_body.allFinite() || !b_body.allFinite()) {
        throw DegeneratePolytopeError("Polytope: non-finite data");
    }
    if ((rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-10) {
        throw DegeneratePolytopeError("Polytope: rotation is not orthonormal");
    }
    // Bounded iff the normals positively span R^3: no direction d with A d <= 0.
    for (int axis = 0; axis < 3; ++axis) {
        for (double sign : {-1.0, 1.0}) {
            Vector c = Vector::Zero(3);
            c(axis) = -sign;
            const LpResult r = solve_lp(c, A_body, b_body);
            if (r.status != LpStatus::Optimal) {
                throw DegeneratePolytopeError("Polytope: unbounded half-space set");
            }
        }
    }
}

Matrix Polytope::world_normals() const { return A_body * rotation.transpose(); }

Vector Polytope::world_offsets(double scale) const {
    return scale * b_body + world_normals() * center;
}

bool Polytope::contains(const Vec3& point, double scale, double tol) const {
    const Vector slack = world_normals() * point - world_offsets(scale);
    return slack.maxCoeff() <= tol;
}

Polytope Polytope::box(const Vec3& half_widths, const Vec3& center, const Mat3& rotation) {
    Polytope p;
    p.A_body = Matrix::Zero(6, 3);
    p.b_body = Vector(6);
    for (int i = 0; i < 3; ++i) {
        p.A_body(2 * i, i) = 1.0;
        p.A_body(2 * i + 1, i) = -1.0;
        p.b_body(2 * i) = half_widths(i);
        p.b_body(2 * i + 1) = half_widths(i);
    }
    p.center = center;
    p.rotation = rotation;
    p.validate();
    return p;
}

Polytope Polytope::from_vertices(const std::vector<Vec3>& vertices, const Vec3& center,
                                 const Mat3& rotation) {
    const int k = static_cast<int>(vertices.size());
    if (k < 4) throw DegeneratePolytopeError("Polytope: need at least four vertices");
    double extent = 0.0;
    for (const Vec3& v : vertices) extent = std::max(extent, v.norm());
    const double tol = 1e-9 * std::max(1.0, extent);

    std::vector<Vec3> normals;
    std::vector<double> offsets;
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            for (int l = j + 1; l < k; ++l) {
                Vec3 n = (vertices[j] - vertices[i]).cross(vertices[l] - vertices[i]);
                const double len = n.norm();
                if (len <= tol * std::max(1.0, extent)) continue;
                n /= len;
                double d = n.dot(vertices[i]);
                int above = 0, below = 0;
                for (const Vec3& v : vertices) {
                    const double side = n.dot(v) - d;
                    if (side > tol) ++above;
                    if (side < -tol) ++below;
                }
                if (above > 0 && below > 0) continue;
                if (above > 0) {
                    n = -n;
                    d = -d;
                }
                bool duplicate = false;
                for (std::size_t f = 0; f < normals.size() && !duplicate; ++f) {
                    duplicate = (normals[f] - n).norm() < 1e-9 && std::abs(offsets[f] - d) < tol;
                }
                if (!duplicate) {
                    normals.push_back(n);
                    offsets.push_back(d);
                }
            }
        }
    }
    Polytope p;
    p.A_body = Matrix(normals.size(), 3);
    p.b_body = Vector(normals.size());
    for (std::size_t f = 0; f < normals.size(); ++f) {
        p.A_body.row(f) = normals[f].transpose();
        p.b_body(f) = offsets[f];
    }
    p.center = center;
    p.rotation = rotation;
    p.validate();
    return p;
}

CollisionResult scaling_factor(const Polytope& chaser, const Polytope& target) {
    if (!(chaser.b_body.array() > 0.0).all() || !(target.b_body.array() > 0.0).all()) {
        throw DegeneratePolytopeError("scaling_factor: body origin must be strictly inside");
    }
    const int hc = chaser.faces();
    const int ht = target.faces();
    // Variables z = (x, s):  A R'(x - r) - s b <= 0 for both bodies.
    Matrix G(hc + ht, 4);
    Vector h(hc + ht);
    const Matrix Nc = chaser.world_normals();
    const Matrix Nt = target.world_normals();
    G.topLeftCorner(hc, 3) = Nc;
    G.topRightCorner(hc, 1) = -chaser.b_body;
    G.bottomLeftCorner(ht, 3) = Nt;
    G.bottomRightCorner(ht, 1) = -target.b_body;
    h.head(hc) = Nc * chaser.center;
    h.tail(ht) = Nt * target.center;
    Vector c = Vector::Zero(4);
    c(3) = 1.0;

    const LpResult r = solve_lp(c, G, h);
    if (!r.ok()) {
        throw std::runtime_error(std::string("scaling_factor: LP ") + to_string(r.status));
    }
    CollisionResult out;
    out.s = r.x(3);
    out.witness = r.x.head<3>();
    out.degenerate = r.degenerate;
    out.pivots = r.pivots;
    // d s / d h = -y, and h_chaser = Nc r_c.
    out.grad_rc = -(Nc.transpose() * r.in_duals.head(hc));
    return out;
}

GradientCheck gradient_check(const Polytope& chaser, const Polytope& target, double h) {
    GradientCheck out;
    const CollisionResult base = scaling_factor(chaser, target);
    out.dual = base.grad_rc;
    Polytope moved = chaser;
    for (int axis = 0; axis < 3; ++axis) {
        moved.center = chaser.center;
        moved.center(axis) += h;
        const double plus = scaling_factor(moved, target).s;
        moved.center(axis) -= 2.0 * h;
        const double minus = scaling_factor(moved, target).s;
        out.central(axis) = (plus - minus) / (2.0 * h);
        const double forward = (plus - base.s) / h;
        const double backward = (base.s - minus) / h;
        const double scale = std::max(1.0, std::abs(out.central(axis)));
        if (std::abs(forward - backward) > 1e-4 * scale) out.non_smooth = true;
        out.deviation = std::max(out.deviation, std::abs(out.central(axis) - out.dual(axis)));
    }
    return out;
}

Injection inject_avoidance(const QpProblem& problem, const TranscriptionSpec& spec,
                           const ControlSolution& solution, const Polytope& chaser,
                           const Polytope& target, const AvoidanceConfig& config) {
    const ChebyshevBasis& B = *spec.basis;
    const int nodes = B.size();
    Injection out;
    out.node_s.resize(nodes);

    std::vector<RowVector> rows;
    std::vector<double> rhs;
    Polytope moving = chaser;
    auto position_at = [&](double tau, std::array<AffinePosition, 3>& aff) {
        Vec3 r;
        for (int k = 0; k < 3; ++k) {
            const int a = config.axes[k];
            aff[k] = position_affine(spec, a, tau, solution.x0(a), solution.v0(a));
            r(k) = aff[k].row.dot(solution.chi) + aff[k].offset;
        }
        return r;
    };

    for (int i = 0; i < nodes; ++i) {
        const double tau = B.nodes()(i);
        std::array<AffinePosition, 3> aff;
        moving.center = position_at(tau, aff);
        CollisionResult cr = scaling_factor(moving, target);
        out.node_s[i] = cr.s;
        if (cr.s >= config.s_thr) continue;
        if (cr.degenerate) {
            // Nudge the node time off the degenerate configuration and reuse
            // the gradient from there.
            std::array<AffinePosition, 3> nudged_aff;
            Polytope nudged = chaser;
            nudged.center = position_at(tau - 1e-9, nudged_aff);
            const CollisionResult alt = scaling_factor(nudged, target);
            if (!alt.degenerate) cr.grad_rc = alt.grad_rc;
        }
        const Vec3& g = cr.grad_rc;
        RowVector row = RowVector::Zero(problem.dim());
        double offset = 0.0;
        for (int k = 0; k < 3; ++k) {
            row -= g(k) * aff[k].row;
            offset += g(k) * aff[k].offset;
        }
        row(spec.slack_index()) -= config.softness;
        rows.push_back(row);
        rhs.push_back(-(config.s_thr - cr.s) - g.dot(moving.center) + offset);
    }
    out.min_s = *std::min_element(out.node_s.begin(), out.node_s.end());
    out.rows_added = static_cast<int>(rows.size());
    out.problem = problem;
    if (rows.empty()) return out;

    const int m = problem.num_in();
    out.problem.A_in.conservativeResize(m + out.rows_added, Eigen::NoChange);
    out.problem.b_in.conservativeResize(m + out.rows_added);
    for (int k = 0; k < out.rows_added; ++k) {
        out.problem.A_in.row(m + k) = rows[k];
        out.problem.b_in(m + k) = rhs[k];
    }
    return out;
}

}  // namespace mpc3
