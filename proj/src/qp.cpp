#include "mpc3/qp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mpc3 {

namespace {

constexpr double kFeasibilityTol = 1e-10;
constexpr double kDependenceTol = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Active {
    bool is_eq;
    int row;
};

/// Working-set algebra in the H^{-1} metric. With H = L L', Y = L^{-1} A_A'
/// and Y = QR, M = A_A H^{-1} A_A' = R'R. Q and R are updated in place on
/// each push and erase.
class WorkingSet {
public:
    WorkingSet(const QpProblem& p, const HessianFactor& hf, const Matrix& metric_eq,
               const Matrix& metric_in)
        : p_(p), hf_(hf), metric_eq_(metric_eq), metric_in_(metric_in),
          Q_(p.dim(), p.dim()), R_(Matrix::Zero(p.dim(), p.dim())) {}

    const std::vector<Active>& items() const { return items_; }
    int size() const { return static_cast<int>(items_.size()); }

    auto R() const { return R_.topLeftCorner(size(), size()).triangularView<Eigen::Upper>(); }

    void assign(const std::vector<Active>& items) {
        items_.clear();
        for (const Active& a : items) push(a);
    }

    /// Appends a row; the caller guarantees independence from the working rows.
    void push(Active a) {
        const int k = size();
        if (k >= p_.dim()) throw std::logic_error("WorkingSet: more rows than dimensions");
        Vector w = metric(a);
        Vector r = Vector::Zero(k);
        for (int pass = 0; pass < 2; ++pass) {
            const Vector c = Q_.leftCols(k).transpose() * w;
            w.noalias() -= Q_.leftCols(k) * c;
            r += c;
        }
        const double nrm = w.norm();
        Q_.col(k) = w / nrm;
        R_.col(k).head(k) = r;
        R_(k, k) = nrm;
        items_.push_back(a);
    }

    /// Removes a row and restores the triangular factor with Givens rotations.
    void erase(int pos) {
        const int k = size();
        for (int j = pos; j + 1 < k; ++j) R_.col(j).head(k) = R_.col(j + 1).head(k);
        R_.col(k - 1).setZero();
        for (int j = pos; j + 1 < k; ++j) {
            Eigen::JacobiRotation<double> g;
            g.makeGivens(R_(j, j), R_(j + 1, j));
            R_.block(0, j, k, k - 1 - j).applyOnTheLeft(j, j + 1, g.adjoint());
            R_(j + 1, j) = 0.0;
            Q_.applyOnTheRight(j, j + 1, g);
        }
        R_.row(k - 1).setZero();
        items_.erase(items_.begin() + pos);
    }

    RowVector row(const Active& a) const {
        return a.is_eq ? RowVector(p_.A_eq.row(a.row)) : RowVector(p_.A_in.row(a.row));
    }
    double rhs(const Active& a) const { return a.is_eq ? p_.b_eq(a.row) : p_.b_in(a.row); }

    /// L^{-1} a' for a constraint row.
    Vector metric(const Active& a) const {
        return a.is_eq ? metric_eq_.col(a.row) : metric_in_.col(a.row);
    }

    /// Component of w = L^{-1} a orthogonal to range(Y); zero when a depends
    /// on the working rows.
    Vector orthogonal_part(Vector w, Vector* coeffs) const {
        const int k = size();
        if (k == 0) {
            if (coeffs) coeffs->resize(0);
            return w;
        }
        const Vector c = Q_.leftCols(k).transpose() * w;
        w.noalias() -= Q_.leftCols(k) * c;
        if (coeffs) *coeffs = -R().solve(c);
        return w;
    }

    bool independent(const Active& a) const {
        const Vector w = metric(a);
        const double wn = w.norm();
        if (wn == 0.0) return false;
        return orthogonal_part(w, nullptr).norm() > kDependenceTol * wn;
    }

    /// Minimiser with every working row held as an equality. Returns x and
    /// fills the working-row multipliers.
    Vector solve_eqp(const Vector& x_free, Vector& lambda) const {
        const int k = size();
        lambda.resize(k);
        if (k == 0) return x_free;
        Vector resid(k);
        for (int i = 0; i < k; ++i) resid(i) = row(items_[i]).dot(x_free) - rhs(items_[i]);
        const Vector s = R_.topLeftCorner(k, k).transpose().triangularView<Eigen::Lower>().solve(resid);
        lambda = R().solve(s);
        const Vector Yl = Q_.leftCols(k) * s;
        return x_free - lift(Yl);
    }

    Vector lift(const Vector& u) const {
        return hf_.L().transpose().triangularView<Eigen::Upper>().solve(u);
    }

private:

    const QpProblem& p_;
    const HessianFactor& hf_;
    const Matrix& metric_eq_;
    const Matrix& metric_in_;
    std::vector<Active> items_;
    Matrix Q_;
    Matrix R_;
};

double objective_of(const QpProblem& p, const Vector& x) {
    return 0.5 * x.dot(p.H * x) + p.f.dot(x);
}

void fill_duals(const QpProblem& p, const WorkingSet& ws, const Vector& lambda,
                QpResult& out) {
    out.eq_duals = Vector::Zero(p.num_eq());
    out.in_duals = Vector::Zero(p.num_in());
    out.active_set.clear();
    for (int i = 0; i < ws.size(); ++i) {
        const Active& a = ws.items()[i];
        if (a.is_eq) {
            out.eq_duals(a.row) = lambda(i);
        } else {
            out.in_duals(a.row) = std::max(0.0, lambda(i));
            out.active_set.push_back(a.row);
        }
    }
    std::sort(out.active_set.begin(), out.active_set.end());
}

}  // namespace

const char* to_string(QpStatus status) {
    switch (status) {
        case QpStatus::Optimal: return "optimal";
        case QpStatus::Infeasible: return "infeasible";
        case QpStatus::MaxIterations: return "max-iterations";
    }
    return "unknown";
}

void QpProblem::validate() const {
    const auto d = H.rows();
    if (H.cols() != d) throw std::invalid_argument("QpProblem: H must be square");
    if (f.size() != d) throw std::invalid_argument("QpProblem: f has wrong length");
    if (A_eq.rows() > 0 && A_eq.cols() != d)
        throw std::invalid_argument("QpProblem: A_eq has wrong column count");
    if (A_in.rows() > 0 && A_in.cols() != d)
        throw std::invalid_argument("QpProblem: A_in has wrong column count");
    if (b_eq.size() != A_eq.rows()) throw std::invalid_argument("QpProblem: b_eq length");
    if (b_in.size() != A_in.rows()) throw std::invalid_argument("QpProblem: b_in length");
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw std::invalid_argument("QpProblem: H is not symmetric");
    }
}

std::size_t QpProblem::footprint_bytes() const {
    const auto entries = H.size() + f.size() + A_eq.size() + b_eq.size() + A_in.size() +
                         b_in.size();
    return static_cast<std::size_t>(entries) * sizeof(double);
}

HessianFactor::HessianFactor(const Matrix& H) : llt_(H) {
    if (llt_.info() != Eigen::Success) {
        throw std::invalid_argument("QP Hessian is not positive definite");
    }
    L_ = llt_.matrixL();
}

KktResiduals kkt_residuals(const QpProblem& p, const QpResult& r) {
    KktResiduals k;
    Vector grad = p.H * r.chi + p.f;
    if (p.num_eq() > 0) grad += p.A_eq.transpose() * r.eq_duals;
    if (p.num_in() > 0) grad += p.A_in.transpose() * r.in_duals;
    k.stationarity = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
    if (p.num_eq() > 0) {
        k.primal = (p.A_eq * r.chi - p.b_eq).cwiseAbs().maxCoeff();
    }
    if (p.num_in() > 0) {
        const Vector slack = p.A_in * r.chi - p.b_in;
        k.primal = std::max(k.primal, std::max(0.0, slack.maxCoeff()));
        for (int i = 0; i < p.num_in(); ++i) {
            if (std::isfinite(p.b_in(i))) {
                k.complementarity =
                    std::max(k.complementarity, std::abs(r.in_duals(i) * slack(i)));
            }
        }
        k.dual = std::max(0.0, -r.in_duals.minCoeff());
    }
    return k;
}

QpSolver::QpSolver(QpProblem problem, std::shared_ptr<const HessianFactor> factor)
    : problem_(std::move(problem)), factor_(std::move(factor)) {
    problem_.validate();
    if (!factor_) {
        factor_ = std::make_shared<const HessianFactor>(problem_.H);
        ++stats_.factorizations;
    } else if (factor_->L().rows() != problem_.dim()) {
        throw std::invalid_argument("QpSolver: shared factor has wrong dimension");
    }
    // Independent subset of the equality rows, chosen greedily in row order.
    // Rows at rounding level relative to the largest row are vacuous.
    const auto& L = factor_->L().triangularView<Eigen::Lower>();
    metric_eq_ = problem_.num_eq() > 0 ? Matrix(L.solve(problem_.A_eq.transpose()))
                                       : Matrix(problem_.dim(), 0);
    metric_in_ = problem_.num_in() > 0 ? Matrix(L.solve(problem_.A_in.transpose()))
                                       : Matrix(problem_.dim(), 0);
    WorkingSet ws(problem_, *factor_, metric_eq_, metric_in_);
    const double row_scale = problem_.num_eq() > 0 ? problem_.A_eq.rowwise().norm().maxCoeff() : 0.0;
    for (int i = 0; i < problem_.num_eq(); ++i) {
        const Vector a = problem_.A_eq.row(i).transpose();
        if (a.norm() <= 1e-12 * std::max(1.0, row_scale)) continue;
        if (ws.independent({true, i})) {
            ws.push({true, i});
            eq_rows_.push_back(i);
        }
    }
}

void QpSolver::update_linear_terms(const Vector& f, const Vector& b_in) {
    if (f.size() != problem_.f.size() || b_in.size() != problem_.b_in.size()) {
        throw std::invalid_argument("update_linear_terms: dimension mismatch");
    }
    problem_.f = f;
    problem_.b_in = b_in;
}

void QpSolver::update_linear_terms(const Vector& f, const Vector& b_in, const Vector& b_eq) {
    if (b_eq.size() != problem_.b_eq.size()) {
        throw std::invalid_argument("update_linear_terms: b_eq dimension mismatch");
    }
    update_linear_terms(f, b_in);
    problem_.b_eq = b_eq;
}

QpResult QpSolver::solve(const std::optional<WarmStart>& warm) {
    const auto start = std::chrono::steady_clock::now();
    const QpProblem& p = problem_;
    const int d = p.dim();
    const int m_in = p.num_in();
    ++stats_.solves;

    QpResult out;
    WorkingSet ws(p, *factor_, metric_eq_, metric_in_);
    const Vector x_free = -factor_->llt().solve(p.f);

    auto finish = [&](QpResult& r) -> QpResult {
        r.objective = r.chi.size() ? objective_of(p, r.chi) : 0.0;
        stats_.last_iterations = r.iterations;
        stats_.last_wall_us = std::chrono::duration<double, std::micro>(
                                  std::chrono::steady_clock::now() - start)
                                  .count();
        return r;
    };

    std::vector<Active> base;
    for (int r : eq_rows_) base.push_back({true, r});
    ws.assign(base);
    Vector lambda;
    Vector x = ws.solve_eqp(x_free, lambda);

    // Rows dropped as dependent must still hold.
    if (p.num_eq() > 0) {
        const Vector eq_res = p.A_eq * x - p.b_eq;
        bool consistent = true;
        for (int i = 0; i < p.num_eq(); ++i) {
            if (std::abs(eq_res(i)) > 1e-9 * (1.0 + std::abs(p.b_eq(i)))) consistent = false;
        }
        if (!consistent) {
            const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(p.A_eq);
            const Vector x_ls = cod.solve(p.b_eq);
            out.status = QpStatus::Infeasible;
            out.chi = x;
            out.eq_duals = Vector::Zero(p.num_eq());
            out.in_duals = Vector::Zero(m_in);
            out.certificate_eq = -(p.b_eq - p.A_eq * x_ls);
            out.certificate_in = Vector::Zero(m_in);
            return finish(out);
        }
    }

    const int max_changes = 50 * std::max(1, d);
    int changes = 0;

    auto drop_negative_multipliers = [&]() {
        for (;;) {
            const double scale = std::max(1.0, lambda.size() ? lambda.cwiseAbs().maxCoeff() : 0.0);
            int worst = -1;
            double worst_val = -1e-12 * scale;
            for (int i = 0; i < ws.size(); ++i) {
                const Active& a = ws.items()[i];
                if (a.is_eq) continue;
                if (lambda(i) < worst_val ||
                    (worst >= 0 && lambda(i) == worst_val && a.row < ws.items()[worst].row)) {
                    worst = i;
                    worst_val = lambda(i);
                }
            }
            if (worst < 0 || changes >= max_changes) return;
            ws.erase(worst);
            ++changes;
            x = ws.solve_eqp(x_free, lambda);
        }
    };

    // Warm start: hold the guessed rows as equalities, then shed any with
    // negative multipliers to reach a dual-feasible start.
    if (warm) {
        std::vector<int> guess = warm->active_set;
        if (guess.empty() && warm->chi0.size() == d && m_in > 0) {
            const Vector slack = p.A_in * warm->chi0 - p.b_in;
            for (int i = 0; i < m_in; ++i) {
                if (std::abs(slack(i)) <= 1e-9 * (1.0 + std::abs(p.b_in(i)))) guess.push_back(i);
            }
        }
        std::sort(guess.begin(), guess.end());
        guess.erase(std::unique(guess.begin(), guess.end()), guess.end());
        for (int r : guess) {
            if (r < 0 || r >= m_in) {
                throw std::invalid_argument("WarmStart: active row " + std::to_string(r) +
                                            " out of range");
            }
            if (ws.size() >= d) break;
            if (!std::isfinite(p.b_in(r))) continue;
            if (ws.independent({false, r})) ws.push({false, r});
        }
        x = ws.solve_eqp(x_free, lambda);
        drop_negative_multipliers();
    }

    std::vector<char> in_ws(m_in, 0);
    auto rebuild_flags = [&]() {
        std::fill(in_ws.begin(), in_ws.end(), 0);
        for (const Active& a : ws.items())
            if (!a.is_eq) in_ws[a.row] = 1;
    };
    rebuild_flags();

    out.status = QpStatus::Optimal;
    while (true) {
        // Lowest-index violated row enters.
        int p_row = -1;
        const Vector slack = m_in > 0 ? Vector(p.A_in * x - p.b_in) : Vector();
        for (int i = 0; i < m_in; ++i) {
            if (in_ws[i]) continue;
            const double viol = slack(i);
            if (viol > kFeasibilityTol * (1.0 + std::abs(p.b_in(i)))) {
                p_row = i;
                break;
            }
        }
        if (p_row < 0) break;
        if (changes >= max_changes) {
            out.status = QpStatus::MaxIterations;
            break;
        }

        const Vector a_p = p.A_in.row(p_row).transpose();
        double u_p = 0.0;  // multiplier accumulated on the entering row
        bool added = false;
        while (!added) {
            Vector r;
            const Vector w = metric_in_.col(p_row);
            const Vector u = ws.orthogonal_part(w, &r);
            const bool dependent = u.norm() <= kDependenceTol * std::max(w.norm(), 1e-300);

            int block = -1;
            double t1 = kInf;
            for (int i = 0; i < ws.size(); ++i) {
                const Active& a = ws.items()[i];
                if (a.is_eq || !(r(i) < -1e-14 * std::max(1.0, r.cwiseAbs().maxCoeff()))) continue;
                const double t = std::max(0.0, lambda(i)) / -r(i);
                if (t < t1 || (t == t1 && a.row < ws.items()[block].row)) {
                    t1 = t;
                    block = i;
                }
            }

            if (dependent) {
                if (block < 0) {
                    out.status = QpStatus::Infeasible;
                    out.certificate_eq = Vector::Zero(p.num_eq());
                    out.certificate_in = Vector::Zero(m_in);
                    for (int i = 0; i < ws.size(); ++i) {
                        const Active& a = ws.items()[i];
                        if (a.is_eq) out.certificate_eq(a.row) = r(i);
                        else out.certificate_in(a.row) = std::max(0.0, r(i));
                    }
                    out.certificate_in(p_row) = 1.0;
                    out.chi = x;
                    out.iterations = changes;
                    fill_duals(p, ws, lambda, out);
                    return finish(out);
                }
                lambda += t1 * r;
                u_p += t1;
                ws.erase(block);
                {
                    Vector trimmed(lambda.size() - 1);
                    for (int i = 0, j = 0; i < lambda.size(); ++i)
                        if (i != block) trimmed(j++) = lambda(i);
                    lambda = trimmed;
                }
                rebuild_flags();
                ++changes;
                if (changes >= max_changes) break;
                continue;
            }

            const double viol = a_p.dot(x) - p.b_in(p_row);
            const double t2 = viol / u.squaredNorm();
            const Vector z = -ws.lift(u);
            if (t2 <= t1) {
                ws.push({false, p_row});
                ++changes;
                // Re-derive the iterate from the new working set; removes drift
                // accumulated across partial steps.
                x = ws.solve_eqp(x_free, lambda);
                drop_negative_multipliers();
                rebuild_flags();
                added = true;
            } else {
                x += t1 * z;
                lambda += t1 * r;
                u_p += t1;
                ws.erase(block);
                {
                    Vector trimmed(lambda.size() - 1);
                    for (int i = 0, j = 0; i < lambda.size(); ++i)
                        if (i != block) trimmed(j++) = lambda(i);
                    lambda = trimmed;
                }
                rebuild_flags();
                ++changes;
                if (changes >= max_changes) break;
            }
        }
        if (!added && changes >= max_changes) {
            // Leave the iterate on the working set's equality manifold.
            x = ws.solve_eqp(x_free, lambda);
            out.status = QpStatus::MaxIterations;
            break;
        }
    }

    out.chi = x;
    out.iterations = changes;
    fill_duals(p, ws, lambda, out);
    return finish(out);
}

QpResult solve_qp(const QpProblem& problem, const std::optional<WarmStart>& warm) {
    QpSolver solver(problem);
    return solver.solve(warm);
}

QpProblem update_linear_terms(QpProblem problem, const Vector& f_new, const Vector& b_new) {
    if (f_new.size() != problem.f.size() || b_new.size() != problem.b_in.size()) {
        throw std::invalid_argument("update_linear_terms: dimension mismatch");
    }
    problem.f = f_new;
    problem.b_in = b_new;
    return problem;
}

}  // namespace mpc3
