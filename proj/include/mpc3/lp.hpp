#pragma once

#include "mpc3/chebyshev.hpp"

namespace mpc3 {

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus status);

struct LpResult {
    LpStatus status = LpStatus::Optimal;
    Vector x;
    double objective = 0.0;
    /// Multipliers with c + A_in' y_in + A_eq' y_eq = 0 and y_in >= 0 at optimum.
    Vector in_duals;
    Vector eq_duals;
    int pivots = 0;
    /// True when some basic variable sits at zero (duals may not be unique).
    bool degenerate = false;

    bool ok() const { return status == LpStatus::Optimal; }
};

/// minimise c'x  s.t.  A_in x <= b_in,  A_eq x = b_eq,  x free.
///
/// Dense two-phase simplex on the split form x = x+ - x-, Bland's rule for
/// entering and leaving variables. Intended for problems with a handful of
/// variables; deterministic for identical inputs.
LpResult solve_lp(const Vector& c, const Matrix& A_in, const Vector& b_in,
                  const Matrix& A_eq = Matrix(), const Vector& b_eq = Vector());

}  // namespace mpc3
