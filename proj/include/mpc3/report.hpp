#pragma once

#include <ostream>
#include <string>

#include "mpc3/chebyshev.hpp"
#include "mpc3/simulation.hpp"

namespace mpc3 {

/// Every CSV starts with this line.
inline constexpr const char* kSchemaLine = "# schema=1";

/// t, r_xyz, v_xyz, u_xyz, epsilon, s, mode. Flushes after every row so a
/// failing run still leaves the rows written so far.
void write_trajectory_csv(std::ostream& out, const SimTrajectory& trajectory);

/// Human-readable block: dock success, min s, max |v|, total effort.
void write_summary(std::ostream& out, const RunSummary& summary);

/// One row per run.
void write_runs_csv(std::ostream& out, const std::vector<RunSummary>& runs);

/// t, count, then one column per quantile level.
void write_band_csv(std::ostream& out, const QuantileBand& band);

/// t, x_mpc3, x_base, u_mpc3, u_base.
void write_comparison_csv(std::ostream& out, const ComparisonResult& result);

/// Nodes, weights and the T, beta, gamma operators at the nodes and at tau = -1.
void write_basis_csv(std::ostream& out, const ChebyshevBasis& basis);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace mpc3
