#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mpc3 {

struct SelftestOptions {
    /// Fault injection: perturbs the quadrature weights before the
    /// quadrature suite runs.
    bool corrupt_weights = false;
};

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Quadrature moments, integration-operator round trips, QP KKT spot checks
/// and DCOL cube closed forms.
std::vector<SuiteResult> run_selftest(const SelftestOptions& options = {});

/// Number of failed suites, capped at 125.
int selftest_exit_code(const std::vector<SuiteResult>& results);

void write_selftest_report(std::ostream& out, const std::vector<SuiteResult>& results);

}  // namespace mpc3
