#pragma once

#include <functional>
#include <string>
#include <vector>

#include "wlearn/dist.hpp"

namespace wlearn {

/// One numeric check: passed iff |expected - actual| <= tolerance.
struct ReplicationResult {
    int criterion;
    std::string check_name;
    double expected;
    double actual;
    double tolerance;
    bool passed;
};

struct ReplicationOptions {
    /// Closed-form normal W2 under test; swapped out to verify the harness
    /// actually detects a wrong formula.
    std::function<double(const NormalDist&, const NormalDist&)> w2 = nullptr;
    unsigned threads = 0;
    /// Criteria to run; empty runs all of them.
    std::vector<int> only;
};

inline constexpr int kCriterionCount = 10;

std::string criterion_title(int criterion);

/// Runs every reference check (published values and property suites) with
/// fixed seeds. Results are ordered by criterion.
std::vector<ReplicationResult> run_replication(const ReplicationOptions& options = {});

/// Fixed-width report, one line per check.
std::string render_replication(const std::vector<ReplicationResult>& results);

}  // namespace wlearn
