#pragma once

#include <string>
#include <vector>

namespace corekit {

struct CheckResult {
    std::string name;
    bool pass;
    double seconds;
    std::string detail;  // non-empty on failure or when informative
};

struct VerifyOptions {
    bool verbose = false;
    // Self-test hook: flips a sign inside the Hutchinson comparisons so the
    // suite must report a failure.
    bool inject_fault = false;
};

/// Runs every property check against its brute-force oracle (submodularity,
/// cover guarantee, sign-vector enumeration, finite-difference derivatives,
/// greedy equivalences, EMA fixed points).
std::vector<CheckResult> run_verify(const VerifyOptions& opts);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace corekit
