#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "symrd/instance.hpp"

namespace symrd {

struct SuiteResult {
    std::string name;
    bool passed = true;
    int checks = 0;
    int failures = 0;
    std::string detail;
};

struct VerifyOptions {
    Task task = Task::TSP;
    int n = 6;
    int trials = 200;
    std::uint64_t seed = 1;
    bool corrupt_transform = false;  // negative-control hook: breaks the transform on purpose
};

// Runs the property suites for one task: solution preservation, orbit
// structure, sampling uniformity, gradient finite-difference checks, and the
// exact entropy decomposition (routing tasks). Pure given options.
std::vector<SuiteResult> run_verify(const VerifyOptions& opts);

bool all_passed(const std::vector<SuiteResult>& results);

}  // namespace symrd
