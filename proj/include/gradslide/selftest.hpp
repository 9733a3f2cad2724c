#pragma once

#include <cstdint>
#include <ostream>
#include <string>

namespace gradslide {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

// Invariant suites shared by `gradslide selftest` and the acceptance runner.
// Counts are parameters so the CLI can run a quick variant; tolerances are
// fixed inside.
CheckResult check_lemma5_suite(int schedules);
CheckResult check_lemma4_fuzz(int runs, std::uint64_t seed);
CheckResult check_ugs_termination(int runs, std::uint64_t seed);
CheckResult check_prox_three_point(int instances_per_setup, std::uint64_t seed);
CheckResult check_prox_grid(std::uint64_t seed);
CheckResult check_smoothing_envelope(int pairs_per_case, std::uint64_t seed);

// Runs every suite; returns the number of failures.
int run_selftest(bool quick, std::ostream& out);

}  // namespace gradslide
