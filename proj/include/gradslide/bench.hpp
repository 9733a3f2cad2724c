#pragma once

#include "gradslide/core.hpp"
#include "gradslide/problems.hpp"

#include <string>
#include <vector>

namespace gradslide {

// Benchmark harness: runs a solver over a descending eps schedule, one
// isolated run per (eps, repetition), and records the oracle counters needed
// to fit the complexity-scaling exponents.

struct SweepPlan {
    std::string solver;  // gds | pfgds-naive | pfgds | ugs | pfugs
    InstanceSpec instance;
    std::vector<double> eps_list;  // strictly decreasing positives
    int reps = 1;
    std::uint64_t seed = 0;
    double l0 = 1.0;
    double m0 = 1.0;
    int max_outer = 100000;
    std::int64_t budget_fgrad = 10'000'000;
    std::string stop_rule = "gap";  // gap | certificate

    void validate() const;
};

struct SweepRow {
    std::string solver;
    std::string family;
    int dim = 0;
    double nu = 0.0;
    double eps = 0.0;
    std::int64_t f_grad = 0;
    std::int64_t f_val = 0;
    std::int64_t g_grad = 0;
    std::int64_t g_val = 0;
    std::int64_t prox_calls = 0;
    std::int64_t outer_iters = 0;
    std::int64_t total_backtracks_L = 0;
    std::int64_t total_backtracks_M = 0;
    double final_gap = 0.0;
    double wall_time_ms = 0.0;
    bool converged = false;
    std::string error;

    // NaN-tolerant equality (an errored run reports final_gap = NaN)
    bool operator==(const SweepRow& o) const {
        auto same = [](double a, double b) { return a == b || (a != a && b != b); };
        return solver == o.solver && family == o.family && dim == o.dim && same(nu, o.nu) &&
               same(eps, o.eps) && f_grad == o.f_grad && f_val == o.f_val &&
               g_grad == o.g_grad && g_val == o.g_val && prox_calls == o.prox_calls &&
               outer_iters == o.outer_iters && total_backtracks_L == o.total_backtracks_L &&
               total_backtracks_M == o.total_backtracks_M && same(final_gap, o.final_gap) &&
               same(wall_time_ms, o.wall_time_ms) && converged == o.converged &&
               error == o.error;
    }
};

// Runs one (solver, instance, eps) combination; rep seeds the starting point.
SweepRow run_single(const SweepPlan& plan, double eps, int rep);

std::vector<SweepRow> run_sweep(const SweepPlan& plan);

// Ordinary least squares on (log x, log y). Rows with nonpositive x or y are
// skipped; fewer than 3 usable points is an error. Constant y fits slope 0
// with r2 = 1.
struct SlopeFit {
    double slope = 0.0;
    double r2 = 1.0;
    int points = 0;
};
SlopeFit fit_loglog_slope(const std::vector<SweepRow>& rows, const std::string& y_field,
                          const std::string& x_field = "eps");

// Policy fit used for reporting: drops the rows at the largest eps when at
// least 5 distinct eps values are present (transient-regime trimming).
SlopeFit fit_with_trim(const std::vector<SweepRow>& rows, const std::string& y_field,
                       bool* trimmed = nullptr);

double sweep_row_field(const SweepRow& row, const std::string& field);

// CSV (RFC-4180) and JSON serialization with a fixed column order; the file
// is written complete via a temp-and-rename so readers never see a partial
// report.
std::string rows_to_csv(const std::vector<SweepRow>& rows);
std::string rows_to_json(const std::vector<SweepRow>& rows);
std::vector<SweepRow> rows_from_csv(const std::string& text);
std::vector<SweepRow> rows_from_json(const std::string& text);
void emit_report(const std::vector<SweepRow>& rows, const std::string& format,
                 const std::string& path);
std::vector<SweepRow> load_report(const std::string& path);

}  // namespace gradslide
