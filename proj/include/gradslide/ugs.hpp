#pragma once

#include "gradslide/core.hpp"
#include "gradslide/prox.hpp"

namespace gradslide {

// Universal gradient sliding: an accelerated outer loop over g paired with an
// accelerated line-search subroutine over f. The inner subroutine drives
// A = M alpha^2 down from M^{1,s} >= L_k^s and forces it to land exactly on
// L_k^s via the c-weight, which is what terminates it. The f-test carries the
// universal slack gamma*alpha*eps/2, so no smoothness of f is assumed beyond
// a Holder subgradient.

struct UgsInnerResult {
    Vec x;        // x_k^s
    Vec x_tilde;  // x~_k^s
    Vec x_bar;    // x-bar_k^s (the convergence point)
    double m_last = 0.0;
    std::int64_t t_count = 0;
    std::int64_t m_doublings = 0;  // rejected probes
    std::int64_t probe_fgrad = 0;  // f-gradients consumed by rejected probes (t >= 2)
    std::vector<InnerStepRecord> steps;  // scalar detail per step; points when recorded
};

UgsInnerResult ugs_inner(const CompositeProblem& problem, const ProxSetup& setup,
                         const Vec& x_prev, const Vec& x_tilde_prev, const Vec& x_bar_prev,
                         const Vec& grad_g_underline, double l_trial, double gamma_trial,
                         double m_start, double eps, double equality_tol, double m_cap,
                         OracleTally& tally, std::optional<std::int64_t> fgrad_stop = {},
                         bool record_points = false);

// Algorithm with trial-L doubling per outer iteration; needs l0 and m0 (cfg).
RunReport solve_ugs(const CompositeProblem& problem, const ProxSetup& setup, const Vec& x0,
                    const SolverConfig& cfg, OracleTally& tally);

// Fully parameter-free variant: joint L=M up-search on a single coupled step,
// then an L down-search with full inner calls; k >= 2 proceeds as solve_ugs.
RunReport solve_pfugs(const CompositeProblem& problem, const ProxSetup& setup, const Vec& x0,
                      const SolverConfig& cfg, OracleTally& tally);

}  // namespace gradslide
