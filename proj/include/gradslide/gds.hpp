#pragma once

#include "gradslide/core.hpp"
#include "gradslide/prox.hpp"

namespace gradslide {

// Gradient descent sliding with known constants. Per outer iteration the
// smooth part g is linearized once at the running average x~_{k-1} and the
// subproblem is handled by t_count fixed-weight prox-gradient steps on f.
// Euclidean setups only.

struct GdsSubroutineResult {
    Vec x;        // last inner iterate
    Vec x_tilde;  // 1/p-weighted average of the inner iterates
};

GdsSubroutineResult gds_subroutine(const CompositeProblem& problem, const ProxSetup& setup,
                                   const Vec& x_prev, const Vec& x_tilde_prev, double eta,
                                   double m, std::int64_t t_count, OracleTally& tally);

// Runs cfg.max_outer iterations with L_k = lip_l, M_k = lip_m and
// T_k = ceil(lip_m / lip_l); output is the 1/eta-weighted average of the
// x~_k. Stops early on the gap test when enabled and an optimum is known.
RunReport solve_gds_known(const CompositeProblem& problem, const ProxSetup& setup,
                          const Vec& x0, double lip_l, double lip_m,
                          const SolverConfig& cfg, OracleTally& tally);

}  // namespace gradslide
