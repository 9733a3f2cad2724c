#pragma once

#include "gradslide/core.hpp"
#include "gradslide/prox.hpp"

namespace gradslide {

// Parameter-free gradient descent sliding: the adaptive inner subroutine with
// a dynamically maintained iteration budget, the naive doubling outer search,
// and the fully parameter-free variant with a first-iteration down-search.
// Euclidean setups only.

struct SlidingResult {
    Vec x;            // last inner iterate
    Vec x_tilde;      // 1/p-weighted average
    double m_last = 0.0;
    std::int64_t t_count = 0;      // executed steps T
    std::int64_t m_doublings = 0;  // rejected probes (each costs one f value + one prox)
    double eta_sum_invp = 0.0;     // eta * sum_t 1/p_t, equals 1 up to rounding
    Vec grad_g_anchor;             // grad g(x~_{k-1}) evaluated by this call
    double g_anchor_value = 0.0;   // g(x~_{k-1})
    std::vector<InnerStepRecord> steps;  // filled when record_steps
};

// The line-search subroutine. Maintains the budget
//   T^t = (M^t / M^{t-1}) (T^{t-1} - t + 1) - 1 + t
// in exact integer arithmetic (the M-ratios are powers of two), which makes
// eta * sum 1/p = 1 hold at exit. Requires max(m_init, eta)/eta to be a
// positive integer; callers normalize with round_up_to_multiple.
// Throws BudgetExceeded once tally.f_grad reaches fgrad_stop.
SlidingResult adaptive_sliding_subroutine(const CompositeProblem& problem,
                                          const ProxSetup& setup, const Vec& x_prev,
                                          const Vec& x_tilde_prev, double eta, double m_init,
                                          double m_cap, OracleTally& tally,
                                          std::optional<std::int64_t> fgrad_stop = {},
                                          bool record_steps = false);

// Smallest integer multiple of eta that is >= m (and >= eta). Keeps the
// estimate at or above any value it has already certified.
double round_up_to_multiple(double m, double eta);

// Naive outer line search (trial L doubling per iteration). l0 should satisfy
// eps/||x0-x*||^2 <= l0 <= L for the theory to apply; the run proceeds either
// way and the report flags whether the hypothesis held when checkable.
RunReport solve_pfgds_naive(const CompositeProblem& problem, const ProxSetup& setup,
                            const Vec& x0, const SolverConfig& cfg, OracleTally& tally);

// Fully parameter-free variant: the first iteration couples the L and M
// up-search (keeping L_1^1 = M_1^{1,1}) and then halves L until the g-test
// first fails, adopting the last passing trial. Needs only m0.
RunReport solve_pfgds(const CompositeProblem& problem, const ProxSetup& setup, const Vec& x0,
                      const SolverConfig& cfg, OracleTally& tally);

}  // namespace gradslide
