#include "gradslide/pfgds.hpp"

#include <cmath>
#include <limits>

namespace gradslide {

namespace {

using i128 = __int128;

void require_euclidean(const ProxSetup& setup, const char* who) {
    if (setup.norm_tag() != NormTag::euclidean_l2)
        throw ConfigError(std::string(who) + ": requires a euclidean setup");
}

// Rounding guard for descent tests evaluated in floating point; same scale as
// the 1e-12*(1+|f(y)|) slack used by the oracle-side checks.
double test_guard(double lhs) { return 1e-12 * (1.0 + std::abs(lhs)); }

// Shared state of the outer sliding loop (the naive and parameter-free
// variants differ only in how iteration k=1 seeds it).
struct GdsLaneState {
    Vec x;
    Vec x_tilde;
    double l_prev = 0.0;
    double m_last = 0.0;
    double sum_inv_eta = 0.0;
    Vec avg_acc;

    Vec averaged() const { return avg_acc / sum_inv_eta; }
    void accumulate(const Vec& xt, double eta) {
        sum_inv_eta += 1.0 / eta;
        avg_acc += xt / eta;
    }
};

bool gap_check_and_record(const CompositeProblem& problem, const SolverConfig& cfg,
                          const Vec& averaged, OuterRecord& rec, OracleTally& tally) {
    if (!cfg.stop_on_gap || !problem.metadata.has_value()) return false;
    OracleTally before = tally;
    const double obj = problem.objective(averaged, tally);
    rec.gap = obj - problem.metadata->optimum_value;
    rec.extra_cost += tally - before;
    return rec.gap <= cfg.target_eps;
}

void finalize(const CompositeProblem& problem, RunReport& report, const GdsLaneState& st,
              const OracleTally& tally) {
    report.output_point = st.sum_inv_eta > 0.0 ? st.averaged() : st.x;
    OracleTally scratch;
    report.objective_value = problem.objective(report.output_point, scratch);
    report.gap_estimate = problem.metadata
                              ? report.objective_value - problem.metadata->optimum_value
                              : report.objective_value;
    report.tally = tally;
}

}  // namespace

double round_up_to_multiple(double m, double eta) {
    if (!(eta > 0.0) || !(m > 0.0))
        throw ConfigError("round_up_to_multiple: inputs must be positive");
    double q = std::ceil(m / eta - 1e-12);
    if (q < 1.0) q = 1.0;
    if (q > 0x1p52) throw RunawayLineSearch("round_up_to_multiple: m/eta ratio overflow");
    return eta * q;
}

SlidingResult adaptive_sliding_subroutine(const CompositeProblem& problem,
                                          const ProxSetup& setup, const Vec& x_prev,
                                          const Vec& x_tilde_prev, double eta, double m_init,
                                          double m_cap, OracleTally& tally,
                                          std::optional<std::int64_t> fgrad_stop,
                                          bool record_steps) {
    require_euclidean(setup, "adaptive_sliding_subroutine");
    if (!(eta > 0.0) || !(m_init > 0.0))
        throw ConfigError("adaptive_sliding_subroutine: eta and m_init must be positive");

    const double m0 = std::max(m_init, eta);
    const double ratio = m0 / eta;
    const double q_real = std::nearbyint(ratio);
    if (!(q_real >= 1.0) || std::abs(ratio - q_real) > 1e-6 * std::max(1.0, ratio))
        throw std::invalid_argument(
            "adaptive_sliding_subroutine: max(m_init, eta)/eta must be a positive integer");
    if (q_real > 0x1p52) throw RunawayLineSearch("adaptive_sliding_subroutine: budget overflow");

    SlidingResult res;
    FirstOrder g_anchor = problem.eval_g(x_tilde_prev, tally);
    res.g_anchor_value = g_anchor.value;

    Vec x = x_prev;
    FirstOrder f_cur = problem.eval_f(x, tally);  // f(x^0) and f'(x^0)

    i128 t_budget = static_cast<i128>(q_real);  // T^0 = M^0/eta
    i128 t = 1;
    double m_prev = m0;
    double sum_invp = 0.0;
    Vec avg_acc = Vec::Zero(problem.dim());

    for (;;) {
        if (fgrad_stop && tally.f_grad >= *fgrad_stop) throw BudgetExceeded{};
        double m_t = m_prev;
        std::int64_t doublings = 0;
        Vec x_cand;
        double f_cand;
        for (;;) {
            x_cand = setup.composite_prox(g_anchor.gradient + f_cur.gradient, x_tilde_prev, eta,
                                          x, m_t, tally);
            f_cand = problem.eval_f_value(x_cand, tally);
            const Vec d = x_cand - x;
            const double rhs =
                f_cur.value + f_cur.gradient.dot(d) + 0.5 * m_t * d.squaredNorm();
            if (f_cand <= rhs + test_guard(f_cand)) break;
            m_t *= 2.0;
            ++doublings;
            ++res.m_doublings;
            if (m_t > m_cap)
                throw RunawayLineSearch(
                    "adaptive_sliding_subroutine: M line search exceeded its cap; "
                    "f may violate the smoothness assumption");
        }

        sum_invp += 1.0 / m_t;
        avg_acc += x_cand / m_t;
        if (record_steps) {
            InnerStepRecord sr;
            sr.m = m_t;
            sr.doublings = doublings;
            sr.x_under = x;       // step origin
            sr.x_bar = x_cand;    // accepted candidate
            res.steps.push_back(std::move(sr));
        }

        // T^t = (M^t/M^{t-1}) (T^{t-1} - t + 1) - 1 + t, carried exactly;
        // the shift is the number of doublings accepted within this step
        const i128 remaining = t_budget - t + 1;
        if (doublings >= 120 || remaining > (std::numeric_limits<i128>::max() >> doublings))
            throw RunawayLineSearch("adaptive_sliding_subroutine: iteration budget overflow");
        t_budget = (remaining << doublings) - 1 + t;

        x = std::move(x_cand);
        res.m_last = m_t;
        if (t_budget == t) break;
        f_cur.value = f_cand;
        f_cur.gradient = problem.eval_f_grad(x, tally);
        m_prev = m_t;
        ++t;
    }

    res.x = std::move(x);
    res.x_tilde = avg_acc / sum_invp;
    res.t_count = static_cast<std::int64_t>(t);
    res.eta_sum_invp = eta * sum_invp;
    res.grad_g_anchor = std::move(g_anchor.gradient);
    return res;
}

namespace {

// One outer iteration of the doubling trial ladder (every k for the naive
// variant, k >= 2 for the parameter-free one). Returns false when the run
// should stop (gap reached or budget exhausted).
bool outer_trial_ladder(const CompositeProblem& problem, const ProxSetup& setup,
                        GdsLaneState& st, const SolverConfig& cfg, double l_cap_base,
                        RunReport& report, OracleTally& tally,
                        std::optional<std::int64_t> fgrad_stop, bool& converged) {
    OuterRecord rec;
    double l_ks = 0.0;
    SlidingResult accepted;
    for (int s = 1;; ++s) {
        l_ks = std::ldexp(st.l_prev, s - 1);
        if (l_ks > cfg.cap_factor * l_cap_base)
            throw RunawayLineSearch("outer L line search exceeded its cap");
        const double m_init = round_up_to_multiple(st.m_last, l_ks);
        OracleTally before = tally;
        SlidingResult sub =
            adaptive_sliding_subroutine(problem, setup, st.x, st.x_tilde, l_ks, m_init,
                                        cfg.cap_factor * m_init, tally, fgrad_stop,
                                        cfg.record_inner);
        st.m_last = sub.m_last;  // estimates survive rejected trials
        const double g_cand = problem.eval_g_value(sub.x_tilde, tally);

        TrialRecord tr;
        tr.l_trial = l_ks;
        tr.inner_iters = sub.t_count;
        tr.m_doublings = sub.m_doublings;
        tr.m_last = sub.m_last;
        tr.cost = tally - before;
        if (cfg.record_inner) tr.steps = sub.steps;
        report.backtracks_m += sub.m_doublings;

        const Vec d = sub.x_tilde - st.x_tilde;
        const double rhs =
            sub.g_anchor_value + sub.grad_g_anchor.dot(d) + 0.5 * l_ks * d.squaredNorm();
        if (g_cand <= rhs + test_guard(g_cand)) {
            tr.accepted = true;
            rec.trials.push_back(std::move(tr));
            accepted = std::move(sub);
            break;
        }
        rec.trials.push_back(std::move(tr));
        ++report.backtracks_l;
    }

    st.x = std::move(accepted.x);
    st.x_tilde = std::move(accepted.x_tilde);
    st.l_prev = l_ks;
    st.accumulate(st.x_tilde, l_ks);

    rec.l_k = l_ks;
    rec.capital_gamma = l_ks;
    rec.m_last = st.m_last;
    if (cfg.record_points) {
        rec.averaged_point = st.averaged();
        rec.accepted_x_under = st.x_tilde;
    }
    if (gap_check_and_record(problem, cfg, st.averaged(), rec, tally)) {
        converged = true;
        report.exit_reason = "gap";
    }
    report.outer_trace.push_back(std::move(rec));
    if (converged) return false;
    if (fgrad_stop && tally.f_grad >= *fgrad_stop) {
        report.exit_reason = "oracle-budget";
        return false;
    }
    return true;
}

std::optional<std::int64_t> budget_level(const SolverConfig& cfg, const OracleTally& start) {
    if (!cfg.oracle_budget) return {};
    return start.f_grad + *cfg.oracle_budget;
}

}  // namespace

RunReport solve_pfgds_naive(const CompositeProblem& problem, const ProxSetup& setup,
                            const Vec& x0, const SolverConfig& cfg, OracleTally& tally) {
    require_euclidean(setup, "solve_pfgds_naive");
    cfg.validate();
    check_finite(x0, "solve_pfgds_naive x0");

    RunReport report;
    report.exit_reason = "max-outer";
    const auto fgrad_stop = budget_level(cfg, tally);

    if (problem.metadata && problem.metadata->optimum_point.size() == x0.size()) {
        const double r2 = (x0 - problem.metadata->optimum_point).squaredNorm();
        report.l0_theory_ok = (r2 <= 0.0) || (cfg.target_eps / r2 <= cfg.l0 &&
                                              cfg.l0 <= problem.metadata->lip_l);
    }

    GdsLaneState st;
    st.x = x0;
    st.x_tilde = x0;
    st.l_prev = cfg.l0;
    st.m_last = cfg.m0;
    st.avg_acc = Vec::Zero(problem.dim());

    bool converged = false;
    try {
        for (int k = 1; k <= cfg.max_outer; ++k) {
            if (!outer_trial_ladder(problem, setup, st, cfg, cfg.l0, report, tally, fgrad_stop,
                                    converged))
                break;
        }
    } catch (const BudgetExceeded&) {
        report.exit_reason = "oracle-budget";
    }
    report.converged = converged;
    finalize(problem, report, st, tally);
    return report;
}

RunReport solve_pfgds(const CompositeProblem& problem, const ProxSetup& setup, const Vec& x0,
                      const SolverConfig& cfg, OracleTally& tally) {
    require_euclidean(setup, "solve_pfgds");
    cfg.validate();
    check_finite(x0, "solve_pfgds x0");

    RunReport report;
    report.exit_reason = "max-outer";
    const auto fgrad_stop = budget_level(cfg, tally);

    GdsLaneState st;
    st.avg_acc = Vec::Zero(problem.dim());

    // k = 1: coupled up-search keeping L_1^1 = M_1^{1,1}, i.e. one joint
    // prox-gradient trial per doubling until both descent tests pass.
    OuterRecord rec1;
    double l11 = cfg.m0;
    Vec x_cand;
    {
        OracleTally before = tally;
        const FirstOrder g0 = problem.eval_g(x0, tally);
        const FirstOrder f0 = problem.eval_f(x0, tally);
        std::int64_t up = 0;
        for (;;) {
            x_cand = setup.composite_prox(g0.gradient + f0.gradient, x0, l11, x0, l11, tally);
            const double f_c = problem.eval_f_value(x_cand, tally);
            const double g_c = problem.eval_g_value(x_cand, tally);
            const Vec d = x_cand - x0;
            const double quad = 0.5 * l11 * d.squaredNorm();
            const bool g_ok = g_c <= g0.value + g0.gradient.dot(d) + quad + test_guard(g_c);
            const bool f_ok = f_c <= f0.value + f0.gradient.dot(d) + quad + test_guard(f_c);
            if (g_ok && f_ok) break;
            l11 *= 2.0;
            ++up;
            if (l11 > cfg.cap_factor * cfg.m0)
                throw RunawayLineSearch(
                    "solve_pfgds: joint first-iteration search exceeded its cap");
        }
        TrialRecord tr;
        tr.l_trial = l11;
        tr.inner_iters = 1;
        tr.m_doublings = up;
        tr.m_last = l11;
        tr.accepted = true;  // provisional; cleared if a down-search trial passes
        tr.cost = tally - before;
        report.backtracks_m += up;
        rec1.trials.push_back(std::move(tr));
    }

    // Down-search: halve L until the g-test first fails and adopt the last
    // passing trial. The floor handles degenerate g whose test never fails.
    Vec best_x = x_cand, best_xt = x_cand;
    double best_l = l11;
    st.m_last = l11;
    try {
        for (int s = 2;; ++s) {
            const double l_s = std::ldexp(l11, -(s - 1));
            if (l_s * cfg.cap_factor < l11) break;  // adopt the floor trial
            const double m_init = round_up_to_multiple(st.m_last, l_s);
            OracleTally before = tally;
            SlidingResult sub =
                adaptive_sliding_subroutine(problem, setup, x0, x0, l_s, m_init,
                                            cfg.cap_factor * m_init, tally, fgrad_stop,
                                            cfg.record_inner);
            st.m_last = sub.m_last;
            const double g_cand = problem.eval_g_value(sub.x_tilde, tally);

            TrialRecord tr;
            tr.l_trial = l_s;
            tr.inner_iters = sub.t_count;
            tr.m_doublings = sub.m_doublings;
            tr.m_last = sub.m_last;
            tr.cost = tally - before;
            if (cfg.record_inner) tr.steps = sub.steps;
            report.backtracks_m += sub.m_doublings;

            const Vec d = sub.x_tilde - x0;
            const double rhs =
                sub.g_anchor_value + sub.grad_g_anchor.dot(d) + 0.5 * l_s * d.squaredNorm();
            const bool pass = g_cand <= rhs + test_guard(g_cand);
            tr.accepted = pass;
            rec1.trials.push_back(std::move(tr));
            if (!pass) {
                ++report.backtracks_l;
                break;
            }
            rec1.trials[rec1.trials.size() - 2].accepted = false;
            best_x = std::move(sub.x);
            best_xt = std::move(sub.x_tilde);
            best_l = l_s;
        }
    } catch (const BudgetExceeded&) {
        report.exit_reason = "oracle-budget";
    }

    st.x = std::move(best_x);
    st.x_tilde = std::move(best_xt);
    st.l_prev = best_l;
    st.accumulate(st.x_tilde, best_l);
    rec1.l_k = best_l;
    rec1.capital_gamma = best_l;
    rec1.m_last = st.m_last;
    if (cfg.record_points) {
        rec1.averaged_point = st.averaged();
        rec1.accepted_x_under = st.x_tilde;
    }
    bool converged = false;
    if (gap_check_and_record(problem, cfg, st.averaged(), rec1, tally)) {
        converged = true;
        report.exit_reason = "gap";
    }
    report.outer_trace.push_back(std::move(rec1));

    if (!converged && report.exit_reason != "oracle-budget") {
        try {
            for (int k = 2; k <= cfg.max_outer; ++k) {
                if (!outer_trial_ladder(problem, setup, st, cfg, best_l, report, tally,
                                        fgrad_stop, converged))
                    break;
            }
        } catch (const BudgetExceeded&) {
            report.exit_reason = "oracle-budget";
        }
    }
    report.converged = converged;
    finalize(problem, report, st, tally);
    return report;
}

}  // namespace gradslide
