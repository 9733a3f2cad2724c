#include "gradslide/ugs.hpp"

#include "gradslide/recursion.hpp"

#include <cmath>

namespace gradslide {

namespace {

constexpr std::int64_t kInnerGuard = 10'000'000;  // unreachable by Prop.-5-style termination

double test_guard(double lhs) { return 1e-12 * (1.0 + std::abs(lhs)); }

bool gap_check_and_record(const CompositeProblem& problem, const SolverConfig& cfg,
                          const Vec& point, OuterRecord& rec, OracleTally& tally) {
    if ((!cfg.stop_on_gap && !cfg.certificate_stop) || !problem.metadata.has_value())
        return false;
    OracleTally before = tally;
    const double obj = problem.objective(point, tally);
    rec.gap = obj - problem.metadata->optimum_value;
    rec.extra_cost += tally - before;
    return rec.gap <= cfg.target_eps;
}

// Certificate stop: Gamma_k small enough that eps/2 + 2 Gamma_k V <= eps.
bool certificate_reached(const SolverConfig& cfg, double capital_gamma, double cert_v0) {
    return cfg.certificate_stop && cert_v0 >= 0.0 &&
           0.5 * cfg.target_eps + 2.0 * capital_gamma * cert_v0 <= cfg.target_eps;
}

std::optional<std::int64_t> budget_level(const SolverConfig& cfg, const OracleTally& start) {
    if (!cfg.oracle_budget) return {};
    return start.f_grad + *cfg.oracle_budget;
}

}  // namespace

UgsInnerResult ugs_inner(const CompositeProblem& problem, const ProxSetup& setup,
                         const Vec& x_prev, const Vec& x_tilde_prev, const Vec& x_bar_prev,
                         const Vec& grad_g_underline, double l_trial, double gamma_trial,
                         double m_start, double eps, double equality_tol, double m_cap,
                         OracleTally& tally, std::optional<std::int64_t> fgrad_stop,
                         bool record_points) {
    if (!(l_trial > 0.0) || !(gamma_trial > 0.0 && gamma_trial <= 1.0))
        throw ConfigError("ugs_inner: need l_trial > 0 and gamma in (0, 1]");
    if (!(eps > 0.0)) throw ConfigError("ugs_inner: the universal slack requires eps > 0");
    if (!(m_start >= l_trial))
        throw ConfigError("ugs_inner: m_start must be at least l_trial (M^{0,s} = max{M0, L})");

    const double gamma = gamma_trial;
    const double eta = l_trial * gamma;

    UgsInnerResult res;
    Vec x_t = x_prev;
    Vec xt_t = x_tilde_prev;
    Vec xb_last;

    double m_prev = m_start;  // M^{t-1,s}, starting from M^{0,s}
    double a_prev = 0.0;      // A^{t-1,s}
    double c_prev = 1.0;
    bool forced_prev = false;

    FirstOrder f_under_t1;  // cached: at t=1, alpha=1 fixes x_under across probes
    bool have_f_under_t1 = false;

    for (std::int64_t t = 1;; ++t) {
        if (t > kInnerGuard)
            throw RunawayLineSearch("ugs_inner: inner iteration guard tripped");
        if (fgrad_stop && tally.f_grad >= *fgrad_stop) throw BudgetExceeded{};

        double m_t = c_prev * m_prev;
        std::int64_t doublings = 0;
        double alpha = 1.0;
        Vec x_under, x_cand, xt_cand, xb_cand;
        FirstOrder f_under;
        double f_bar = 0.0, slack = 0.0;

        for (;;) {
            alpha = (t == 1) ? 1.0 : next_coefficient(a_prev, m_t);
            if (t == 1) {
                if (!have_f_under_t1) {
                    x_under = (1.0 - gamma) * x_bar_prev + gamma * x_prev;
                    f_under_t1 = problem.eval_f(x_under, tally);
                    have_f_under_t1 = true;
                } else {
                    x_under = (1.0 - gamma) * x_bar_prev + gamma * x_prev;
                }
                f_under = f_under_t1;
            } else {
                x_under = (1.0 - gamma) * x_bar_prev +
                          gamma * ((1.0 - alpha) * xt_t + alpha * x_t);
                f_under = problem.eval_f(x_under, tally);
                if (doublings > 0) ++res.probe_fgrad;  // re-evaluation forced by a rejection
            }
            const double p = eta * (1.0 - alpha) / alpha + gamma * m_t * alpha;
            x_cand = setup.composite_prox(grad_g_underline + f_under.gradient, x_prev, eta,
                                          x_t, p, tally);
            xt_cand = (1.0 - alpha) * xt_t + alpha * x_cand;
            xb_cand = (1.0 - gamma) * x_bar_prev + gamma * xt_cand;
            f_bar = problem.eval_f_value(xb_cand, tally);
            slack = 0.5 * gamma * alpha * eps;
            const Vec d = xb_cand - x_under;
            const double rhs = f_under.value + f_under.gradient.dot(d) +
                               0.5 * m_t * setup.norm_sq(d) + slack;
            if (f_bar <= rhs + test_guard(f_bar)) break;
            m_t *= 2.0;
            ++doublings;
            ++res.m_doublings;
            if (m_t > m_cap)
                throw RunawayLineSearch(
                    "ugs_inner: M line search exceeded its cap; eps-slack misconfiguration "
                    "or f outside the Holder model");
        }

        const double a = m_t * alpha * alpha;
        x_t = std::move(x_cand);
        xt_t = std::move(xt_cand);
        xb_last = std::move(xb_cand);
        res.m_last = m_t;
        res.t_count = t;

        InnerStepRecord sr;
        sr.alpha = alpha;
        sr.m = m_t;
        sr.a = a;
        sr.doublings = doublings;
        sr.slack = slack;
        if (record_points) {
            sr.x_under = x_under;
            sr.x_bar = xb_last;
        }

        // Termination (Prop.-5 order: the exact hit first, then the forced
        // one). A forced step whose f-test passed without doubling lands on
        // L analytically; the tolerance check absorbs rounding.
        const bool exact_hit = std::abs(a - l_trial) <= 1e-15 * l_trial;
        const bool forced_hit = forced_prev && doublings == 0 &&
                                std::abs(a - l_trial) <= equality_tol * l_trial;
        if (exact_hit || forced_hit) {
            res.steps.push_back(std::move(sr));
            break;
        }

        // Predict whether the natural next A would drop to or below L; if so
        // choose the forcing weight that makes it land exactly on L.
        double c_next = 1.0;
        bool forced_next = false;
        const double predicted_a = m_t * termination_root_squared(alpha);
        if (predicted_a <= l_trial * (1.0 + 1e-15)) {
            c_next = forced_weight(a, m_t, l_trial);
            forced_next = true;
        }
        sr.c_next = c_next;
        sr.forced_next = forced_next;
        res.steps.push_back(std::move(sr));

        m_prev = m_t;
        a_prev = a;
        c_prev = c_next;
        forced_prev = forced_next;
    }

    res.x = std::move(x_t);
    res.x_tilde = std::move(xt_t);
    res.x_bar = std::move(xb_last);
    return res;
}

namespace {

struct AccelState {
    Vec x, x_tilde, x_bar;
    double l_prev = 0.0;
    double gamma_prev_sq_l = 0.0;  // Gamma_{k-1} = L_{k-1} (gamma_{k-1})^2
};

// One accelerated outer iteration with trial-L doubling (k >= 2 for PFUGS,
// every k for UGS). Returns false when the run should stop.
bool accel_outer_iteration(const CompositeProblem& problem, const ProxSetup& setup,
                           AccelState& st, int k, const SolverConfig& cfg, double l_cap_base,
                           double cert_v0, RunReport& report, OracleTally& tally,
                           std::optional<std::int64_t> fgrad_stop, bool& converged) {
    OuterRecord rec;
    double l_ks = 0.0, gamma = 1.0;
    UgsInnerResult accepted;
    Vec accepted_under;
    for (int s = 1;; ++s) {
        l_ks = std::ldexp(st.l_prev, s - 1);
        if (l_ks > cfg.cap_factor * l_cap_base)
            throw RunawayLineSearch("outer L line search exceeded its cap");
        gamma = (k == 1) ? 1.0 : next_coefficient(st.gamma_prev_sq_l, l_ks);
        const Vec x_under = (1.0 - gamma) * st.x_bar + gamma * st.x;

        OracleTally before = tally;
        const FirstOrder g_under = problem.eval_g(x_under, tally);
        const double m_start = std::max(cfg.m0, l_ks);
        UgsInnerResult inner =
            ugs_inner(problem, setup, st.x, st.x_tilde, st.x_bar, g_under.gradient, l_ks,
                      gamma, m_start, cfg.target_eps, cfg.equality_tol,
                      cfg.cap_factor * m_start, tally, fgrad_stop, cfg.record_inner);
        const double g_bar = problem.eval_g_value(inner.x_bar, tally);

        TrialRecord tr;
        tr.l_trial = l_ks;
        tr.inner_iters = inner.t_count;
        tr.m_doublings = inner.m_doublings;
        tr.m_last = inner.m_last;
        tr.cost = tally - before;
        if (cfg.record_inner) tr.steps = inner.steps;
        report.backtracks_m += inner.m_doublings;
        report.probe_fgrad += inner.probe_fgrad;

        const Vec d = inner.x_bar - x_under;
        const double rhs =
            g_under.value + g_under.gradient.dot(d) + 0.5 * l_ks * setup.norm_sq(d);
        if (g_bar <= rhs + test_guard(g_bar)) {
            tr.accepted = true;
            rec.trials.push_back(std::move(tr));
            accepted = std::move(inner);
            accepted_under = x_under;
            break;
        }
        rec.trials.push_back(std::move(tr));
        ++report.backtracks_l;
    }

    st.x = std::move(accepted.x);
    st.x_tilde = std::move(accepted.x_tilde);
    st.x_bar = std::move(accepted.x_bar);
    st.l_prev = l_ks;
    st.gamma_prev_sq_l = l_ks * gamma * gamma;

    rec.l_k = l_ks;
    rec.gamma = gamma;
    rec.capital_gamma = st.gamma_prev_sq_l;
    rec.m_last = accepted.m_last;
    if (cfg.record_points) {
        rec.averaged_point = st.x_bar;
        rec.accepted_x_under = std::move(accepted_under);
    }
    const bool gap_hit = gap_check_and_record(problem, cfg, st.x_bar, rec, tally);
    if (certificate_reached(cfg, rec.capital_gamma, cert_v0)) {
        converged = true;
        report.exit_reason = "certificate";
    } else if (!cfg.certificate_stop && gap_hit) {
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

void finalize_accel(const CompositeProblem& problem, RunReport& report, const AccelState& st,
                    const OracleTally& tally) {
    report.output_point = st.x_bar;
    OracleTally scratch;
    report.objective_value = problem.objective(report.output_point, scratch);
    report.gap_estimate = problem.metadata
                              ? report.objective_value - problem.metadata->optimum_value
                              : report.objective_value;
    report.tally = tally;
}

void require_feasible_start(const ProxSetup& setup, const Vec& x0, const char* who) {
    check_finite(x0, who);
    if (!setup.contains(x0, 1e-9))
        throw ConfigError(std::string(who) + ": x0 is not feasible");
    if (setup.norm_tag() == NormTag::entropy_l1_simplex) {
        for (Eigen::Index i = 0; i < x0.size(); ++i)
            if (!(x0[i] > 0.0))
                throw ConfigError(std::string(who) +
                                  ": entropy setup needs a strictly interior x0");
    }
}

}  // namespace

RunReport solve_ugs(const CompositeProblem& problem, const ProxSetup& setup, const Vec& x0,
                    const SolverConfig& cfg, OracleTally& tally) {
    cfg.validate();
    require_feasible_start(setup, x0, "solve_ugs");

    RunReport report;
    report.exit_reason = "max-outer";
    const auto fgrad_stop = budget_level(cfg, tally);

    if (problem.metadata && problem.metadata->optimum_point.size() == x0.size()) {
        const double v = setup.bregman(x0, problem.metadata->optimum_point);
        report.l0_theory_ok = (v <= 0.0) || (cfg.target_eps / v <= cfg.l0 &&
                                             cfg.l0 <= problem.metadata->lip_l);
    }

    AccelState st;
    st.x = x0;
    st.x_tilde = x0;
    st.x_bar = x0;
    st.l_prev = cfg.l0;

    double cert_v0 = -1.0;
    if (problem.metadata && problem.metadata->optimum_point.size() == x0.size())
        cert_v0 = setup.bregman(x0, problem.metadata->optimum_point);

    bool converged = false;
    try {
        for (int k = 1; k <= cfg.max_outer; ++k) {
            if (!accel_outer_iteration(problem, setup, st, k, cfg, cfg.l0, cert_v0, report,
                                       tally, fgrad_stop, converged))
                break;
        }
    } catch (const BudgetExceeded&) {
        report.exit_reason = "oracle-budget";
    }
    report.converged = converged;
    finalize_accel(problem, report, st, tally);
    return report;
}

RunReport solve_pfugs(const CompositeProblem& problem, const ProxSetup& setup, const Vec& x0,
                      const SolverConfig& cfg, OracleTally& tally) {
    cfg.validate();
    require_feasible_start(setup, x0, "solve_pfugs");

    RunReport report;
    report.exit_reason = "max-outer";
    const auto fgrad_stop = budget_level(cfg, tally);

    AccelState st;
    st.x = x0;
    st.x_tilde = x0;
    st.x_bar = x0;

    double cert_v0 = -1.0;
    if (problem.metadata && problem.metadata->optimum_point.size() == x0.size())
        cert_v0 = setup.bregman(x0, problem.metadata->optimum_point);

    // k = 1, s = 1: single coupled step with gamma = alpha = 1, doubling
    // L_1^1 = M_1^{1,1} jointly until the eps-slacked f-test and the g-test
    // both pass. x_under is x0 for every trial, so one oracle pair suffices.
    OuterRecord rec1;
    double l11 = cfg.m0;
    Vec x_cand;
    {
        OracleTally before = tally;
        const FirstOrder g0 = problem.eval_g(x0, tally);
        const FirstOrder f0 = problem.eval_f(x0, tally);
        std::int64_t up = 0;
        for (;;) {
            const double eta = l11;  // L gamma
            const double p = l11;    // gamma M alpha with gamma = alpha = 1
            x_cand = setup.composite_prox(g0.gradient + f0.gradient, x0, eta, x0, p, tally);
            const double f_c = problem.eval_f_value(x_cand, tally);
            const double g_c = problem.eval_g_value(x_cand, tally);
            const Vec d = x_cand - x0;
            const double quad = 0.5 * l11 * setup.norm_sq(d);
            const bool f_ok = f_c <= f0.value + f0.gradient.dot(d) + quad +
                                         0.5 * cfg.target_eps + test_guard(f_c);
            const bool g_ok = g_c <= g0.value + g0.gradient.dot(d) + quad + test_guard(g_c);
            if (f_ok && g_ok) break;
            l11 *= 2.0;
            ++up;
            if (l11 > cfg.cap_factor * cfg.m0)
                throw RunawayLineSearch(
                    "solve_pfugs: joint first-iteration search exceeded its cap");
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

    // Down-search: L_1^s = L_1^1 / 2^{s-1} with full inner calls while the
    // g-test keeps holding; the first failure adopts the previous trial.
    Vec best_x = x_cand, best_xt = x_cand, best_xb = x_cand;
    double best_l = l11, best_m_last = l11;
    try {
        for (int s = 2;; ++s) {
            const double l_s = std::ldexp(l11, -(s - 1));
            if (l_s * cfg.cap_factor < l11) break;  // degenerate g: adopt the floor trial
            OracleTally before = tally;
            const FirstOrder g_under = problem.eval_g(x0, tally);  // x_under = x0 (gamma = 1)
            const double m_start = std::max(cfg.m0, l_s);
            UgsInnerResult inner =
                ugs_inner(problem, setup, x0, x0, x0, g_under.gradient, l_s, 1.0, m_start,
                          cfg.target_eps, cfg.equality_tol, cfg.cap_factor * m_start, tally,
                          fgrad_stop, cfg.record_inner);
            const double g_bar = problem.eval_g_value(inner.x_bar, tally);

            TrialRecord tr;
            tr.l_trial = l_s;
            tr.inner_iters = inner.t_count;
            tr.m_doublings = inner.m_doublings;
            tr.m_last = inner.m_last;
            tr.cost = tally - before;
            if (cfg.record_inner) tr.steps = inner.steps;
            report.backtracks_m += inner.m_doublings;
            report.probe_fgrad += inner.probe_fgrad;

            const Vec d = inner.x_bar - x0;
            const double rhs =
                g_under.value + g_under.gradient.dot(d) + 0.5 * l_s * setup.norm_sq(d);
            const bool pass = g_bar <= rhs + test_guard(g_bar);
            tr.accepted = pass;
            rec1.trials.push_back(std::move(tr));
            if (!pass) {
                ++report.backtracks_l;
                break;
            }
            rec1.trials[rec1.trials.size() - 2].accepted = false;
            best_x = std::move(inner.x);
            best_xt = std::move(inner.x_tilde);
            best_xb = std::move(inner.x_bar);
            best_l = l_s;
            best_m_last = inner.m_last;
        }
    } catch (const BudgetExceeded&) {
        report.exit_reason = "oracle-budget";
    }

    st.x = std::move(best_x);
    st.x_tilde = std::move(best_xt);
    st.x_bar = std::move(best_xb);
    st.l_prev = best_l;
    st.gamma_prev_sq_l = best_l;  // gamma_1 = 1

    rec1.l_k = best_l;
    rec1.gamma = 1.0;
    rec1.capital_gamma = best_l;
    rec1.m_last = best_m_last;
    if (cfg.record_points) {
        rec1.averaged_point = st.x_bar;
        rec1.accepted_x_under = x0;
    }
    bool converged = false;
    {
        const bool gap_hit = gap_check_and_record(problem, cfg, st.x_bar, rec1, tally);
        if (certificate_reached(cfg, rec1.capital_gamma, cert_v0)) {
            converged = true;
            report.exit_reason = "certificate";
        } else if (!cfg.certificate_stop && gap_hit) {
            converged = true;
            report.exit_reason = "gap";
        }
    }
    report.outer_trace.push_back(std::move(rec1));

    if (!converged && report.exit_reason != "oracle-budget") {
        try {
            for (int k = 2; k <= cfg.max_outer; ++k) {
                if (!accel_outer_iteration(problem, setup, st, k, cfg, best_l, cert_v0, report,
                                           tally, fgrad_stop, converged))
                    break;
            }
        } catch (const BudgetExceeded&) {
            report.exit_reason = "oracle-budget";
        }
    }
    report.converged = converged;
    finalize_accel(problem, report, st, tally);
    return report;
}

}  // namespace gradslide
