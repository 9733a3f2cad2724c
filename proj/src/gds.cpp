#include "gradslide/gds.hpp"

#include <cmath>

namespace gradslide {

namespace {
void require_euclidean(const ProxSetup& setup, const char* who) {
    if (setup.norm_tag() != NormTag::euclidean_l2)
        throw ConfigError(std::string(who) + ": gradient descent sliding requires a euclidean setup");
}
}  // namespace

GdsSubroutineResult gds_subroutine(const CompositeProblem& problem, const ProxSetup& setup,
                                   const Vec& x_prev, const Vec& x_tilde_prev, double eta,
                                   double m, std::int64_t t_count, OracleTally& tally) {
    require_euclidean(setup, "gds_subroutine");
    if (!(eta > 0.0) || !(m > 0.0)) throw ConfigError("gds_subroutine: eta and m must be positive");
    if (t_count < 1) throw ConfigError("gds_subroutine: t_count must be >= 1");

    const Vec grad_g = problem.eval_g_grad(x_tilde_prev, tally);
    Vec x = x_prev;
    Vec avg_acc = Vec::Zero(problem.dim());
    double w_acc = 0.0;
    for (std::int64_t t = 0; t < t_count; ++t) {
        const Vec grad_f = problem.eval_f_grad(x, tally);
        x = setup.composite_prox(grad_g + grad_f, x_tilde_prev, eta, x, m, tally);
        avg_acc += x / m;
        w_acc += 1.0 / m;
    }
    return {x, avg_acc / w_acc};
}

RunReport solve_gds_known(const CompositeProblem& problem, const ProxSetup& setup,
                          const Vec& x0, double lip_l, double lip_m,
                          const SolverConfig& cfg, OracleTally& tally) {
    require_euclidean(setup, "solve_gds_known");
    cfg.validate();
    if (!(lip_l > 0.0) || !(lip_m > 0.0))
        throw ConfigError("solve_gds_known: constants L and M are required and must be positive");
    check_finite(x0, "solve_gds_known x0");

    const std::int64_t t_count = static_cast<std::int64_t>(std::ceil(lip_m / lip_l));
    const double eta = lip_l;
    const bool gap_known = problem.metadata.has_value();

    RunReport report;
    const OracleTally tally_start = tally;

    Vec x = x0, x_tilde = x0;
    Vec avg_acc = Vec::Zero(problem.dim());
    double w_acc = 0.0;
    report.exit_reason = "max-outer";

    for (int k = 1; k <= cfg.max_outer; ++k) {
        OracleTally before = tally;
        auto sub = gds_subroutine(problem, setup, x, x_tilde, eta, lip_m, t_count, tally);
        x = sub.x;
        x_tilde = sub.x_tilde;
        avg_acc += x_tilde / eta;
        w_acc += 1.0 / eta;

        OuterRecord rec;
        rec.l_k = lip_l;
        rec.capital_gamma = lip_l;
        rec.m_last = lip_m;
        TrialRecord trial;
        trial.l_trial = lip_l;
        trial.inner_iters = t_count;
        trial.m_last = lip_m;
        trial.accepted = true;
        trial.cost = tally - before;
        rec.trials.push_back(std::move(trial));
        if (cfg.record_points) rec.averaged_point = avg_acc / w_acc;

        bool stop = false;
        if (cfg.stop_on_gap && gap_known) {
            OracleTally gc_before = tally;
            const double obj = problem.objective(avg_acc / w_acc, tally);
            rec.gap = obj - problem.metadata->optimum_value;
            rec.extra_cost = tally - gc_before;
            if (rec.gap <= cfg.target_eps) {
                report.converged = true;
                report.exit_reason = "gap";
                stop = true;
            }
        }
        report.outer_trace.push_back(std::move(rec));
        if (stop) break;
        if (cfg.oracle_budget && tally.f_grad - tally_start.f_grad >= *cfg.oracle_budget) {
            report.exit_reason = "oracle-budget";
            break;
        }
    }

    report.output_point = avg_acc / w_acc;
    {
        OracleTally scratch;
        report.objective_value = problem.objective(report.output_point, scratch);
    }
    report.gap_estimate = gap_known ? report.objective_value - problem.metadata->optimum_value
                                    : report.objective_value;
    if (!report.converged && gap_known && report.gap_estimate <= cfg.target_eps)
        report.converged = true;
    report.tally = tally;
    return report;
}

}  // namespace gradslide
