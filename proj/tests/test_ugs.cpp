#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gradslide/problems.hpp"
#include "gradslide/recursion.hpp"
#include "gradslide/selftest.hpp"
#include "gradslide/ugs.hpp"

#include <cmath>

using namespace gradslide;

namespace {

Oracle zero_oracle() {
    return [](const Vec& x) { return FirstOrder{0.0, Vec::Zero(x.size())}; };
}

Oracle quad_oracle(double curvature) {
    return [curvature](const Vec& x) {
        return FirstOrder{0.5 * curvature * x.squaredNorm(), curvature * x};
    };
}

}  // namespace

TEST_CASE("inner terminates at T=1 when m_start hits l_trial exactly") {
    CompositeProblem p(3, quad_oracle(0.5), quad_oracle(1.0));
    const ProxSetup setup = ProxSetup::euclidean_rn();
    OracleTally t;
    const Vec x0 = Vec::Constant(3, 1.0);
    const Vec g_grad = p.eval_g_grad(x0, t);
    auto res = ugs_inner(p, setup, x0, x0, x0, g_grad, 2.0, 1.0, 2.0, 0.1, 1e-9, 0x1p30, t);
    CHECK(res.t_count == 1);
    CHECK(res.m_doublings == 0);
    CHECK(res.steps.front().a == 2.0);  // A_1 = M^{1,s} alpha^2 = l_trial bitwise
}

TEST_CASE("inner with f == 0 matches the scalar coefficient recursion") {
    CompositeProblem p(2, zero_oracle(), quad_oracle(1.0));
    const ProxSetup setup = ProxSetup::euclidean_rn();
    OracleTally t;
    const Vec x0 = Vec::Constant(2, -0.5);
    const Vec g_grad = p.eval_g_grad(x0, t);
    const double l_trial = 1.0, gamma = 0.7, m_start = 37.0, eps = 0.05;
    auto res = ugs_inner(p, setup, x0, x0, x0, g_grad, l_trial, gamma, m_start, eps, 1e-9,
                         0x1p40, t);

    // scalar-only simulation of the (alpha, A, c) chain: no doublings ever
    double a_prev = m_start, m_prev = m_start, c_prev = 1.0;
    bool forced_prev = false;
    std::int64_t t_sim = 1;
    int forced_steps = 0;
    for (;; ++t_sim) {
        if (t_sim > 1) {
            const double m = c_prev * m_prev;
            const double alpha = next_coefficient(a_prev, m);
            const double a = m * alpha * alpha;
            if (forced_prev && std::abs(a - l_trial) <= 1e-9 * l_trial) {
                a_prev = a;
                break;
            }
            const bool force = m * termination_root_squared(alpha) <= l_trial * (1.0 + 1e-15);
            c_prev = force ? forced_weight(a, m, l_trial) : 1.0;
            if (force) ++forced_steps;
            forced_prev = force;
            m_prev = m;
            a_prev = a;
        } else {
            if (std::abs(a_prev - l_trial) <= 1e-15 * l_trial) break;
            const bool force =
                m_start * termination_root_squared(1.0) <= l_trial * (1.0 + 1e-15);
            c_prev = force ? forced_weight(a_prev, m_start, l_trial) : 1.0;
            if (force) ++forced_steps;
            forced_prev = force;
        }
    }
    CHECK(res.t_count == t_sim);
    CHECK(res.m_doublings == 0);
    CHECK(forced_steps == 1);  // exactly one c-forcing before landing on L
    CHECK(std::abs(res.steps.back().a - l_trial) <= 1e-9 * l_trial);
    for (size_t i = 0; i < res.steps.size(); ++i)
        CHECK(res.steps[i].a >= l_trial * (1.0 - 1e-12));
}

TEST_CASE("inner requires m_start >= l_trial and positive eps") {
    CompositeProblem p(2, zero_oracle(), quad_oracle(1.0));
    const ProxSetup setup = ProxSetup::euclidean_rn();
    OracleTally t;
    const Vec x0 = Vec::Zero(2);
    CHECK_THROWS_AS(
        ugs_inner(p, setup, x0, x0, x0, x0, 2.0, 1.0, 1.0, 0.1, 1e-9, 0x1p30, t), ConfigError);
    CHECK_THROWS_AS(
        ugs_inner(p, setup, x0, x0, x0, x0, 1.0, 1.0, 2.0, 0.0, 1e-9, 0x1p30, t), ConfigError);
}

TEST_CASE("inner termination suite across instance families") {
    const CheckResult r = check_ugs_termination(200, 314);
    INFO(r.detail);
    CHECK(r.passed);
}

TEST_CASE("outer N=1 collapses to a single inner solve with gamma=1") {
    Instance inst = make_quad_l1(4, 1.0, 4.0, 0.5, 3);
    OracleTally t;
    SolverConfig cfg;
    cfg.l0 = 1.0;
    cfg.m0 = 1.0;
    cfg.max_outer = 1;
    cfg.stop_on_gap = false;
    cfg.record_points = true;
    const Vec x0 = Vec::Zero(4);
    auto rep = solve_ugs(inst.problem, inst.setup, x0, cfg, t);
    REQUIRE(rep.outer_trace.size() == 1);
    CHECK(rep.outer_trace[0].gamma == 1.0);
    // x_under at k=1 is x0 itself
    CHECK(rep.outer_trace[0].accepted_x_under == x0);

    // gamma = 1 makes x-bar and x-tilde coincide bitwise in the inner
    OracleTally t2;
    const Vec g_grad = inst.problem.eval_g_grad(x0, t2);
    auto res = ugs_inner(inst.problem, inst.setup, x0, x0, x0, g_grad, cfg.l0, 1.0,
                         std::max(cfg.m0, cfg.l0), cfg.target_eps, 1e-9, 0x1p40, t2);
    CHECK(res.x_bar == res.x_tilde);
}

TEST_CASE("outer with g == 0 accepts every first trial") {
    CompositeProblem p(3, quad_oracle(2.0), zero_oracle());
    p.metadata = ProblemMetadata{1.0, 2.0, 1e-12, 0.0, Vec::Zero(3)};
    const ProxSetup setup = ProxSetup::euclidean_rn();
    OracleTally t;
    SolverConfig cfg;
    cfg.l0 = 1e-6;  // tiny L0: the zero function satisfies any descent test
    cfg.m0 = 2.0;
    cfg.max_outer = 5;
    cfg.stop_on_gap = false;
    auto rep = solve_ugs(p, setup, Vec::Constant(3, 1.0), cfg, t);
    for (const auto& rec : rep.outer_trace) {
        CHECK(rec.trials.size() == 1);
        CHECK(rec.l_k == doctest::Approx(1e-6));
    }
    CHECK(rep.backtracks_l == 0);
}

TEST_CASE("Gamma chain and theorem-2 style bound replay") {
    Instance inst = make_quad_l1(6, 1.0, 4.0, 0.4, 17);
    OracleTally t;
    SolverConfig cfg;
    cfg.l0 = 0.5;
    cfg.m0 = 1.0;
    cfg.target_eps = 1e-2;
    cfg.max_outer = 200;
    cfg.record_points = true;
    const Vec x0 = starting_point(inst, 5, 0);
    auto rep = solve_ugs(inst.problem, inst.setup, x0, cfg, t);
    CHECK(rep.converged);

    const double v0 = inst.setup.bregman(x0, inst.problem.metadata->optimum_point);
    OracleTally scratch;
    double gamma_prev = 0.0;
    for (size_t k = 0; k < rep.outer_trace.size(); ++k) {
        const auto& rec = rep.outer_trace[k];
        CHECK(std::abs(rec.capital_gamma - rec.l_k * rec.gamma * rec.gamma) <=
              1e-12 * rec.capital_gamma);
        if (k > 0) {
            // Gamma_k = Gamma_{k-1} (1 - gamma_k)
            CHECK(std::abs(rec.capital_gamma - gamma_prev * (1.0 - rec.gamma)) <=
                  1e-12 * rec.capital_gamma);
            CHECK(rec.capital_gamma < gamma_prev);
        }
        gamma_prev = rec.capital_gamma;

        const double obj = inst.problem.objective(rec.averaged_point, scratch);
        const double gap = obj - inst.problem.metadata->optimum_value;
        CHECK(gap <= 0.5 * cfg.target_eps + 2.0 * rec.capital_gamma * v0 + 1e-9);
    }
}

TEST_CASE("accepted trials replay their descent tests") {
    Instance inst = make_quad_l1(5, 1.0, 3.0, 0.5, 23);
    OracleTally t;
    SolverConfig cfg;
    cfg.l0 = 1.0;
    cfg.m0 = 1.0;
    cfg.target_eps = 5e-2;
    cfg.max_outer = 60;
    cfg.record_points = true;
    cfg.record_inner = true;
    const Vec x0 = starting_point(inst, 9, 0);
    auto rep = solve_ugs(inst.problem, inst.setup, x0, cfg, t);

    OracleTally scratch;
    for (const auto& rec : rep.outer_trace) {
        // g-test at the accepted trial
        const auto gu = inst.problem.eval_g(rec.accepted_x_under, scratch);
        const Vec d = rec.averaged_point - rec.accepted_x_under;  // x-bar_k
        const double gb = inst.problem.eval_g_value(rec.averaged_point, scratch);
        CHECK(gb <= gu.value + gu.gradient.dot(d) + 0.5 * rec.l_k * d.squaredNorm() +
                        1e-12 * (1.0 + std::abs(gb)));
        // f-test with recorded slack at every accepted inner step
        for (const auto& tr : rec.trials) {
            if (!tr.accepted) continue;
            for (const auto& st : tr.steps) {
                const auto fu = inst.problem.eval_f(st.x_under, scratch);
                const double fb = inst.problem.eval_f_value(st.x_bar, scratch);
                const Vec sd = st.x_bar - st.x_under;
                CHECK(fb <= fu.value + fu.gradient.dot(sd) + 0.5 * st.m * sd.squaredNorm() +
                                st.slack + 1e-12 * (1.0 + std::abs(fb)));
            }
        }
    }
}

TEST_CASE("1-D |x| inner run keeps M within the smoothed envelope") {
    // f(x) = |x| (nu = 0, M_0 = 2), g(x) = x^2/2, eps = 0.1
    Instance inst = make_quad_l1_explicit(Vec::Constant(1, 1.0), Vec::Constant(1, 0.0), 1.0);
    const double m0_true = inst.problem.metadata->m_nu;
    CHECK(m0_true == 2.0);
    const double eps = 0.1;

    OracleTally t;
    const Vec x_prev = Vec::Constant(1, 0.7);
    const Vec xt_prev = Vec::Constant(1, -0.4);
    const Vec xb_prev = Vec::Constant(1, 0.3);
    const double gamma = 0.5, l_trial = 1.0;
    const Vec g_under =
        inst.problem.eval_g_grad((1.0 - gamma) * xb_prev + gamma * x_prev, t);
    auto res = ugs_inner(inst.problem, inst.setup, x_prev, xt_prev, xb_prev, g_under, l_trial,
                         gamma, std::max(1.0, l_trial), eps, 1e-9, 0x1p60, t);
    for (const auto& st : res.steps) {
        const double cap =
            2.0 * holder_smoothing_bound(m0_true, 0.0, gamma * st.alpha * eps);
        CHECK(st.m <= cap * (1.0 + 1e-9));
    }
}

TEST_CASE("estimate bounds under the regime condition") {
    // quad-l1 with weights chosen so L <= M-bar(nu=0, eps) = M0^2/eps
    Instance inst = make_quad_l1(8, 1.0, 3.0, 0.5, 29);
    const auto& meta = *inst.problem.metadata;
    const double eps = 1e-2;
    const double m_bar = holder_smoothing_bound(meta.m_nu, meta.nu, eps);
    REQUIRE(meta.lip_l <= m_bar);

    OracleTally t;
    SolverConfig cfg;
    cfg.l0 = meta.lip_l / 2.0;  // within (0, L]
    cfg.m0 = 1.0;
    cfg.target_eps = eps;
    cfg.max_outer = 150;
    cfg.record_inner = true;
    auto rep = solve_ugs(inst.problem, inst.setup, starting_point(inst, 2, 0), cfg, t);
    CHECK(rep.l0_theory_ok.has_value());

    const double expo = (1.0 - meta.nu) / (1.0 + meta.nu);
    for (const auto& rec : rep.outer_trace) {
        CHECK(rec.l_k <= 2.0 * meta.lip_l);
        for (const auto& tr : rec.trials) {
            if (!tr.accepted) continue;
            for (size_t i = 0; i + 1 < tr.steps.size(); ++i) {
                const auto& st = tr.steps[i];
                const double m_bar_eps =
                    holder_smoothing_bound(meta.m_nu, meta.nu, cfg.target_eps);
                CHECK(st.m <=
                      2.0 * m_bar_eps * std::pow(rec.gamma * st.alpha, -expo) * (1.0 + 1e-9));
            }
        }
    }
}

TEST_CASE("pfugs coupled first step and down-search") {
    Instance inst = make_quad_quad(4, 2.0, 8.0, 37);
    OracleTally t;
    SolverConfig cfg;
    cfg.m0 = 0.5;
    cfg.target_eps = 1e-3;
    cfg.max_outer = 100;
    auto rep = solve_pfugs(inst.problem, inst.setup, starting_point(inst, 1, 0), cfg, t);
    CHECK(rep.converged);
    const auto& first = rep.outer_trace.front();
    CHECK(first.gamma == 1.0);
    CHECK(first.capital_gamma == first.l_k);

    // m0 above every constant: the coupled step needs no doubling
    OracleTally t2;
    SolverConfig cfg2 = cfg;
    cfg2.m0 = 64.0;
    auto rep2 = solve_pfugs(inst.problem, inst.setup, starting_point(inst, 1, 0), cfg2, t2);
    CHECK(rep2.outer_trace.front().trials.front().m_doublings == 0);
}

TEST_CASE("pfugs down-search floor on degenerate g") {
    CompositeProblem p(2, quad_oracle(1.0), zero_oracle());
    p.metadata = ProblemMetadata{1.0, 1.0, 1e-12, 0.0, Vec::Zero(2)};
    const ProxSetup setup = ProxSetup::euclidean_rn();
    OracleTally t;
    SolverConfig cfg;
    cfg.m0 = 1.0;
    cfg.cap_factor = 0x1p12;  // test-scoped cap so the floor is reachable
    cfg.max_outer = 1;
    cfg.stop_on_gap = false;
    auto rep = solve_pfugs(p, setup, Vec::Constant(2, 1.0), cfg, t);
    const auto& first = rep.outer_trace.front();
    // every down-search trial passed; the run adopted the floor trial
    CHECK(first.l_k == doctest::Approx(std::ldexp(first.trials.front().l_trial, -12)));
    CHECK(rep.backtracks_l == 0);
}

TEST_CASE("pfugs adopts the coupled step when the first halving fails") {
    // g with curvature exactly at the coupled estimate: halving L once fails
    CompositeProblem p(2, quad_oracle(0.25), quad_oracle(4.0));
    p.metadata = ProblemMetadata{1.0, 0.25, 4.0, 0.0, Vec::Zero(2)};
    const ProxSetup setup = ProxSetup::euclidean_rn();
    OracleTally t;
    SolverConfig cfg;
    cfg.m0 = 4.0;  // joint search accepts immediately at L = M = 4
    cfg.max_outer = 1;
    cfg.stop_on_gap = false;
    auto rep = solve_pfugs(p, setup, Vec::Constant(2, 1.0), cfg, t);
    const auto& first = rep.outer_trace.front();
    REQUIRE(first.trials.size() == 2);
    CHECK(first.trials[0].accepted);
    CHECK_FALSE(first.trials[1].accepted);
    CHECK(first.l_k == first.trials[0].l_trial);
}

TEST_CASE("certificate stop runs to the theorem-certified length") {
    Instance inst = make_quad_quad(6, 1.0, 10.0, 47);
    const Vec x0 = starting_point(inst, 8, 0);
    const double v0 = inst.setup.bregman(x0, inst.problem.metadata->optimum_point);

    SolverConfig cfg;
    cfg.target_eps = 1e-2;
    cfg.m0 = 1.0;
    cfg.max_outer = 100000;
    cfg.certificate_stop = true;
    OracleTally t;
    auto rep = solve_pfugs(inst.problem, inst.setup, x0, cfg, t);
    CHECK(rep.converged);
    CHECK(rep.exit_reason == "certificate");
    // the certificate fired exactly at the last iteration and not before
    const double gamma_final = rep.outer_trace.back().capital_gamma;
    CHECK(0.5 * cfg.target_eps + 2.0 * gamma_final * v0 <= cfg.target_eps);
    if (rep.outer_trace.size() > 1) {
        const double gamma_prev = rep.outer_trace[rep.outer_trace.size() - 2].capital_gamma;
        CHECK(0.5 * cfg.target_eps + 2.0 * gamma_prev * v0 > cfg.target_eps);
    }
    // certified implies the measured gap target as well
    CHECK(rep.gap_estimate <= cfg.target_eps);

    // a certificate run never exits earlier than the gap-stop run
    OracleTally t2;
    SolverConfig cfg2 = cfg;
    cfg2.certificate_stop = false;
    auto rep2 = solve_pfugs(inst.problem, inst.setup, x0, cfg2, t2);
    CHECK(rep2.outer_trace.size() <= rep.outer_trace.size());
}

TEST_CASE("inner M runaway cap signals a slack misconfiguration") {
    // curvature far beyond the cap keeps failing the eps-slacked test
    CompositeProblem p(2, quad_oracle(1e30), quad_oracle(1.0));
    const ProxSetup setup = ProxSetup::euclidean_rn();
    OracleTally t;
    const Vec x0 = Vec::Constant(2, 1.0);
    const Vec g_grad = p.eval_g_grad(x0, t);
    CHECK_THROWS_AS(ugs_inner(p, setup, x0, x0, x0, g_grad, 1.0, 1.0, 1.0, 1e-12, 1e-9,
                              0x1p20 /* tight cap */, t),
                    RunawayLineSearch);
}

TEST_CASE("tally conservation including probe gradients") {
    Instance inst = make_quad_l1(5, 1.0, 4.0, 0.5, 41);
    OracleTally t;
    SolverConfig cfg;
    cfg.m0 = 1.0;
    cfg.target_eps = 2e-2;
    cfg.max_outer = 100;

    auto conserve = [](const RunReport& rep, const OracleTally& final_tally) {
        OracleTally sum = rep.init_cost;
        std::int64_t inner_total = 0;
        for (const auto& rec : rep.outer_trace) {
            sum += rec.extra_cost;
            for (const auto& tr : rec.trials) {
                sum += tr.cost;
                inner_total += tr.inner_iters;
            }
        }
        CHECK(sum == final_tally);
        CHECK(final_tally.f_grad == inner_total + rep.probe_fgrad);
    };

    auto rep = solve_pfugs(inst.problem, inst.setup, starting_point(inst, 3, 0), cfg, t);
    conserve(rep, t);

    OracleTally t2;
    SolverConfig cfg2 = cfg;
    cfg2.l0 = 0.5;
    auto rep2 = solve_ugs(inst.problem, inst.setup, starting_point(inst, 3, 0), cfg2, t2);
    conserve(rep2, t2);
}
