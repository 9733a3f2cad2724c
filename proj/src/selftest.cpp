#include "gradslide/selftest.hpp"

#include "gradslide/core.hpp"
#include "gradslide/pfgds.hpp"
#include "gradslide/problems.hpp"
#include "gradslide/prox.hpp"
#include "gradslide/recursion.hpp"
#include "gradslide/ugs.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <vector>

namespace gradslide {

namespace {

class Stopwatch {
  public:
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

  private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

struct Failures {
    int count = 0;
    std::ostringstream first;
    void fail(const std::string& msg) {
        if (count == 0) first << msg;
        ++count;
    }
    CheckResult result(const std::string& name, const Stopwatch& sw) const {
        CheckResult r;
        r.name = name;
        r.passed = count == 0;
        r.detail = count == 0 ? "ok" : (std::to_string(count) + " failures; first: " + first.str());
        r.seconds = sw.elapsed();
        return r;
    }
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

}  // namespace

CheckResult check_lemma5_suite(int schedules) {
    Stopwatch sw;
    Failures f;
    Rng rng(2024);
    constexpr double kGolden = 0.6180339887498949;  // 2/(1+sqrt 5)

    for (int run = 0; run < schedules && f.count < 50; ++run) {
        const int len = static_cast<int>(rng.uniform_int(3, 50));
        const double e1 = std::pow(10.0, rng.uniform(-2.0, 2.0));
        const int mode = static_cast<int>(rng.uniform_int(0, 2));  // 0 const, 1 doubling, 2 random growth

        std::vector<double> lambda{1.0}, capital{e1}, e_seq{e1};
        double sum_ratio = 1.0 / e1;  // sum lambda_i / Lambda_i
        for (int tau = 2; tau <= len; ++tau) {
            double e_next = e_seq.back();
            if (mode == 1)
                e_next *= 2.0;
            else if (mode == 2)
                e_next *= 1.0 + rng.uniform(0.0, 3.0);
            const double lam = next_coefficient(capital.back(), e_next);
            const double cap = e_next * lam * lam;

            // (a) lambda in (0,1), Lambda strictly decreasing and positive
            if (!(lam > 0.0 && lam < 1.0)) f.fail("5(a): lambda outside (0,1)");
            if (!(cap > 0.0 && cap < capital.back())) f.fail("5(a): Lambda not decreasing");
            // (d) lambda strictly decreasing
            if (!(lam < lambda.back())) f.fail("5(d): lambda not strictly decreasing");
            // (e) lambda_tau <= 2/(tau+1)
            if (lam > 2.0 / (tau + 1) + 1e-15) f.fail("5(e): lambda exceeds 2/(tau+1)");
            // (h) doubling E gives lambda <= sqrt(2) * doubled-lambda
            const double lam_doubled = next_coefficient(capital.back(), 2.0 * e_next);
            if (lam > std::sqrt(2.0) * lam_doubled * (1.0 + 1e-12))
                f.fail("5(h): sqrt(q) comparison violated");
            // (i) constant E ratio bound
            const double lam_same = next_coefficient(cap, e_next);
            if (lam_same < kGolden * lam * (1.0 - 1e-12))
                f.fail("5(i): constant-E ratio below 2/(1+sqrt 5)");

            lambda.push_back(lam);
            capital.push_back(cap);
            e_seq.push_back(e_next);
            sum_ratio += lam / cap;

            // (b) 1 = Lambda_tau sum lambda_i / Lambda_i
            if (std::abs(cap * sum_ratio - 1.0) > 1e-9)
                f.fail("5(b): telescoping identity off by " + fmt(cap * sum_ratio - 1.0));
            // (j) Lambda_tau >= E_1 / tau^2
            if (cap < e1 / (static_cast<double>(tau) * tau) * (1.0 - 1e-12))
                f.fail("5(j): Lambda below E_1/tau^2");
        }

        // (g) forcing lands exactly on E_fix with c >= 1
        const int tau = static_cast<int>(capital.size());
        if (tau >= 2) {
            const double e_next = e_seq.back() * (1.0 + rng.uniform(0.0, 1.0));
            const double natural_lam = next_coefficient(capital[tau - 2], e_next);
            const double natural_cap = e_next * natural_lam * natural_lam;
            const double e_fix =
                natural_cap + rng.uniform(0.0, 1.0) * (capital[tau - 2] - natural_cap) * 0.999;
            const double c = forced_weight(capital[tau - 2], e_next, e_fix);
            if (c < 1.0 - 1e-12) f.fail("5(g): c below 1: " + fmt(c));
            const double lam_hat = next_coefficient(capital[tau - 2], c * e_next);
            const double cap_hat = c * e_next * lam_hat * lam_hat;
            if (std::abs(cap_hat - e_fix) > 1e-12 * e_fix)
                f.fail("5(g): forced Lambda misses E_fix by " + fmt(cap_hat - e_fix));
        }
    }

    // (a)/(e)/(j)/(b) on one long chain of 1e4 steps
    {
        double cap = 1.0, lam = 1.0, e_cur = 1.0, sum_ratio = 1.0;
        for (int tau = 2; tau <= 10000; ++tau) {
            e_cur *= 1.0 + 0.01 * rng.uniform();
            lam = next_coefficient(cap, e_cur);
            const double cap_next = e_cur * lam * lam;
            if (!(lam > 0.0 && lam < 1.0 && cap_next < cap)) f.fail("5(a): long chain");
            if (lam > 2.0 / (tau + 1) + 1e-15) f.fail("5(e): long chain");
            sum_ratio += lam / cap_next;
            if (std::abs(cap_next * sum_ratio - 1.0) > 1e-9) f.fail("5(b): long chain");
            if (cap_next < 1.0 / (static_cast<double>(tau) * tau) * (1.0 - 1e-12))
                f.fail("5(j): long chain");
            cap = cap_next;
        }
    }

    return f.result("lemma5-properties", sw);
}

CheckResult check_lemma4_fuzz(int runs, std::uint64_t seed) {
    Stopwatch sw;
    Failures f;
    Rng rng(seed);
    const ProxSetup setup = ProxSetup::euclidean_rn();

    for (int run = 0; run < runs && f.count < 20; ++run) {
        const int n = static_cast<int>(rng.uniform_int(1, 20));
        const Vec dg = rng.uniform_vec(n, 0.2, 3.0);
        const Vec bg = rng.uniform_vec(n, -1.0, 1.0);
        // f with oscillating curvature so probes fail at unpredictable steps
        const double c = std::pow(10.0, rng.uniform(-1.0, 1.0));
        const double omega = rng.uniform(1.0, 6.0);
        const double a = rng.uniform(0.0, 0.9) * c / (omega * omega);
        Oracle f_oracle = [c, a, omega](const Vec& x) {
            FirstOrder out;
            out.value = 0.5 * c * x.squaredNorm();
            out.gradient = c * x;
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                out.value += a * std::cos(omega * x[i]);
                out.gradient[i] -= a * omega * std::sin(omega * x[i]);
            }
            return out;
        };
        Oracle g_oracle = [dg, bg](const Vec& x) {
            FirstOrder out;
            out.gradient = dg.cwiseProduct(x - bg);
            out.value = 0.5 * (x - bg).dot(out.gradient);
            return out;
        };
        CompositeProblem problem(n, std::move(f_oracle), std::move(g_oracle));

        const double eta = std::pow(10.0, rng.uniform(-1.0, 1.0));
        const double m_init = round_up_to_multiple(eta * rng.uniform(0.3, 9.0), eta);
        const Vec x_prev = rng.uniform_vec(n, -2.0, 2.0);
        const Vec xt_prev = rng.uniform_vec(n, -2.0, 2.0);

        OracleTally tally;
        const SlidingResult res = adaptive_sliding_subroutine(problem, setup, x_prev, xt_prev,
                                                              eta, m_init, 0x1p60 * m_init, tally);
        if (std::abs(res.eta_sum_invp - 1.0) > 1e-12)
            f.fail("lemma4: |eta*sum 1/p - 1| = " + fmt(std::abs(res.eta_sum_invp - 1.0)));
        if (res.t_count < 1) f.fail("lemma4: nonpositive T");
    }
    return f.result("lemma4-invariant", sw);
}

CheckResult check_ugs_termination(int runs, std::uint64_t seed) {
    Stopwatch sw;
    Failures f;
    Rng rng(seed);

    for (int run = 0; run < runs && f.count < 20; ++run) {
        Instance inst = [&]() {
            switch (run % 3) {
                case 0:
                    return make_quad_l1(static_cast<int>(rng.uniform_int(2, 8)), 1.0, 4.0,
                                        rng.uniform(0.2, 1.0), rng.next());
                case 1:
                    return make_quad_power(static_cast<int>(rng.uniform_int(2, 8)),
                                           rng.uniform(0.2, 0.8), rng.uniform(0.5, 1.5),
                                           rng.next());
                default:
                    return make_quad_quad(static_cast<int>(rng.uniform_int(2, 8)), 1.0,
                                          rng.uniform(2.0, 30.0), rng.next());
            }
        }();
        const int n = inst.problem.dim();
        const double l_true = inst.problem.metadata->lip_l;
        const double l_trial = l_true * std::pow(2.0, rng.uniform(-2.0, 2.0));
        const double gamma = rng.uniform(0.05, 1.0);
        const double m_start = std::max(l_trial, l_true * rng.uniform(0.5, 8.0));
        const double eps = std::pow(10.0, rng.uniform(-3.0, -1.0));

        const Vec x_prev = rng.uniform_vec(n, -1.0, 1.0);
        const Vec xt_prev = rng.uniform_vec(n, -1.0, 1.0);
        const Vec xb_prev = rng.uniform_vec(n, -1.0, 1.0);
        OracleTally tally;
        const Vec g_under =
            inst.problem.eval_g_grad((1.0 - gamma) * xb_prev + gamma * x_prev, tally);

        UgsInnerResult res;
        try {
            res = ugs_inner(inst.problem, inst.setup, x_prev, xt_prev, xb_prev, g_under,
                            l_trial, gamma, m_start, eps, 1e-9, 0x1p60 * m_start, tally);
        } catch (const RunawayLineSearch& e) {
            f.fail(std::string("ugs_inner runaway: ") + e.what());
            continue;
        }
        if (res.t_count < 1 || res.steps.empty()) {
            f.fail("ugs_inner: empty trace");
            continue;
        }
        const double a_final = res.steps.back().a;
        if (std::abs(a_final - l_trial) > 1e-9 * l_trial)
            f.fail("termination: |A_T - L|/L = " + fmt(std::abs(a_final - l_trial) / l_trial));
        for (size_t t = 0; t + 1 < res.steps.size(); ++t) {
            if (res.steps[t].a < l_trial * (1.0 - 1e-12))
                f.fail("pre-termination: A_t below L at t=" + std::to_string(t + 1));
            if (res.steps[t].forced_next && res.steps[t].c_next < 1.0 - 1e-12)
                f.fail("c-weight below 1: " + fmt(res.steps[t].c_next));
        }
    }
    return f.result("ugs-inner-termination", sw);
}

namespace {

struct ProxCase {
    ProxSetup setup;
    int dim;
};

std::vector<ProxCase> prox_cases(Rng& rng) {
    std::vector<ProxCase> cases;
    cases.push_back({ProxSetup::euclidean_rn(), static_cast<int>(rng.uniform_int(1, 5))});
    {
        const int n = static_cast<int>(rng.uniform_int(1, 5));
        Vec lo = rng.uniform_vec(n, -2.0, -0.1);
        Vec hi = rng.uniform_vec(n, 0.1, 2.0);
        cases.push_back({ProxSetup::euclidean_box(lo, hi), n});
    }
    {
        const int n = static_cast<int>(rng.uniform_int(1, 5));
        cases.push_back(
            {ProxSetup::euclidean_ball(rng.uniform_vec(n, -0.5, 0.5), rng.uniform(0.5, 2.0)), n});
    }
    cases.push_back({ProxSetup::entropy_simplex(), static_cast<int>(rng.uniform_int(2, 6))});
    return cases;
}

Vec random_feasible(const ProxSetup& setup, int n, Rng& rng, bool interior) {
    switch (setup.region().kind) {
        case Region::Kind::all_of_rn:
            return rng.uniform_vec(n, -2.0, 2.0);
        case Region::Kind::box: {
            Vec x(n);
            for (int i = 0; i < n; ++i)
                x[i] = rng.uniform(setup.region().lo[i], setup.region().hi[i]);
            return x;
        }
        case Region::Kind::l2_ball: {
            Vec d = rng.uniform_vec(n, -1.0, 1.0);
            const double r = setup.region().radius * std::pow(rng.uniform(), 1.0 / n);
            return setup.region().center + (r / std::max(d.norm(), 1e-12)) * d;
        }
        case Region::Kind::simplex: {
            Vec u = rng.uniform_vec(n, interior ? -1.5 : -6.0, 0.0);
            Vec x = u.array().exp();
            x /= x.sum();
            return x;
        }
    }
    return Vec::Zero(n);
}

}  // namespace

CheckResult check_prox_three_point(int instances_per_setup, std::uint64_t seed) {
    Stopwatch sw;
    Failures f;
    Rng rng(seed);
    OracleTally tally;

    for (int i = 0; i < instances_per_setup && f.count < 20; ++i) {
        for (const ProxCase& pc : prox_cases(rng)) {
            const int n = pc.dim;
            const Vec linear = rng.uniform_vec(n, -2.0, 2.0);
            const Vec a1 = random_feasible(pc.setup, n, rng, true);
            const Vec a2 = random_feasible(pc.setup, n, rng, true);
            const double w1 = rng.uniform(0.05, 4.0);
            const double w2 = rng.uniform() < 0.25 ? 0.0 : rng.uniform(0.05, 4.0);
            const Vec probe = random_feasible(pc.setup, n, rng, false);

            const double slack =
                pc.setup.three_point_check(linear, a1, w1, a2, w2, probe, tally);
            if (!(slack >= -1e-10)) f.fail("three-point slack " + fmt(slack));

            const Vec u = pc.setup.composite_prox(linear, a1, w1, a2, w2, tally);
            if (!pc.setup.contains(u, 1e-9)) f.fail("prox output infeasible");
            if (pc.setup.region().kind == Region::Kind::simplex &&
                std::abs(u.sum() - 1.0) > 1e-12)
                f.fail("simplex prox sum " + fmt(u.sum() - 1.0));

            const double v = pc.setup.bregman(a1, probe);
            const double half_sq = 0.5 * pc.setup.norm_sq(probe - a1);
            if (v < half_sq * (1.0 - 1e-9) - 1e-12)
                f.fail("bregman below the half-norm-squared bound");
        }
    }
    return f.result("prox-three-point", sw);
}

CheckResult check_prox_grid(std::uint64_t seed) {
    Stopwatch sw;
    Failures f;
    Rng rng(seed);
    OracleTally tally;

    auto objective = [](const ProxSetup& s, const Vec& linear, const Vec& a1, double w1,
                        const Vec& a2, double w2, const Vec& x) {
        double v = linear.dot(x);
        if (w1 > 0.0) v += w1 * s.bregman(a1, x);
        if (w2 > 0.0) v += w2 * s.bregman(a2, x);
        return v;
    };

    // euclidean setups in 2-D: two-stage grid (coarse window, then 1e-3 step)
    for (int rep = 0; rep < 8; ++rep) {
        for (int which = 0; which < 3; ++which) {
            const int n = 2;
            ProxSetup setup = which == 0   ? ProxSetup::euclidean_rn()
                              : which == 1 ? ProxSetup::euclidean_box(Vec::Constant(n, -1.0),
                                                                      Vec::Constant(n, 1.0))
                                           : ProxSetup::euclidean_ball(Vec::Zero(n), 1.0);
            const Vec linear = rng.uniform_vec(n, -1.5, 1.5);
            const Vec a1 = random_feasible(setup, n, rng, true);
            const Vec a2 = random_feasible(setup, n, rng, true);
            const double w1 = rng.uniform(0.3, 3.0);
            const double w2 = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.3, 3.0);
            const Vec u = setup.composite_prox(linear, a1, w1, a2, w2, tally);

            Vec best = u;
            double best_v = objective(setup, linear, a1, w1, a2, w2, u);
            auto scan = [&](const Vec& center, double span, double step) {
                Vec p(n);
                for (double dx = -span; dx <= span + 1e-15; dx += step) {
                    for (double dy = -span; dy <= span + 1e-15; dy += step) {
                        p[0] = center[0] + dx;
                        p[1] = center[1] + dy;
                        if (!setup.contains(p, 0.0)) continue;
                        const double v = objective(setup, linear, a1, w1, a2, w2, p);
                        if (v < best_v) {
                            best_v = v;
                            best = p;
                        }
                    }
                }
            };
            // coarse pass over a window sized from the data, then fine pass
            Vec window_center = 0.5 * (a1 + a2);
            scan(window_center, 3.0, 0.05);
            Vec coarse = best;
            scan(coarse, 0.06, 1e-3);
            if (setup.norm(best - u) > 2e-3)
                f.fail("euclidean grid disagrees by " + fmt(setup.norm(best - u)));
        }

        // entropy on the 2-simplex: parameterize x = (t, 1-t)
        {
            ProxSetup setup = ProxSetup::entropy_simplex();
            const int n = 2;
            const Vec linear = rng.uniform_vec(n, -1.5, 1.5);
            const Vec a1 = random_feasible(setup, n, rng, true);
            const Vec a2 = random_feasible(setup, n, rng, true);
            const double w1 = rng.uniform(0.3, 3.0);
            const double w2 = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.3, 3.0);
            const Vec u = setup.composite_prox(linear, a1, w1, a2, w2, tally);
            Vec best = u;
            double best_v = objective(setup, linear, a1, w1, a2, w2, u);
            Vec p(n);
            for (double t = 1e-4; t < 1.0; t += 1e-3) {
                p[0] = t;
                p[1] = 1.0 - t;
                const double v = objective(setup, linear, a1, w1, a2, w2, p);
                if (v < best_v) {
                    best_v = v;
                    best = p;
                }
            }
            if (setup.norm(best - u) > 2e-3)
                f.fail("entropy grid disagrees by " + fmt(setup.norm(best - u)));
        }
    }
    return f.result("prox-grid-agreement", sw);
}

CheckResult check_smoothing_envelope(int pairs_per_case, std::uint64_t seed) {
    Stopwatch sw;
    Failures f;
    Rng rng(seed);
    OracleTally scratch;

    const double nus[] = {0.0, 0.3, 0.7};
    const double deltas[] = {1e-2, 1e-1};
    for (double nu : nus) {
        Instance inst = nu == 0.0 ? make_quad_l1(6, 1.0, 4.0, 0.7, seed ^ 11)
                                  : make_quad_power(6, nu, 0.8, seed ^ 23);
        const double m_nu = inst.problem.metadata->m_nu;
        const int n = inst.problem.dim();
        for (double delta : deltas) {
            const double m_hat = holder_smoothing_bound(m_nu, nu, delta);
            for (int i = 0; i < pairs_per_case && f.count < 20; ++i) {
                const Vec x = rng.uniform_vec(n, -10.0, 10.0);
                Vec dir = rng.uniform_vec(n, -1.0, 1.0);
                const double dn = dir.norm();
                if (dn == 0.0) continue;
                const double radius = std::pow(10.0, rng.uniform(-6.0, 1.0));
                const Vec y = x + (radius / dn) * dir;
                const FirstOrder fx = inst.problem.eval_f(x, scratch);
                const double fy = inst.problem.eval_f_value(y, scratch);
                const double rhs = fx.value + fx.gradient.dot(y - x) +
                                   0.5 * m_hat * (y - x).squaredNorm() + 0.5 * delta +
                                   1e-12 * (1.0 + std::abs(fy));
                if (fy > rhs)
                    f.fail("envelope violated at nu=" + fmt(nu) + " delta=" + fmt(delta) +
                           " by " + fmt(fy - rhs));
            }
        }
    }
    return f.result("holder-smoothing-envelope", sw);
}

int run_selftest(bool quick, std::ostream& out) {
    const int scale = quick ? 10 : 1;
    CheckResult results[] = {
        check_lemma5_suite(10000 / scale),
        check_lemma4_fuzz(1000 / scale, 71),
        check_ugs_termination(500 / scale, 72),
        check_prox_three_point(1000 / scale, 73),
        check_prox_grid(74),
        check_smoothing_envelope(10000 / scale, 75),
    };
    int failures = 0;
    for (const CheckResult& r : results) {
        out << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << " (" << fmt(r.seconds)
            << " s): " << r.detail << "\n";
        if (!r.passed) ++failures;
    }
    return failures;
}

}  // namespace gradslide
