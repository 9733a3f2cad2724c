#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gradslide/prox.hpp"
#include "gradslide/selftest.hpp"

#include <cmath>

using namespace gradslide;

namespace {

Vec vec2(double a, double b) {
    Vec v(2);
    v[0] = a;
    v[1] = b;
    return v;
}

}  // namespace

TEST_CASE("bregman examples") {
    const ProxSetup euc = ProxSetup::euclidean_rn();
    CHECK(euc.bregman(vec2(0, 0), vec2(3, 4)) == 12.5);
    CHECK(euc.bregman(vec2(1.5, -2), vec2(1.5, -2)) == 0.0);

    const ProxSetup ent = ProxSetup::entropy_simplex();
    const double kl = ent.bregman(vec2(0.5, 0.5), vec2(0.75, 0.25));
    CHECK(kl == doctest::Approx(0.75 * std::log(1.5) + 0.25 * std::log(0.5)).epsilon(1e-14));
    CHECK(kl == doctest::Approx(0.13081).epsilon(1e-4));
    CHECK(ent.bregman(vec2(0.3, 0.7), vec2(0.3, 0.7)) == doctest::Approx(0.0));

    // entropy requires an interior first argument
    CHECK_THROWS_AS(ent.bregman(vec2(0.0, 1.0), vec2(0.5, 0.5)), std::domain_error);
}

TEST_CASE("composite_prox closed forms") {
    OracleTally t;
    const ProxSetup euc = ProxSetup::euclidean_rn();
    // (w1 a1 + w2 a2 - linear)/(w1 + w2)
    const Vec u = euc.composite_prox(vec2(1, 0), vec2(0, 0), 2.0, vec2(2, 2), 2.0, t);
    CHECK(u[0] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(u[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(t.prox_calls == 1);

    // single-anchor box prox == clamped gradient step
    const ProxSetup box = ProxSetup::euclidean_box(vec2(0, 0), vec2(1, 1));
    const Vec ub = box.composite_prox(vec2(3.0, -0.25), vec2(0.5, 0.5), 1.0, vec2(0, 0), 0.0, t);
    CHECK(ub[0] == 0.0);   // 0.5 - 3 clamped up
    CHECK(ub[1] == 0.75);  // 0.5 + 0.25 interior
    // 1-D grid confirmation per coordinate
    for (int i = 0; i < 2; ++i) {
        double best = 0.0, best_v = 1e300;
        for (double x = 0.0; x <= 1.0; x += 1e-4) {
            const double v = vec2(3.0, -0.25)[i] * x + 0.5 * (x - 0.5) * (x - 0.5);
            if (v < best_v) {
                best_v = v;
                best = x;
            }
        }
        CHECK(std::abs(ub[i] - best) < 2e-4);
    }

    // entropy with one anchor: multiplicative update, renormalized
    const ProxSetup ent = ProxSetup::entropy_simplex();
    const Vec a1 = vec2(0.25, 0.75);
    const Vec lin = vec2(0.8, -0.4);
    const Vec ue = ent.composite_prox(lin, a1, 2.0, vec2(0.5, 0.5), 0.0, t);
    Vec expect(2);
    for (int i = 0; i < 2; ++i) expect[i] = a1[i] * std::exp(-lin[i] / 2.0);
    expect /= expect.sum();
    CHECK(ue[0] == doctest::Approx(expect[0]).epsilon(1e-13));
    CHECK(ue[1] == doctest::Approx(expect[1]).epsilon(1e-13));
}

TEST_CASE("composite_prox preconditions and configuration") {
    OracleTally t;
    const ProxSetup euc = ProxSetup::euclidean_rn();
    CHECK_THROWS_AS(euc.composite_prox(vec2(0, 0), vec2(0, 0), 0.0, vec2(0, 0), 0.0, t),
                    std::invalid_argument);
    CHECK_THROWS_AS(euc.composite_prox(vec2(0, 0), vec2(0, 0), -1.0, vec2(0, 0), 2.0, t),
                    std::invalid_argument);
    // unsupported setup combinations are configuration errors
    CHECK_THROWS_AS(ProxSetup(NormTag::euclidean_l2, Region::simplex()), ConfigError);
    CHECK_THROWS_AS(ProxSetup(NormTag::entropy_l1_simplex, Region::all_of_rn()), ConfigError);
    // entropy anchors with a zero coordinate are rejected, not perturbed
    const ProxSetup ent = ProxSetup::entropy_simplex();
    CHECK_THROWS_AS(ent.composite_prox(vec2(0, 0), vec2(0.0, 1.0), 1.0, vec2(0.5, 0.5), 1.0, t),
                    std::domain_error);
}

TEST_CASE("l2 ball prox projects radially with boundary KKT") {
    OracleTally t;
    const ProxSetup ball = ProxSetup::euclidean_ball(vec2(0, 0), 1.0);
    // unconstrained minimizer far outside: lands on the boundary
    const Vec u = ball.composite_prox(vec2(-6.0, -8.0), vec2(0, 0), 1.0, vec2(0, 0), 1.0, t);
    CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(u[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(u[1] == doctest::Approx(0.8).epsilon(1e-12));
    // boundary KKT: gradient of the objective is anti-parallel to the normal
    const Vec grad = vec2(-6.0, -8.0) + 2.0 * u;  // w1 (u-a1) + w2 (u-a2) + linear
    CHECK((grad + grad.norm() * u).norm() < 1e-10);
}

TEST_CASE("three_point_check examples") {
    OracleTally t;
    const ProxSetup euc = ProxSetup::euclidean_rn();
    const Vec lin = vec2(0.3, -1.2);
    const Vec a1 = vec2(1, 0), a2 = vec2(0, 2);
    const Vec u = euc.composite_prox(lin, a1, 1.5, a2, 0.5, t);
    // probe at the minimizer: identity case
    CHECK(euc.three_point_check(lin, a1, 1.5, a2, 0.5, u, t) == doctest::Approx(0.0).epsilon(1e-12));
    // euclidean over R^n: Lemma 6 holds with equality everywhere
    CHECK(euc.three_point_check(lin, a1, 1.5, a2, 0.5, vec2(-3, 7), t) ==
          doctest::Approx(0.0).epsilon(1e-10));

    // boundary minimizer on a box: interior probes see positive slack
    const ProxSetup box = ProxSetup::euclidean_box(vec2(0, 0), vec2(1, 1));
    const double slack =
        box.three_point_check(vec2(5.0, 0.1), vec2(0.5, 0.5), 1.0, vec2(0.2, 0.2), 1.0,
                              vec2(0.9, 0.4), t);
    CHECK(slack >= -1e-10);
    CHECK(slack > 1e-6);  // strictly positive: the constraint is active
    CHECK_THROWS_AS(
        box.three_point_check(vec2(0, 0), vec2(0.5, 0.5), 1.0, vec2(0.2, 0.2), 1.0, vec2(2, 0), t),
        std::invalid_argument);
}

TEST_CASE("prox invariants across setups") {
    const CheckResult tp = check_prox_three_point(400, 5);
    INFO(tp.detail);
    CHECK(tp.passed);
    const CheckResult grid = check_prox_grid(6);
    INFO(grid.detail);
    CHECK(grid.passed);
}

TEST_CASE("feasibility and centers") {
    const ProxSetup ent = ProxSetup::entropy_simplex();
    CHECK(ent.center_point(4) == Vec::Constant(4, 0.25));
    CHECK(ent.contains(Vec::Constant(4, 0.25)));
    CHECK_FALSE(ent.contains(vec2(0.7, 0.7)));
    const ProxSetup box = ProxSetup::euclidean_box(vec2(-1, -1), vec2(1, 1));
    CHECK(box.center_point(2) == vec2(0, 0));
    CHECK_FALSE(box.contains(vec2(1.5, 0)));
}
