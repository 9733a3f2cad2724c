#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gradslide/core.hpp"
#include "gradslide/problems.hpp"
#include "gradslide/selftest.hpp"

#include <cmath>

using namespace gradslide;

namespace {

Vec vec1(double a) {
    Vec v(1);
    v[0] = a;
    return v;
}

Vec vec2(double a, double b) {
    Vec v(2);
    v[0] = a;
    v[1] = b;
    return v;
}

CompositeProblem abs_plus_halfsq() {
    Oracle f = [](const Vec& x) {
        FirstOrder o;
        o.value = std::abs(x[0]);
        o.gradient = vec1(x[0] > 0 ? 1.0 : (x[0] < 0 ? -1.0 : 0.0));
        return o;
    };
    Oracle g = [](const Vec& x) { return FirstOrder{0.5 * x[0] * x[0], x}; };
    return CompositeProblem(1, std::move(f), std::move(g));
}

}  // namespace

TEST_CASE("evaluate_f examples and counters") {
    CompositeProblem p = abs_plus_halfsq();
    OracleTally t;

    auto r = p.eval_f(vec1(0.5), t);
    CHECK(r.value == 0.5);
    CHECK(r.gradient[0] == 1.0);
    CHECK(t.f_val == 1);
    CHECK(t.f_grad == 1);

    // kink: the fixed selection is the minimum-norm subgradient
    r = p.eval_f(vec1(0.0), t);
    CHECK(r.value == 0.0);
    CHECK(r.gradient[0] == 0.0);

    // value-only and gradient-only consumption count separately
    const double v = p.eval_f_value(vec1(-2.0), t);
    CHECK(v == 2.0);
    CHECK(t.f_val == 3);
    CHECK(t.f_grad == 2);
    (void)p.eval_f_grad(vec1(-2.0), t);
    CHECK(t.f_val == 3);
    CHECK(t.f_grad == 3);

    // quadratic f example
    Oracle f = [](const Vec& x) { return FirstOrder{0.5 * x.squaredNorm(), x}; };
    CompositeProblem q(2, f, f);
    auto rq = q.eval_f(vec2(1.0, 2.0), t);
    CHECK(rq.value == 2.5);
    CHECK(rq.gradient == vec2(1.0, 2.0));
}

TEST_CASE("evaluate_g examples") {
    OracleTally t;
    {
        Oracle g = [](const Vec& x) { return FirstOrder{0.5 * x.squaredNorm(), x}; };
        CompositeProblem p(2, g, g);
        auto r = p.eval_g(vec2(3.0, 4.0), t);
        CHECK(r.value == 12.5);
        CHECK(r.gradient == vec2(3.0, 4.0));
        CHECK(t.g_val == 1);
        CHECK(t.g_grad == 1);
    }
    {
        Oracle zero = [](const Vec& x) { return FirstOrder{0.0, Vec::Zero(x.size())}; };
        CompositeProblem p(3, zero, zero);
        auto r = p.eval_g(Vec::Zero(3), t);
        CHECK(r.value == 0.0);
        CHECK(r.gradient.isZero(0.0));
    }
    {
        Oracle g = [](const Vec& x) {
            Vec grad = vec2(2.0 * x[0], 8.0 * x[1]);
            return FirstOrder{0.5 * (2.0 * x[0] * x[0] + 8.0 * x[1] * x[1]), grad};
        };
        CompositeProblem p(2, g, g);
        auto r = p.eval_g(vec2(1.0, 1.0), t);
        CHECK(r.value == 5.0);
        CHECK(r.gradient == vec2(2.0, 8.0));
    }
}

TEST_CASE("oracle failure identifies the offending coordinate") {
    Oracle bad = [](const Vec& x) {
        Vec grad = x;
        grad[1] = std::numeric_limits<double>::quiet_NaN();
        return FirstOrder{0.0, grad};
    };
    Oracle ok = [](const Vec& x) { return FirstOrder{0.0, x}; };
    CompositeProblem p(3, bad, ok);
    OracleTally t;
    CHECK_THROWS_WITH_AS(p.eval_f(Vec::Zero(3), t), doctest::Contains("coordinate 1"),
                         OracleFailure);

    // non-finite inputs are rejected at the boundary as well
    Vec x = Vec::Zero(3);
    x[2] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(p.eval_g(x, t), OracleFailure);
    CHECK_THROWS_AS(p.eval_g(Vec::Zero(2), t), OracleFailure);  // dimension mismatch
}

TEST_CASE("holder_smoothing_bound") {
    // nu = 1: the delta factor drops and M-hat = M_1 exactly
    CHECK(holder_smoothing_bound(3.7, 1.0, 1e-9) == 3.7);
    CHECK(holder_smoothing_bound(3.7, 1.0, 1e9) == 3.7);
    // nu = 0: (1/delta) * M^2
    CHECK(holder_smoothing_bound(2.0, 0.0, 0.5) == doctest::Approx(8.0).epsilon(1e-14));
    // nu = 1/3: (1/2)^(1/2) * 1
    CHECK(holder_smoothing_bound(1.0, 1.0 / 3.0, 1.0) ==
          doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));

    CHECK_THROWS_AS(holder_smoothing_bound(1.0, -0.1, 1.0), std::domain_error);
    CHECK_THROWS_AS(holder_smoothing_bound(1.0, 1.1, 1.0), std::domain_error);
    CHECK_THROWS_AS(holder_smoothing_bound(0.0, 0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(holder_smoothing_bound(1.0, 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("holder and lipschitz conditions hold with shipped metadata") {
    Rng rng(99);
    Instance instances[] = {make_quad_l1(5, 1.0, 4.0, 0.8, 3),
                            make_quad_quad(4, 1.0, 12.0, 4),
                            make_quad_power(4, 0.5, 1.0, 5)};
    for (const Instance& inst : instances) {
        const auto& meta = *inst.problem.metadata;
        OracleTally t;
        const int n = inst.problem.dim();
        for (int i = 0; i < 1000; ++i) {
            const Vec x = rng.uniform_vec(n, -10.0, 10.0);
            Vec dir = rng.uniform_vec(n, -1.0, 1.0);
            if (dir.norm() == 0.0) continue;
            const double radius = std::pow(10.0, rng.uniform(-5.0, 1.0));
            const Vec y = x + (radius / dir.norm()) * dir;

            const auto fx = inst.problem.eval_f(x, t);
            const double fy = inst.problem.eval_f_value(y, t);
            const double f_gap = fy - fx.value - fx.gradient.dot(y - x);
            CHECK(f_gap <= meta.m_nu / (1.0 + meta.nu) * std::pow((y - x).norm(), 1.0 + meta.nu) +
                               1e-12 * (1.0 + std::abs(fy)));

            const auto gx = inst.problem.eval_g(x, t);
            const double gy = inst.problem.eval_g_value(y, t);
            const double g_gap = gy - gx.value - gx.gradient.dot(y - x);
            CHECK(g_gap <= 0.5 * meta.lip_l * (y - x).squaredNorm() + 1e-12 * (1.0 + std::abs(gy)));
        }
    }
}

TEST_CASE("smoothing envelope suite") {
    const CheckResult r = check_smoothing_envelope(2000, 17);
    INFO(r.detail);
    CHECK(r.passed);
}
