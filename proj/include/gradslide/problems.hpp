#pragma once

#include "gradslide/core.hpp"
#include "gradslide/prox.hpp"

#include <string>

namespace gradslide {

// Test-instance factory: composite problems with certified constants
// (nu, M_nu, L) and exact optima. All quadratics are diagonal so constants
// and optima are available in closed form.

struct InstanceSpec {
    std::string family;  // quad-l1 | quad-quad | quad-power | simplex-entropy-linear
    int dim = 1;
    std::uint64_t seed = 0;
    double diag_min = 1.0;   // spectrum of the quadratic g
    double diag_max = 16.0;
    double l1_weight = 1.0;      // quad-l1
    double l_target = 1.0;       // quad-quad
    double m_target = 100.0;     // quad-quad
    double nu = 0.5;             // quad-power
    double power_weight = 1.0;   // quad-power
    double cost_scale = 1.0;     // simplex-entropy-linear
};

struct Instance {
    CompositeProblem problem;
    ProxSetup setup;
    InstanceSpec spec;
};

// g(x) = 1/2 sum d_i (x_i - b_i)^2,  f(x) = w ||x||_1, on R^n with the
// euclidean setup. nu = 0, M_0 = 2 w sqrt(n), L = max d_i; optimum by
// coordinate-wise soft threshold.
Instance make_quad_l1(int dim, double diag_min, double diag_max, double l1_weight,
                      std::uint64_t seed);
// Same family with the quadratic pinned explicitly.
Instance make_quad_l1_explicit(const Vec& diag, const Vec& centers, double l1_weight);

// Both f and g diagonal quadratics with max curvatures m_target and l_target.
Instance make_quad_quad(int dim, double l_target, double m_target, std::uint64_t seed);

// f(x) = (w/(1+nu)) sum |x_i|^{1+nu} (weakly smooth), g diagonal quadratic.
// M_nu ships as a sampled certificate inflated by 1.25.
Instance make_quad_power(int dim, double nu, double weight, std::uint64_t seed);
// Same family with the quadratic pinned explicitly (a zero center puts the
// optimum of that coordinate exactly on the subgradient singularity).
Instance make_quad_power_explicit(const Vec& diag, const Vec& centers, double nu, double weight,
                                  std::uint64_t cert_seed);

// g diagonal quadratic, f linear, over the probability simplex with the
// entropy setup; optimum by exact piecewise-linear waterfilling.
Instance make_simplex_entropy_linear(int dim, double cost_scale, std::uint64_t seed);

// Explicit diagonal-quadratic pair, used by tests that pin specific centers.
Instance make_diag_quad_pair(const Vec& g_diag, const Vec& g_center, const Vec& f_diag,
                             const Vec& f_center);

// Smallest constants satisfying the Holder/Lipschitz conditions over sampled
// pairs in [-box_halfwidth, box_halfwidth]^n, inflated; writes them into the
// problem metadata. Returns (m_nu_hat, l_hat).
std::pair<double, double> certify_constants(CompositeProblem& problem, double box_halfwidth,
                                            int samples, double inflation, std::uint64_t seed);

Instance build_instance(const InstanceSpec& spec);

// Strict parse of the instance-spec JSON (unknown fields rejected), e.g.
// {"family":"quad-l1","dim":50,"l1_weight":1.0,"diag":{"min":1.0,"max":16.0},"seed":7}
InstanceSpec parse_instance_spec(const std::string& json_text);
std::string instance_spec_to_json(const InstanceSpec& spec);

// Deterministic feasible starting point for a sweep repetition.
Vec starting_point(const Instance& inst, std::uint64_t seed, int rep);

}  // namespace gradslide
