#include "gradslide/problems.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gradslide {

namespace {

// log-spaced spectrum with the top entry exactly at hi
Vec log_spaced(int n, double lo, double hi) {
    Vec d(n);
    if (n == 1) {
        d[0] = hi;
        return d;
    }
    for (int i = 0; i < n; ++i)
        d[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    d[n - 1] = hi;
    return d;
}

Oracle diag_quad_oracle(Vec diag, Vec center) {
    return [d = std::move(diag), c = std::move(center)](const Vec& x) {
        FirstOrder out;
        out.gradient = d.cwiseProduct(x - c);
        out.value = 0.5 * (x - c).dot(out.gradient);
        return out;
    };
}

double diag_quad_value(const Vec& d, const Vec& c, const Vec& x) {
    return 0.5 * d.dot((x - c).cwiseAbs2());
}

Oracle l1_oracle(double w) {
    return [w](const Vec& x) {
        FirstOrder out;
        out.value = w * x.lpNorm<1>();
        out.gradient = Vec(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i)
            out.gradient[i] = x[i] > 0.0 ? w : (x[i] < 0.0 ? -w : 0.0);  // 0 at the kink
        return out;
    };
}

Oracle power_oracle(double w, double nu) {
    return [w, nu](const Vec& x) {
        FirstOrder out;
        double v = 0.0;
        out.gradient = Vec(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double a = std::abs(x[i]);
            v += std::pow(a, 1.0 + nu);
            out.gradient[i] = x[i] == 0.0 ? 0.0 : w * std::copysign(std::pow(a, nu), x[i]);
        }
        out.value = w / (1.0 + nu) * v;
        return out;
    };
}

Oracle linear_oracle(Vec cost) {
    return [c = std::move(cost)](const Vec& x) {
        return FirstOrder{c.dot(x), c};
    };
}

double soft_threshold(double b, double lam) {
    return std::copysign(std::max(std::abs(b) - lam, 0.0), b);
}

// 1-D minimizer of  1/2 d (x-b)^2 + (w/(1+nu)) |x|^{1+nu}  by bracketing
// bisection on the stationarity condition (same sign side as b).
double power_coordinate_optimum(double d, double b, double w, double nu) {
    if (b == 0.0) return 0.0;
    const double s = b > 0.0 ? 1.0 : -1.0;
    const double ab = std::abs(b);
    // h'(x) = d(x - ab) + w x^nu on x >= 0: negative at 0+, positive at ab
    double lo = 0.0, hi = ab;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double grad = d * (mid - ab) + w * std::pow(mid, nu);
        (grad > 0.0 ? hi : lo) = mid;
    }
    return s * 0.5 * (lo + hi);
}

// Exact minimizer of sum 1/2 d_i (x_i-b_i)^2 + c_i x_i over the simplex:
// x_i(mu) = max((d_i b_i - c_i - mu)/d_i, 0) with sum x_i(mu) = 1, solved on
// the piecewise-linear breakpoint grid.
Vec simplex_quadratic_optimum(const Vec& d, const Vec& b, const Vec& c) {
    const int n = static_cast<int>(d.size());
    Vec r(n);
    for (int i = 0; i < n; ++i) r[i] = d[i] * b[i] - c[i];  // breakpoint of coordinate i
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return r[i] > r[j]; });
    // with the top m coordinates active: sum (r_i - mu)/d_i = 1
    double inv_sum = 0.0, ratio_sum = 0.0;
    double mu = 0.0;
    for (int m = 0; m < n; ++m) {
        const int i = order[m];
        inv_sum += 1.0 / d[i];
        ratio_sum += r[i] / d[i];
        mu = (ratio_sum - 1.0) / inv_sum;
        const double next_r = m + 1 < n ? r[order[m + 1]] : -std::numeric_limits<double>::infinity();
        if (mu >= next_r) break;  // active set consistent
    }
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = std::max((r[i] - mu) / d[i], 0.0);
    return x;
}

}  // namespace

Instance make_quad_l1_explicit(const Vec& diag, const Vec& centers, double l1_weight) {
    const int dim = static_cast<int>(diag.size());
    if (dim < 1 || diag.minCoeff() <= 0.0 || centers.size() != dim || !(l1_weight > 0.0))
        throw ConfigError("make_quad_l1_explicit: bad parameters");
    CompositeProblem problem(dim, l1_oracle(l1_weight), diag_quad_oracle(diag, centers));
    ProblemMetadata meta;
    meta.nu = 0.0;
    meta.m_nu = 2.0 * l1_weight * std::sqrt(static_cast<double>(dim));
    meta.lip_l = diag.maxCoeff();
    meta.optimum_point = Vec(dim);
    for (int i = 0; i < dim; ++i)
        meta.optimum_point[i] = soft_threshold(centers[i], l1_weight / diag[i]);
    meta.optimum_value = diag_quad_value(diag, centers, meta.optimum_point) +
                         l1_weight * meta.optimum_point.lpNorm<1>();
    problem.metadata = meta;

    InstanceSpec spec;
    spec.family = "quad-l1";
    spec.dim = dim;
    spec.diag_min = diag.minCoeff();
    spec.diag_max = diag.maxCoeff();
    spec.l1_weight = l1_weight;
    return {std::move(problem), ProxSetup::euclidean_rn(), std::move(spec)};
}

Instance make_quad_l1(int dim, double diag_min, double diag_max, double l1_weight,
                      std::uint64_t seed) {
    if (dim < 1 || !(diag_min > 0.0) || !(diag_max >= diag_min) || !(l1_weight > 0.0))
        throw ConfigError("make_quad_l1: bad parameters");
    Rng rng(seed);
    Vec d = log_spaced(dim, diag_min, diag_max);
    Vec b = rng.uniform_vec(dim, -2.0, 2.0);
    Instance inst = make_quad_l1_explicit(d, b, l1_weight);
    inst.spec.seed = seed;
    inst.spec.diag_min = diag_min;
    inst.spec.diag_max = diag_max;
    return inst;
}

Instance make_diag_quad_pair(const Vec& g_diag, const Vec& g_center, const Vec& f_diag,
                             const Vec& f_center) {
    const int dim = static_cast<int>(g_diag.size());
    CompositeProblem problem(dim, diag_quad_oracle(f_diag, f_center),
                             diag_quad_oracle(g_diag, g_center));
    ProblemMetadata meta;
    meta.nu = 1.0;
    meta.m_nu = f_diag.maxCoeff();
    meta.lip_l = g_diag.maxCoeff();
    meta.optimum_point =
        (g_diag.cwiseProduct(g_center) + f_diag.cwiseProduct(f_center))
            .cwiseQuotient(g_diag + f_diag);
    meta.optimum_value = diag_quad_value(g_diag, g_center, meta.optimum_point) +
                         diag_quad_value(f_diag, f_center, meta.optimum_point);
    problem.metadata = meta;

    InstanceSpec spec;
    spec.family = "quad-quad";
    spec.dim = dim;
    spec.l_target = meta.lip_l;
    spec.m_target = meta.m_nu;
    return {std::move(problem), ProxSetup::euclidean_rn(), std::move(spec)};
}

Instance make_quad_quad(int dim, double l_target, double m_target, std::uint64_t seed) {
    if (dim < 1 || !(l_target > 0.0) || !(m_target >= l_target))
        throw ConfigError("make_quad_quad: need m_target >= l_target > 0");
    Rng rng(seed);
    Vec dg = log_spaced(dim, l_target / 4.0, l_target);
    Vec df = log_spaced(dim, m_target / 4.0, m_target);
    // decouple the two spectra so the conditioning is not aligned
    for (int i = dim - 2; i > 0; --i)
        std::swap(df[i], df[rng.uniform_int(0, i)]);
    df[dim - 1] = m_target;
    Vec bg = rng.uniform_vec(dim, -1.0, 1.0);
    Vec bf = rng.uniform_vec(dim, -1.0, 1.0);
    Instance inst = make_diag_quad_pair(dg, bg, df, bf);
    inst.spec.dim = dim;
    inst.spec.seed = seed;
    inst.spec.l_target = l_target;
    inst.spec.m_target = m_target;
    return inst;
}

Instance make_quad_power_explicit(const Vec& diag, const Vec& centers, double nu, double weight,
                                  std::uint64_t cert_seed) {
    if (!(nu > 0.0 && nu < 1.0))
        throw std::domain_error("make_quad_power: nu must lie in (0,1); use quad-l1 or quad-quad");
    const int dim = static_cast<int>(diag.size());
    if (dim < 1 || diag.minCoeff() <= 0.0 || centers.size() != dim || !(weight > 0.0))
        throw ConfigError("make_quad_power: bad parameters");

    CompositeProblem problem(dim, power_oracle(weight, nu), diag_quad_oracle(diag, centers));
    ProblemMetadata meta;
    meta.nu = nu;
    meta.optimum_point = Vec(dim);
    for (int i = 0; i < dim; ++i)
        meta.optimum_point[i] = power_coordinate_optimum(diag[i], centers[i], weight, nu);
    {
        OracleTally scratch;
        meta.optimum_value = problem.objective(meta.optimum_point, scratch);
    }
    problem.metadata = meta;
    certify_constants(problem, 10.0, 20000, 1.25, cert_seed);
    problem.metadata->lip_l = diag.maxCoeff();  // exact for a diagonal quadratic g

    InstanceSpec spec;
    spec.family = "quad-power";
    spec.dim = dim;
    spec.nu = nu;
    spec.power_weight = weight;
    return {std::move(problem), ProxSetup::euclidean_rn(), std::move(spec)};
}

Instance make_quad_power(int dim, double nu, double weight, std::uint64_t seed) {
    if (dim < 1) throw ConfigError("make_quad_power: bad parameters");
    Rng rng(seed);
    Vec d = log_spaced(dim, 1.0, 4.0);
    Vec b = rng.uniform_vec(dim, -1.0, 1.0);
    Instance inst = make_quad_power_explicit(d, b, nu, weight, seed ^ 0xc0ffee);
    inst.spec.seed = seed;
    return inst;
}

Instance make_simplex_entropy_linear(int dim, double cost_scale, std::uint64_t seed) {
    if (dim < 2 || !(cost_scale > 0.0)) throw ConfigError("make_simplex_entropy_linear: bad parameters");
    Rng rng(seed);
    Vec d = log_spaced(dim, 1.0, 8.0);
    Vec b = rng.uniform_vec(dim, 0.0, 2.0 / dim);
    Vec c = rng.uniform_vec(dim, -1.0, 1.0) * cost_scale;

    CompositeProblem problem(dim, linear_oracle(c), diag_quad_oracle(d, b));
    ProblemMetadata meta;
    meta.nu = 1.0;
    meta.m_nu = 1e-9;  // linear f: the Holder gap is identically zero
    meta.lip_l = d.maxCoeff();
    meta.optimum_point = simplex_quadratic_optimum(d, b, c);
    meta.optimum_value = diag_quad_value(d, b, meta.optimum_point) + c.dot(meta.optimum_point);
    problem.metadata = meta;

    InstanceSpec spec;
    spec.family = "simplex-entropy-linear";
    spec.dim = dim;
    spec.seed = seed;
    spec.cost_scale = cost_scale;
    return {std::move(problem), ProxSetup::entropy_simplex(), std::move(spec)};
}

std::pair<double, double> certify_constants(CompositeProblem& problem, double box_halfwidth,
                                            int samples, double inflation, std::uint64_t seed) {
    if (samples < 10000) throw ConfigError("certify_constants: need at least 1e4 samples");
    if (!(inflation >= 1.1)) throw ConfigError("certify_constants: inflation must be >= 1.1");
    const double nu = problem.metadata ? problem.metadata->nu : 1.0;
    Rng rng(seed);
    OracleTally scratch;
    const int n = problem.dim();
    double m_hat = 0.0, l_hat = 0.0;
    for (int k = 0; k < samples; ++k) {
        Vec x = rng.uniform_vec(n, -box_halfwidth, box_halfwidth);
        // log-uniform pair distances so the small-step regime is exercised
        Vec dir = rng.uniform_vec(n, -1.0, 1.0);
        const double dn = dir.norm();
        if (dn == 0.0) continue;
        const double radius = std::pow(10.0, rng.uniform(-6.0, std::log10(box_halfwidth)));
        Vec y = x + (radius / dn) * dir;

        const FirstOrder fx = problem.eval_f(x, scratch);
        const double fy = problem.eval_f_value(y, scratch);
        const double f_gap = fy - fx.value - fx.gradient.dot(y - x);
        if (f_gap > 0.0)
            m_hat = std::max(m_hat, f_gap * (1.0 + nu) / std::pow((y - x).norm(), 1.0 + nu));

        const FirstOrder gx = problem.eval_g(x, scratch);
        const double gy = problem.eval_g_value(y, scratch);
        const double g_gap = gy - gx.value - gx.gradient.dot(y - x);
        if (g_gap > 0.0) l_hat = std::max(l_hat, 2.0 * g_gap / (y - x).squaredNorm());
    }
    m_hat *= inflation;
    l_hat *= inflation;
    if (!problem.metadata) problem.metadata = ProblemMetadata{};
    problem.metadata->nu = nu;
    problem.metadata->m_nu = m_hat;
    problem.metadata->lip_l = l_hat;
    return {m_hat, l_hat};
}

Instance build_instance(const InstanceSpec& spec) {
    if (spec.family == "quad-l1")
        return make_quad_l1(spec.dim, spec.diag_min, spec.diag_max, spec.l1_weight, spec.seed);
    if (spec.family == "quad-quad")
        return make_quad_quad(spec.dim, spec.l_target, spec.m_target, spec.seed);
    if (spec.family == "quad-power")
        return make_quad_power(spec.dim, spec.nu, spec.power_weight, spec.seed);
    if (spec.family == "simplex-entropy-linear")
        return make_simplex_entropy_linear(spec.dim, spec.cost_scale, spec.seed);
    throw ConfigError("unknown instance family: " + spec.family);
}

namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) ok = true;
        if (!ok) throw ConfigError("instance spec: unknown field '" + it.key() + "'");
    }
}

}  // namespace

InstanceSpec parse_instance_spec(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("instance spec: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("instance spec: expected a JSON object");

    InstanceSpec spec;
    if (!j.contains("family") || !j["family"].is_string())
        throw ConfigError("instance spec: 'family' (string) is required");
    spec.family = j["family"].get<std::string>();

    if (spec.family == "quad-l1")
        reject_unknown(j, {"family", "dim", "seed", "diag", "l1_weight"});
    else if (spec.family == "quad-quad")
        reject_unknown(j, {"family", "dim", "seed", "l_target", "m_target"});
    else if (spec.family == "quad-power")
        reject_unknown(j, {"family", "dim", "seed", "nu", "weight"});
    else if (spec.family == "simplex-entropy-linear")
        reject_unknown(j, {"family", "dim", "seed", "cost_scale"});
    else
        throw ConfigError("instance spec: unknown family '" + spec.family + "'");

    if (!j.contains("dim")) throw ConfigError("instance spec: 'dim' is required");
    spec.dim = j["dim"].get<int>();
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("diag")) {
        const json& d = j["diag"];
        reject_unknown(d, {"min", "max"});
        if (d.contains("min")) spec.diag_min = d["min"].get<double>();
        if (d.contains("max")) spec.diag_max = d["max"].get<double>();
    }
    if (j.contains("l1_weight")) spec.l1_weight = j["l1_weight"].get<double>();
    if (j.contains("l_target")) spec.l_target = j["l_target"].get<double>();
    if (j.contains("m_target")) spec.m_target = j["m_target"].get<double>();
    if (j.contains("nu")) spec.nu = j["nu"].get<double>();
    if (j.contains("weight")) spec.power_weight = j["weight"].get<double>();
    if (j.contains("cost_scale")) spec.cost_scale = j["cost_scale"].get<double>();
    return spec;
}

std::string instance_spec_to_json(const InstanceSpec& spec) {
    json j;
    j["family"] = spec.family;
    j["dim"] = spec.dim;
    j["seed"] = spec.seed;
    if (spec.family == "quad-l1") {
        j["diag"] = {{"min", spec.diag_min}, {"max", spec.diag_max}};
        j["l1_weight"] = spec.l1_weight;
    } else if (spec.family == "quad-quad") {
        j["l_target"] = spec.l_target;
        j["m_target"] = spec.m_target;
    } else if (spec.family == "quad-power") {
        j["nu"] = spec.nu;
        j["weight"] = spec.power_weight;
    } else if (spec.family == "simplex-entropy-linear") {
        j["cost_scale"] = spec.cost_scale;
    }
    return j.dump();
}

Vec starting_point(const Instance& inst, std::uint64_t seed, int rep) {
    Rng rng(seed * 0x51ed2701ULL + static_cast<std::uint64_t>(rep) + 1);
    const int n = inst.problem.dim();
    if (inst.setup.norm_tag() == NormTag::entropy_l1_simplex) {
        // strictly interior: softmax of a small uniform perturbation
        Vec u = rng.uniform_vec(n, -0.5, 0.5);
        Vec x = (u.array() - u.maxCoeff()).exp();
        return x / x.sum();
    }
    Vec x = rng.uniform_vec(n, -1.0, 1.0);
    switch (inst.setup.region().kind) {
        case Region::Kind::box:
            return x.cwiseMax(inst.setup.region().lo).cwiseMin(inst.setup.region().hi);
        case Region::Kind::l2_ball: {
            const Region& r = inst.setup.region();
            Vec d = x - r.center;
            const double nrm = d.norm();
            return nrm <= r.radius ? x : Vec(r.center + (r.radius / nrm) * d);
        }
        default:
            return x;
    }
}

}  // namespace gradslide
