#include "gradslide/prox.hpp"

#include <cmath>

namespace gradslide {

namespace {
// x log x with the 0 log 0 = 0 convention
double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }
}  // namespace

Region Region::box(Vec lo, Vec hi) {
    if (lo.size() != hi.size()) throw ConfigError("box: bound dimensions differ");
    for (Eigen::Index i = 0; i < lo.size(); ++i)
        if (!(lo[i] <= hi[i])) throw ConfigError("box: lo must not exceed hi");
    Region r;
    r.kind = Kind::box;
    r.lo = std::move(lo);
    r.hi = std::move(hi);
    return r;
}

Region Region::l2_ball(Vec center, double radius) {
    if (!(radius > 0.0)) throw ConfigError("l2_ball: radius must be positive");
    Region r;
    r.kind = Kind::l2_ball;
    r.center = std::move(center);
    r.radius = radius;
    return r;
}

ProxSetup::ProxSetup(NormTag norm, Region region) : norm_(norm), region_(std::move(region)) {
    const bool euclidean = norm_ == NormTag::euclidean_l2;
    const bool simplex = region_.kind == Region::Kind::simplex;
    if (euclidean && simplex)
        throw ConfigError("unsupported setup: euclidean norm on the simplex");
    if (!euclidean && !simplex)
        throw ConfigError("unsupported setup: entropy requires the probability simplex");
}

ProxSetup ProxSetup::euclidean_rn() { return {NormTag::euclidean_l2, Region::all_of_rn()}; }
ProxSetup ProxSetup::euclidean_box(Vec lo, Vec hi) {
    return {NormTag::euclidean_l2, Region::box(std::move(lo), std::move(hi))};
}
ProxSetup ProxSetup::euclidean_ball(Vec center, double radius) {
    return {NormTag::euclidean_l2, Region::l2_ball(std::move(center), radius)};
}
ProxSetup ProxSetup::entropy_simplex() {
    return {NormTag::entropy_l1_simplex, Region::simplex()};
}

double ProxSetup::omega(const Vec& x) const {
    if (norm_ == NormTag::euclidean_l2) return 0.5 * x.squaredNorm();
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += xlogx(x[i]);
    return s;
}

Vec ProxSetup::grad_omega(const Vec& x) const {
    if (norm_ == NormTag::euclidean_l2) return x;
    require_interior(x, "grad_omega");
    return x.array().log() + 1.0;
}

void ProxSetup::require_interior(const Vec& x, const char* what) const {
    if (norm_ == NormTag::euclidean_l2) return;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (!(x[i] > 0.0))
            throw std::domain_error(std::string(what) +
                                    ": entropy setup requires strictly positive coordinates "
                                    "(coordinate " + std::to_string(i) + ")");
}

double ProxSetup::bregman(const Vec& x, const Vec& z) const {
    if (x.size() != z.size()) throw std::invalid_argument("bregman: dimension mismatch");
    if (norm_ == NormTag::euclidean_l2) return 0.5 * (z - x).squaredNorm();
    require_interior(x, "bregman");
    // omega(z) - omega(x) - <1 + log x, z - x> = sum z log(z/x) + sum(x - z);
    // the second sum vanishes on the simplex but is kept so V is exact off it.
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (z[i] < 0.0) throw std::domain_error("bregman: z has a negative coordinate");
        if (z[i] > 0.0) s += z[i] * std::log(z[i] / x[i]);
        s += x[i] - z[i];
    }
    return s;
}

double ProxSetup::norm(const Vec& v) const {
    return norm_ == NormTag::euclidean_l2 ? v.norm() : v.lpNorm<1>();
}

double ProxSetup::norm_sq(const Vec& v) const {
    if (norm_ == NormTag::euclidean_l2) return v.squaredNorm();
    const double n1 = v.lpNorm<1>();
    return n1 * n1;
}

Vec ProxSetup::composite_prox(const Vec& linear, const Vec& anchor1, double w1,
                              const Vec& anchor2, double w2, OracleTally& tally) const {
    if (!(w1 >= 0.0) || !(w2 >= 0.0))
        throw std::invalid_argument("composite_prox: weights must be nonnegative");
    if (!(w1 + w2 > 0.0))
        throw std::invalid_argument("composite_prox: at least one weight must be positive");
    if (linear.size() != anchor1.size() || linear.size() != anchor2.size())
        throw std::invalid_argument("composite_prox: dimension mismatch");
    check_finite(linear, "composite_prox linear term");
    if (w1 > 0.0) require_interior(anchor1, "composite_prox anchor1");
    if (w2 > 0.0) require_interior(anchor2, "composite_prox anchor2");

    ++tally.prox_calls;
    const double wsum = w1 + w2;

    if (norm_ == NormTag::euclidean_l2) {
        // stationary point of the quadratic, then project per region
        Vec u = (w1 * anchor1 + w2 * anchor2 - linear) / wsum;
        switch (region_.kind) {
            case Region::Kind::all_of_rn:
                return u;
            case Region::Kind::box:
                return u.cwiseMax(region_.lo).cwiseMin(region_.hi);
            case Region::Kind::l2_ball: {
                Vec d = u - region_.center;
                const double r = d.norm();
                if (r <= region_.radius) return u;
                // Hessian is a multiple of the identity, so projecting the
                // unconstrained minimizer radially is exact (boundary KKT
                // multiplier mu = wsum*(r/radius - 1) >= 0).
                return region_.center + (region_.radius / r) * d;
            }
            default:
                throw ConfigError("composite_prox: unsupported region for euclidean setup");
        }
    }

    // entropy on the simplex: x_i propto a1_i^{w1/w} a2_i^{w2/w} exp(-l_i/w),
    // computed in log space and renormalized
    Vec s(linear.size());
    for (Eigen::Index i = 0; i < linear.size(); ++i) {
        double acc = -linear[i];
        if (w1 > 0.0) acc += w1 * std::log(anchor1[i]);
        if (w2 > 0.0) acc += w2 * std::log(anchor2[i]);
        s[i] = acc / wsum;
    }
    const double smax = s.maxCoeff();
    Vec x = (s.array() - smax).exp();
    x /= x.sum();
    // keep the output strictly inside the simplex even if exp underflowed
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x[i] < 1e-300) x[i] = 1e-300;
    return x;
}

double ProxSetup::three_point_check(const Vec& linear, const Vec& anchor1, double w1,
                                    const Vec& anchor2, double w2, const Vec& probe,
                                    OracleTally& tally) const {
    if (!contains(probe, 1e-7)) throw std::invalid_argument("three_point_check: probe not feasible");
    const Vec u = composite_prox(linear, anchor1, w1, anchor2, w2, tally);
    auto total = [&](const Vec& p) {
        double v = linear.dot(p);
        if (w1 > 0.0) v += w1 * bregman(anchor1, p);
        if (w2 > 0.0) v += w2 * bregman(anchor2, p);
        return v;
    };
    return total(probe) - total(u) - (w1 + w2) * bregman(u, probe);
}

bool ProxSetup::contains(const Vec& x, double tol) const {
    switch (region_.kind) {
        case Region::Kind::all_of_rn:
            return true;
        case Region::Kind::box:
            for (Eigen::Index i = 0; i < x.size(); ++i)
                if (x[i] < region_.lo[i] - tol || x[i] > region_.hi[i] + tol) return false;
            return true;
        case Region::Kind::l2_ball:
            return (x - region_.center).norm() <= region_.radius + tol;
        case Region::Kind::simplex: {
            double s = 0.0;
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                if (x[i] < -tol) return false;
                s += x[i];
            }
            return std::abs(s - 1.0) <= tol;
        }
    }
    return false;
}

Vec ProxSetup::center_point(int dim) const {
    switch (region_.kind) {
        case Region::Kind::all_of_rn:
            return Vec::Zero(dim);
        case Region::Kind::box:
            return 0.5 * (region_.lo + region_.hi);
        case Region::Kind::l2_ball:
            return region_.center;
        case Region::Kind::simplex:
            return Vec::Constant(dim, 1.0 / dim);
    }
    return Vec::Zero(dim);
}

}  // namespace gradslide
