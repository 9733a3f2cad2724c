#pragma once

#include "gradslide/core.hpp"

namespace gradslide {

enum class NormTag { euclidean_l2, entropy_l1_simplex };

// Feasible-set descriptor. Only the combinations with closed-form composite
// prox are supported: euclidean x {R^n, box, l2-ball} and entropy x simplex.
struct Region {
    enum class Kind { all_of_rn, box, l2_ball, simplex };

    Kind kind = Kind::all_of_rn;
    Vec lo, hi;   // box bounds
    Vec center;   // ball center
    double radius = 0.0;

    static Region all_of_rn() { return {}; }
    static Region box(Vec lo, Vec hi);
    static Region l2_ball(Vec center, double radius);
    static Region simplex() { return {Kind::simplex, {}, {}, {}, 0.0}; }
};

// Distance-generating function omega with its Bregman divergence
//   V(x, z) = omega(z) - omega(x) - <grad omega(x), z - x>
// and the two-anchor composite proximal mapping
//   argmin_{x in X} <linear, x> + w1 V(a1, x) + w2 V(a2, x).
// omega is 1-strongly convex w.r.t. the setup's norm (l2 for the Euclidean
// setup, l1 on the simplex for entropy), so V(x,z) >= ||z-x||^2 / 2.
class ProxSetup {
  public:
    ProxSetup(NormTag norm, Region region);

    static ProxSetup euclidean_rn();
    static ProxSetup euclidean_box(Vec lo, Vec hi);
    static ProxSetup euclidean_ball(Vec center, double radius);
    static ProxSetup entropy_simplex();

    NormTag norm_tag() const { return norm_; }
    const Region& region() const { return region_; }

    double omega(const Vec& x) const;
    Vec grad_omega(const Vec& x) const;
    double bregman(const Vec& x, const Vec& z) const;

    double norm(const Vec& v) const;
    double norm_sq(const Vec& v) const;

    Vec composite_prox(const Vec& linear, const Vec& anchor1, double w1,
                       const Vec& anchor2, double w2, OracleTally& tally) const;

    // Slack of the three-point inequality at the given probe:
    //   [q(probe) + w1 V(a1,probe) + w2 V(a2,probe)]
    //   - [q(u*) + w1 V(a1,u*) + w2 V(a2,u*)] - (w1+w2) V(u*, probe),
    // where q(x) = <linear, x> and u* is the composite prox. Nonnegative up
    // to rounding for every feasible probe.
    double three_point_check(const Vec& linear, const Vec& anchor1, double w1,
                             const Vec& anchor2, double w2, const Vec& probe,
                             OracleTally& tally) const;

    bool contains(const Vec& x, double tol = 1e-9) const;
    // Canonical interior starting point (zeros / box midpoint / ball center /
    // simplex barycenter).
    Vec center_point(int dim) const;

  private:
    void require_interior(const Vec& x, const char* what) const;

    NormTag norm_;
    Region region_;
};

}  // namespace gradslide
