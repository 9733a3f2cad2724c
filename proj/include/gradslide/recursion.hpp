#pragma once

#include <stdexcept>

namespace gradslide {

// Scalar stepsize machinery shared by the outer gamma-recursion and the inner
// alpha-recursion. Both instantiate the same scheme: given Lambda_{tau-1} and
// the next curvature estimate E_tau, the coefficient lambda_tau > 0 solves
//   E_tau * lambda^2 = Lambda_{tau-1} * (1 - lambda).

// Unique positive root, computed in the rationalized form
//   lambda = 2 / (1 + sqrt(1 + 4 E / Lambda)),
// which stays accurate when E/Lambda is large (the naive quadratic formula
// cancels catastrophically there).
double next_coefficient(double capital_lambda_prev, double e_next);

// Forcing weight c such that scaling the curvature to c*e_next makes the next
// Lambda land exactly on e_fix:   c = e_fix / [ (1 - e_fix/Lambda_prev)^2 * e_next ].
// Requires 0 < e_fix < Lambda_prev strictly; c >= 1 is guaranteed only when
// the natural next Lambda would fall at or below e_fix (the caller checks
// that via termination_root_squared before forcing).
double forced_weight(double capital_lambda_prev, double e_next, double e_fix);

// Square of the positive root of  t^2 = alpha^2 (1 - t), i.e. the natural
// next Lambda/E ratio when the curvature estimate stays put:
//   [ alpha^4 + 2 alpha^2 - alpha^3 sqrt(alpha^2 + 4) ] / 2.
// Evaluated in a cancellation-free form.
double termination_root_squared(double alpha);

// One (E, lambda, Lambda) triple of the recursion; tau counts steps from 1.
struct StepCoefficientState {
    double lambda = 1.0;
    double capital_lambda = 0.0;  // E * lambda^2
    double e_current = 0.0;
    int tau = 1;

    static StepCoefficientState first(double e1) {
        if (!(e1 > 0)) throw std::domain_error("StepCoefficientState: E_1 must be positive");
        return {1.0, e1, e1, 1};
    }

    StepCoefficientState advanced(double e_next) const {
        const double lam = next_coefficient(capital_lambda, e_next);
        return {lam, e_next * lam * lam, e_next, tau + 1};
    }
};

}  // namespace gradslide
