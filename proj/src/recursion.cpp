#include "gradslide/recursion.hpp"

#include <cmath>

namespace gradslide {

double next_coefficient(double capital_lambda_prev, double e_next) {
    if (!(capital_lambda_prev > 0.0))
        throw std::domain_error("next_coefficient: Lambda_prev must be positive");
    if (!(e_next > 0.0)) throw std::domain_error("next_coefficient: E must be positive");
    return 2.0 / (1.0 + std::sqrt(1.0 + 4.0 * e_next / capital_lambda_prev));
}

double forced_weight(double capital_lambda_prev, double e_next, double e_fix) {
    if (!(capital_lambda_prev > 0.0) || !(e_next > 0.0) || !(e_fix > 0.0))
        throw std::domain_error("forced_weight: inputs must be positive");
    if (!(e_fix < capital_lambda_prev))
        throw std::invalid_argument(
            "forced_weight: requires e_fix < Lambda_prev (equality means immediate termination)");
    const double r = 1.0 - e_fix / capital_lambda_prev;
    return e_fix / (r * r * e_next);
}

double termination_root_squared(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::domain_error("termination_root_squared: alpha must lie in (0, 1]");
    // root of t^2 = a^2(1-t):  t = 2a^2 / (a^2 + sqrt(a^4 + 4a^2)) = 2a / (a + sqrt(a^2+4))
    const double t = 2.0 * alpha / (alpha + std::sqrt(alpha * alpha + 4.0));
    return t * t;
}

}  // namespace gradslide
