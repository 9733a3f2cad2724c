#include "gradslide/core.hpp"

#include <cmath>

namespace gradslide {

void check_finite(const Vec& x, const char* what) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) {
            throw OracleFailure(std::string(what) + ": non-finite value at coordinate " +
                                std::to_string(i));
        }
    }
}

FirstOrder CompositeProblem::call_checked(const Oracle& o, const Vec& x,
                                          const char* name) const {
    if (x.size() != dim_)
        throw OracleFailure(std::string(name) + ": point has dimension " +
                            std::to_string(x.size()) + ", expected " + std::to_string(dim_));
    check_finite(x, name);
    FirstOrder out = o(x);
    if (!std::isfinite(out.value))
        throw OracleFailure(std::string(name) + ": non-finite value output");
    if (out.gradient.size() != dim_)
        throw OracleFailure(std::string(name) + ": gradient has wrong dimension");
    for (Eigen::Index i = 0; i < out.gradient.size(); ++i) {
        if (!std::isfinite(out.gradient[i]))
            throw OracleFailure(std::string(name) + ": non-finite gradient at coordinate " +
                                std::to_string(i));
    }
    return out;
}

FirstOrder CompositeProblem::eval_f(const Vec& x, OracleTally& tally) const {
    FirstOrder out = call_checked(f_, x, "f oracle");
    ++tally.f_val;
    ++tally.f_grad;
    return out;
}

double CompositeProblem::eval_f_value(const Vec& x, OracleTally& tally) const {
    FirstOrder out = call_checked(f_, x, "f oracle");
    ++tally.f_val;
    return out.value;
}

Vec CompositeProblem::eval_f_grad(const Vec& x, OracleTally& tally) const {
    FirstOrder out = call_checked(f_, x, "f oracle");
    ++tally.f_grad;
    return std::move(out.gradient);
}

FirstOrder CompositeProblem::eval_g(const Vec& x, OracleTally& tally) const {
    FirstOrder out = call_checked(g_, x, "g oracle");
    ++tally.g_val;
    ++tally.g_grad;
    return out;
}

double CompositeProblem::eval_g_value(const Vec& x, OracleTally& tally) const {
    FirstOrder out = call_checked(g_, x, "g oracle");
    ++tally.g_val;
    return out.value;
}

Vec CompositeProblem::eval_g_grad(const Vec& x, OracleTally& tally) const {
    FirstOrder out = call_checked(g_, x, "g oracle");
    ++tally.g_grad;
    return std::move(out.gradient);
}

double CompositeProblem::objective(const Vec& x, OracleTally& tally) const {
    return eval_f_value(x, tally) + eval_g_value(x, tally);
}

double holder_smoothing_bound(double m_nu, double nu, double delta) {
    if (!(nu >= 0.0 && nu <= 1.0))
        throw std::domain_error("holder_smoothing_bound: nu must lie in [0, 1]");
    if (!(m_nu > 0.0)) throw std::invalid_argument("holder_smoothing_bound: m_nu must be positive");
    if (!(delta > 0.0)) throw std::invalid_argument("holder_smoothing_bound: delta must be positive");
    if (nu == 1.0) return m_nu;  // exponent (1-nu)/(1+nu) = 0 kills the delta factor
    const double e = (1.0 - nu) / (1.0 + nu);
    return std::pow(e / delta, e) * std::pow(m_nu, 2.0 / (1.0 + nu));
}

}  // namespace gradslide
