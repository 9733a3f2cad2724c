#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gradslide {

using Vec = Eigen::VectorXd;

// Oracle output or configuration is unusable.
struct OracleFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// A backtracking search exceeded its hard cap (e.g. a nonsmooth f fed to a
// solver that assumes a Lipschitz gradient).
struct RunawayLineSearch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Internal control-flow marker: the f-gradient budget ran out mid-iteration.
// Solvers catch it and finalize the report from the last accepted state.
struct BudgetExceeded {};

// Monotone counters for first-order oracle consumption. Value-only probes and
// (sub)gradient evaluations are tracked separately so that line-search probes
// are not conflated with gradient complexity.
struct OracleTally {
    std::int64_t f_val = 0;
    std::int64_t f_grad = 0;
    std::int64_t g_val = 0;
    std::int64_t g_grad = 0;
    std::int64_t prox_calls = 0;

    OracleTally operator-(const OracleTally& o) const {
        return {f_val - o.f_val, f_grad - o.f_grad, g_val - o.g_val,
                g_grad - o.g_grad, prox_calls - o.prox_calls};
    }
    OracleTally& operator+=(const OracleTally& o) {
        f_val += o.f_val;
        f_grad += o.f_grad;
        g_val += o.g_val;
        g_grad += o.g_grad;
        prox_calls += o.prox_calls;
        return *this;
    }
    bool operator==(const OracleTally&) const = default;
};

struct FirstOrder {
    double value = 0.0;
    Vec gradient;
};

using Oracle = std::function<FirstOrder(const Vec&)>;

// Ground-truth constants attached to synthetic test instances.
struct ProblemMetadata {
    double nu = 1.0;        // Holder exponent of f'
    double m_nu = 0.0;      // Holder constant of f'
    double lip_l = 0.0;     // Lipschitz constant of grad g
    double optimum_value = 0.0;
    Vec optimum_point;
};

void check_finite(const Vec& x, const char* what);

// The composite pair (f, g). Oracles must be deterministic; each returns the
// value together with a (sub)gradient, and the metering layer below counts
// only what the caller consumes.
class CompositeProblem {
  public:
    CompositeProblem(int dim, Oracle f, Oracle g)
        : dim_(dim), f_(std::move(f)), g_(std::move(g)) {
        if (dim_ <= 0) throw ConfigError("problem dimension must be positive");
    }

    int dim() const { return dim_; }

    // value + subgradient of f; counts one f_val and one f_grad
    FirstOrder eval_f(const Vec& x, OracleTally& tally) const;
    // value of f only; counts one f_val
    double eval_f_value(const Vec& x, OracleTally& tally) const;
    // subgradient of f only; counts one f_grad
    Vec eval_f_grad(const Vec& x, OracleTally& tally) const;

    FirstOrder eval_g(const Vec& x, OracleTally& tally) const;
    double eval_g_value(const Vec& x, OracleTally& tally) const;
    Vec eval_g_grad(const Vec& x, OracleTally& tally) const;

    // f(x)+g(x), value-only counters
    double objective(const Vec& x, OracleTally& tally) const;

    std::optional<ProblemMetadata> metadata;

  private:
    FirstOrder call_checked(const Oracle& o, const Vec& x, const char* name) const;

    int dim_;
    Oracle f_;
    Oracle g_;
};

// Smoothed upper estimate of the Holder constant: the smallest M-hat such
// that the delta/2-slacked quadratic bound holds for any (M_nu, nu) function,
//   M-hat = [ (1-nu)/(1+nu) * 1/delta ]^{(1-nu)/(1+nu)} * M_nu^{2/(1+nu)}.
// At nu=1 the exponent vanishes and M-hat = M_1 exactly.
double holder_smoothing_bound(double m_nu, double nu, double delta);

// Shared solver knobs. The doubling factor for all backtracking searches is
// fixed at 2.
struct SolverConfig {
    double target_eps = 1e-2;  // function-value gap target
    int max_outer = 1000;
    std::optional<std::int64_t> oracle_budget;  // cap on total f_grad
    double l0 = 1.0;
    double m0 = 1.0;
    double equality_tol = 1e-9;  // relative tolerance for the A=L termination
    double cap_factor = 0x1p60;  // runaway cap: estimates may grow by at most this factor
    bool stop_on_gap = true;     // stop once gap <= target_eps (needs optimum metadata)
    // Accelerated lane only: stop when the convergence certificate
    // eps/2 + 2 Gamma_k V(x0, x*) reaches target_eps instead of the measured
    // gap. This is the run length the complexity theorems count; the measured
    // gap at exit is then <= target_eps as well.
    bool certificate_stop = false;
    bool record_points = false;  // keep averaged iterates in the trace
    bool record_inner = false;   // keep per-step inner detail (accel lane)

    static constexpr double backtrack_factor = 2.0;

    void validate() const {
        if (!(target_eps > 0)) throw ConfigError("target_eps must be positive");
        if (max_outer < 1) throw ConfigError("max_outer must be >= 1");
        if (!(l0 > 0) || !(m0 > 0)) throw ConfigError("l0 and m0 must be positive");
        if (!(equality_tol > 0) || equality_tol >= 1e-4)
            throw ConfigError("equality_tol must lie in (0, 1e-4)");
    }
};

// Per-step detail of the accelerated inner subroutine (recorded on demand).
struct InnerStepRecord {
    double alpha = 1.0;
    double m = 0.0;        // accepted estimate at this step
    double a = 0.0;        // A = M alpha^2
    double c_next = 1.0;   // forcing weight chosen for the next step
    bool forced_next = false;
    std::int64_t doublings = 0;
    double slack = 0.0;    // gamma*alpha*eps/2 used in the f-test
    Vec x_under, x_bar;    // filled when record_inner
};

struct TrialRecord {
    double l_trial = 0.0;
    std::int64_t inner_iters = 0;
    std::int64_t m_doublings = 0;
    double m_last = 0.0;
    bool accepted = false;
    OracleTally cost;  // oracle increments attributable to this trial
    std::vector<InnerStepRecord> steps;  // accel lane, when record_inner
};

struct OuterRecord {
    double l_k = 0.0;           // accepted trial constant
    double gamma = 1.0;         // 1 in the gradient-descent lane
    double capital_gamma = 0.0; // Gamma_k = L_k gamma_k^2
    double m_last = 0.0;
    std::vector<TrialRecord> trials;
    OracleTally extra_cost;  // gap checks and other per-iteration evaluations
    Vec averaged_point;      // filled when record_points
    Vec accepted_x_under;    // accel lane, when record_points
    double gap = std::numeric_limits<double>::quiet_NaN();
};

struct RunReport {
    Vec output_point;
    double objective_value = 0.0;
    double gap_estimate = 0.0;  // objective minus known optimum, else objective
    bool converged = false;
    std::string exit_reason;
    OracleTally tally;
    std::vector<OuterRecord> outer_trace;
    OracleTally init_cost;          // evaluations before the first outer iteration
    std::int64_t probe_fgrad = 0;   // f-gradient probes beyond the per-trial T counts
    std::int64_t backtracks_l = 0;  // rejected outer trials
    std::int64_t backtracks_m = 0;  // rejected inner probes
    std::optional<bool> l0_theory_ok;  // whether l0 met the theoretical hypothesis
};

// Deterministic uniform generator; avoids std::uniform_real_distribution so
// streams are byte-stable across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ULL) {
        // warm up splitmix-style so small seeds decorrelate
        for (int i = 0; i < 4; ++i) next();
    }

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {  // inclusive
        return lo + static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    Vec uniform_vec(int n, double lo, double hi) {
        Vec v(n);
        for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
        return v;
    }

  private:
    std::uint64_t state_;
};

}  // namespace gradslide
