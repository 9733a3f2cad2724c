#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gradslide/bench.hpp"
#include "gradslide/gds.hpp"
#include "gradslide/pfgds.hpp"
#include "gradslide/problems.hpp"
#include "gradslide/prox.hpp"
#include "gradslide/recursion.hpp"
#include "gradslide/ugs.hpp"

namespace py = pybind11;
using namespace gradslide;

namespace {

Oracle wrap_oracle(py::function fn) {
    return [fn](const Vec& x) {
        py::tuple out = fn(x).cast<py::tuple>();
        return FirstOrder{out[0].cast<double>(), out[1].cast<Vec>()};
    };
}

py::dict report_to_dict(const RunReport& r) {
    py::dict d;
    d["output_point"] = r.output_point;
    d["objective_value"] = r.objective_value;
    d["gap_estimate"] = r.gap_estimate;
    d["converged"] = r.converged;
    d["exit_reason"] = r.exit_reason;
    d["outer_iters"] = r.outer_trace.size();
    d["backtracks_l"] = r.backtracks_l;
    d["backtracks_m"] = r.backtracks_m;
    py::list gammas, ls, gaps;
    for (const auto& rec : r.outer_trace) {
        gammas.append(rec.capital_gamma);
        ls.append(rec.l_k);
        gaps.append(rec.gap);
    }
    d["capital_gamma"] = gammas;
    d["l_k"] = ls;
    d["gap_per_iter"] = gaps;
    return d;
}

py::dict row_to_dict(const SweepRow& r) {
    py::dict d;
    d["solver"] = r.solver;
    d["family"] = r.family;
    d["dim"] = r.dim;
    d["nu"] = r.nu;
    d["eps"] = r.eps;
    d["f_grad"] = r.f_grad;
    d["f_val"] = r.f_val;
    d["g_grad"] = r.g_grad;
    d["g_val"] = r.g_val;
    d["prox_calls"] = r.prox_calls;
    d["outer_iters"] = r.outer_iters;
    d["total_backtracks_L"] = r.total_backtracks_L;
    d["total_backtracks_M"] = r.total_backtracks_M;
    d["final_gap"] = r.final_gap;
    d["wall_time_ms"] = r.wall_time_ms;
    d["converged"] = r.converged;
    d["error"] = r.error;
    return d;
}

}  // namespace

PYBIND11_MODULE(_gradslide, m) {
    m.doc() = "composite convex optimization via parameter-free gradient sliding";

    py::register_exception<ConfigError>(m, "GradslideConfigError");
    py::register_exception<OracleFailure>(m, "OracleFailureError");
    py::register_exception<RunawayLineSearch>(m, "RunawayLineSearchError");

    py::class_<OracleTally>(m, "OracleTally")
        .def(py::init<>())
        .def_readonly("f_val", &OracleTally::f_val)
        .def_readonly("f_grad", &OracleTally::f_grad)
        .def_readonly("g_val", &OracleTally::g_val)
        .def_readonly("g_grad", &OracleTally::g_grad)
        .def_readonly("prox_calls", &OracleTally::prox_calls)
        .def("__repr__", [](const OracleTally& t) {
            return "OracleTally(f_val=" + std::to_string(t.f_val) +
                   ", f_grad=" + std::to_string(t.f_grad) + ", g_val=" + std::to_string(t.g_val) +
                   ", g_grad=" + std::to_string(t.g_grad) +
                   ", prox_calls=" + std::to_string(t.prox_calls) + ")";
        });

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("target_eps", &SolverConfig::target_eps)
        .def_readwrite("max_outer", &SolverConfig::max_outer)
        .def_readwrite("oracle_budget", &SolverConfig::oracle_budget)
        .def_readwrite("l0", &SolverConfig::l0)
        .def_readwrite("m0", &SolverConfig::m0)
        .def_readwrite("equality_tol", &SolverConfig::equality_tol)
        .def_readwrite("stop_on_gap", &SolverConfig::stop_on_gap)
        .def_readwrite("record_points", &SolverConfig::record_points);

    py::class_<ProxSetup>(m, "ProxSetup")
        .def_static("euclidean_rn", &ProxSetup::euclidean_rn)
        .def_static("euclidean_box", &ProxSetup::euclidean_box)
        .def_static("euclidean_ball", &ProxSetup::euclidean_ball)
        .def_static("entropy_simplex", &ProxSetup::entropy_simplex)
        .def("bregman", &ProxSetup::bregman)
        .def("norm", &ProxSetup::norm)
        .def("contains", &ProxSetup::contains, py::arg("x"), py::arg("tol") = 1e-9)
        .def("center_point", &ProxSetup::center_point)
        .def("composite_prox",
             [](const ProxSetup& s, const Vec& linear, const Vec& a1, double w1, const Vec& a2,
                double w2) {
                 OracleTally t;
                 return s.composite_prox(linear, a1, w1, a2, w2, t);
             })
        .def("three_point_check",
             [](const ProxSetup& s, const Vec& linear, const Vec& a1, double w1, const Vec& a2,
                double w2, const Vec& probe) {
                 OracleTally t;
                 return s.three_point_check(linear, a1, w1, a2, w2, probe, t);
             });

    py::class_<CompositeProblem>(m, "CompositeProblem")
        .def(py::init([](int dim, py::function f, py::function g) {
                 return CompositeProblem(dim, wrap_oracle(std::move(f)),
                                         wrap_oracle(std::move(g)));
             }),
             py::arg("dim"), py::arg("f"), py::arg("g"),
             "f and g map a point to (value, gradient)")
        .def_property_readonly("dim", &CompositeProblem::dim)
        .def("objective", [](const CompositeProblem& p, const Vec& x) {
            OracleTally t;
            return p.objective(x, t);
        });

    py::class_<Instance>(m, "Instance")
        .def_property_readonly("family", [](const Instance& i) { return i.spec.family; })
        .def_property_readonly("dim", [](const Instance& i) { return i.spec.dim; })
        .def_property_readonly("nu",
                               [](const Instance& i) {
                                   return i.problem.metadata ? i.problem.metadata->nu : 1.0;
                               })
        .def_property_readonly("m_nu",
                               [](const Instance& i) {
                                   return i.problem.metadata ? i.problem.metadata->m_nu : 0.0;
                               })
        .def_property_readonly("lip_l",
                               [](const Instance& i) {
                                   return i.problem.metadata ? i.problem.metadata->lip_l : 0.0;
                               })
        .def_property_readonly("optimum_value",
                               [](const Instance& i) {
                                   return i.problem.metadata ? i.problem.metadata->optimum_value
                                                             : 0.0;
                               })
        .def_property_readonly("optimum_point",
                               [](const Instance& i) {
                                   return i.problem.metadata ? i.problem.metadata->optimum_point
                                                             : Vec();
                               })
        .def("objective",
             [](const Instance& i, const Vec& x) {
                 OracleTally t;
                 return i.problem.objective(x, t);
             })
        .def("starting_point", &starting_point, py::arg("seed"), py::arg("rep") = 0)
        .def("spec_json", [](const Instance& i) { return instance_spec_to_json(i.spec); });

    m.def("make_quad_l1", &make_quad_l1, py::arg("dim"), py::arg("diag_min") = 1.0,
          py::arg("diag_max") = 16.0, py::arg("l1_weight") = 1.0, py::arg("seed") = 0);
    m.def("make_quad_quad", &make_quad_quad, py::arg("dim"), py::arg("l_target") = 1.0,
          py::arg("m_target") = 100.0, py::arg("seed") = 0);
    m.def("make_quad_power", &make_quad_power, py::arg("dim"), py::arg("nu"),
          py::arg("weight") = 1.0, py::arg("seed") = 0);
    m.def("make_simplex_entropy_linear", &make_simplex_entropy_linear, py::arg("dim"),
          py::arg("cost_scale") = 1.0, py::arg("seed") = 0);
    m.def("instance_from_json",
          [](const std::string& text) { return build_instance(parse_instance_spec(text)); });

    m.def("next_coefficient", &next_coefficient);
    m.def("forced_weight", &forced_weight);
    m.def("termination_root_squared", &termination_root_squared);
    m.def("holder_smoothing_bound", &holder_smoothing_bound);

    auto solve = [](const char* name, auto fn) {
        return [name, fn](const Instance& inst, const Vec& x0, const SolverConfig& cfg) {
            OracleTally tally;
            RunReport rep = fn(inst.problem, inst.setup, x0, cfg, tally);
            py::dict d = report_to_dict(rep);
            d["tally"] = tally;
            d["solver"] = name;
            return d;
        };
    };
    m.def("solve_pfgds_naive", solve("pfgds-naive", &solve_pfgds_naive));
    m.def("solve_pfgds", solve("pfgds", &solve_pfgds));
    m.def("solve_ugs", solve("ugs", &solve_ugs));
    m.def("solve_pfugs", solve("pfugs", &solve_pfugs));
    m.def("solve_gds",
          [](const Instance& inst, const Vec& x0, double lip_l, double lip_m,
             const SolverConfig& cfg) {
              OracleTally tally;
              RunReport rep = solve_gds_known(inst.problem, inst.setup, x0, lip_l, lip_m, cfg, tally);
              py::dict d = report_to_dict(rep);
              d["tally"] = tally;
              d["solver"] = "gds";
              return d;
          });

    m.def("run_sweep",
          [](const std::string& solver, const std::string& spec_json,
             const std::vector<double>& eps_list, int reps, std::uint64_t seed, double l0,
             double m0, int max_outer, std::int64_t budget) {
              SweepPlan plan;
              plan.solver = solver;
              plan.instance = parse_instance_spec(spec_json);
              plan.eps_list = eps_list;
              plan.reps = reps;
              plan.seed = seed;
              plan.l0 = l0;
              plan.m0 = m0;
              plan.max_outer = max_outer;
              plan.budget_fgrad = budget;
              py::list out;
              for (const SweepRow& r : run_sweep(plan)) out.append(row_to_dict(r));
              return out;
          },
          py::arg("solver"), py::arg("spec_json"), py::arg("eps_list"), py::arg("reps") = 1,
          py::arg("seed") = 42, py::arg("l0") = 1.0, py::arg("m0") = 1.0,
          py::arg("max_outer") = 100000, py::arg("budget") = 10'000'000);
}
