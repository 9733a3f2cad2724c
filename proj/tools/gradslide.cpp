// gradslide: benchmark CLI for the gradient-sliding solvers.
//   gradslide run      -- sweep a solver over an eps schedule, emit csv/json
//   gradslide fit      -- least-squares slope of a counter vs eps (log-log)
//   gradslide selftest -- run the library invariant suites
//
// Exit codes: 0 success, 2 usage error, 3 I/O error.

#include "gradslide/bench.hpp"
#include "gradslide/selftest.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

std::vector<double> parse_eps_list(const std::string& text) {
    std::vector<double> eps;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        size_t pos = 0;
        const double v = std::stod(item, &pos);
        if (pos != item.size()) throw gradslide::ConfigError("bad eps value: " + item);
        eps.push_back(v);
    }
    return eps;
}

int cmd_run(const std::string& solver, const std::string& instance_path,
            const std::string& eps_text, int reps, std::uint64_t seed, const std::string& out,
            const std::string& format, int max_outer, std::int64_t budget, double l0, double m0,
            const std::string& stop_rule) {
    gradslide::SweepPlan plan;
    plan.solver = solver;
    plan.reps = reps;
    plan.seed = seed;
    plan.max_outer = max_outer;
    plan.budget_fgrad = budget;
    plan.l0 = l0;
    plan.m0 = m0;
    plan.stop_rule = stop_rule;

    std::ifstream in(instance_path);
    if (!in) {
        std::cerr << "gradslide: cannot read instance spec: " << instance_path << "\n";
        return kExitIo;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        plan.instance = gradslide::parse_instance_spec(buf.str());
        plan.eps_list = parse_eps_list(eps_text);
        plan.validate();
    } catch (const std::exception& e) {
        std::cerr << "gradslide: " << e.what() << "\n";
        return kExitUsage;
    }

    std::vector<gradslide::SweepRow> rows;
    try {
        rows = gradslide::run_sweep(plan);
    } catch (const gradslide::ConfigError& e) {
        std::cerr << "gradslide: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        gradslide::emit_report(rows, format, out);
    } catch (const std::exception& e) {
        std::cerr << "gradslide: " << e.what() << "\n";
        return kExitIo;
    }

    int errors = 0;
    for (const auto& r : rows)
        if (!r.error.empty()) ++errors;
    std::cout << rows.size() << " rows written to " << out;
    if (errors) std::cout << " (" << errors << " runs ended in a line-search runaway)";
    std::cout << "\n";
    return 0;
}

int cmd_fit(const std::string& in_path, const std::string& y_field) {
    std::vector<gradslide::SweepRow> rows;
    try {
        rows = gradslide::load_report(in_path);
    } catch (const gradslide::OracleFailure& e) {
        std::cerr << "gradslide: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "gradslide: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        bool trimmed = false;
        const gradslide::SlopeFit fit = gradslide::fit_with_trim(rows, y_field, &trimmed);
        std::cout << "slope " << fit.slope << "\nr2 " << fit.r2 << "\npoints " << fit.points
                  << (trimmed ? " (largest-eps rows trimmed)" : "") << "\n";
    } catch (const std::exception& e) {
        std::cerr << "gradslide: " << e.what() << "\n";
        return kExitUsage;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gradient sliding benchmark harness"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a solver sweep over an eps schedule");
    std::string solver, instance_path, eps_text, out = "results.csv", format = "csv";
    int reps = 1, max_outer = 100000;
    std::uint64_t seed = 42;
    std::int64_t budget = 10'000'000;
    double l0 = 1.0, m0 = 1.0;
    run->add_option("--solver", solver, "gds|pfgds-naive|pfgds|ugs|pfugs")->required();
    run->add_option("--instance", instance_path, "instance spec JSON file")->required();
    run->add_option("--eps", eps_text, "comma-separated descending eps list")->required();
    run->add_option("--reps", reps, "repetitions per eps");
    run->add_option("--seed", seed, "instance/start seed");
    run->add_option("--out", out, "output report path");
    run->add_option("--format", format, "csv or json");
    run->add_option("--max-outer", max_outer, "outer iteration cap");
    run->add_option("--budget-fgrad", budget, "cap on f (sub)gradient evaluations");
    run->add_option("--l0", l0, "initial L estimate (gds/pfgds-naive/ugs)");
    run->add_option("--m0", m0, "initial M estimate");
    std::string stop_rule = "gap";
    run->add_option("--stop-rule", stop_rule,
                    "stop on the measured gap or on the certificate (accel lane)");

    auto* fit = app.add_subcommand("fit", "fit a log-log slope from a report");
    std::string fit_in, y_field = "f_grad";
    fit->add_option("--in", fit_in, "report file (csv or json)")->required();
    fit->add_option("--y", y_field, "counter column to fit against eps");

    auto* selftest = app.add_subcommand("selftest", "run the invariant suites");
    bool quick = false;
    selftest->add_flag("--quick", quick, "reduced sample counts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (run->parsed())
        return cmd_run(solver, instance_path, eps_text, reps, seed, out, format, max_outer,
                       budget, l0, m0, stop_rule);
    if (fit->parsed()) return cmd_fit(fit_in, y_field);
    return gradslide::run_selftest(quick, std::cout) == 0 ? 0 : 1;
}
