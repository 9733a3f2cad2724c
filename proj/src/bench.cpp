#include "gradslide/bench.hpp"

#include "gradslide/gds.hpp"
#include "gradslide/pfgds.hpp"
#include "gradslide/ugs.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gradslide {

void SweepPlan::validate() const {
    if (solver != "gds" && solver != "pfgds-naive" && solver != "pfgds" && solver != "ugs" &&
        solver != "pfugs")
        throw ConfigError("unknown solver id: " + solver);
    if (eps_list.empty()) throw ConfigError("eps list must not be empty");
    for (size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0)) throw ConfigError("eps values must be positive");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
            throw ConfigError("eps list must be strictly decreasing");
    }
    if (reps < 1) throw ConfigError("reps must be >= 1");
    if (stop_rule != "gap" && stop_rule != "certificate")
        throw ConfigError("stop_rule must be 'gap' or 'certificate'");
}

SweepRow run_single(const SweepPlan& plan, double eps, int rep) {
    Instance inst = build_instance(plan.instance);
    const Vec x0 = starting_point(inst, plan.seed, rep);

    SolverConfig cfg;
    cfg.target_eps = eps;
    cfg.max_outer = plan.max_outer;
    cfg.oracle_budget = plan.budget_fgrad;
    cfg.l0 = plan.l0;
    cfg.m0 = plan.m0;
    cfg.stop_on_gap = true;
    cfg.certificate_stop = plan.stop_rule == "certificate";

    SweepRow row;
    row.solver = plan.solver;
    row.family = inst.spec.family;
    row.dim = inst.spec.dim;
    row.nu = inst.problem.metadata ? inst.problem.metadata->nu : 1.0;
    row.eps = eps;

    OracleTally tally;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        RunReport report;
        if (plan.solver == "gds") {
            if (!inst.problem.metadata)
                throw ConfigError("gds requires instance metadata constants");
            report = solve_gds_known(inst.problem, inst.setup, x0, inst.problem.metadata->lip_l,
                                     std::max(inst.problem.metadata->m_nu,
                                              inst.problem.metadata->lip_l),
                                     cfg, tally);
        } else if (plan.solver == "pfgds-naive") {
            report = solve_pfgds_naive(inst.problem, inst.setup, x0, cfg, tally);
        } else if (plan.solver == "pfgds") {
            report = solve_pfgds(inst.problem, inst.setup, x0, cfg, tally);
        } else if (plan.solver == "ugs") {
            report = solve_ugs(inst.problem, inst.setup, x0, cfg, tally);
        } else {
            report = solve_pfugs(inst.problem, inst.setup, x0, cfg, tally);
        }
        row.outer_iters = static_cast<std::int64_t>(report.outer_trace.size());
        row.total_backtracks_L = report.backtracks_l;
        row.total_backtracks_M = report.backtracks_m;
        row.final_gap = report.gap_estimate;
        row.converged = report.converged;
    } catch (const RunawayLineSearch& e) {
        row.error = e.what();
        row.final_gap = std::numeric_limits<double>::quiet_NaN();
    }
    const auto t1 = std::chrono::steady_clock::now();
    row.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    row.f_grad = tally.f_grad;
    row.f_val = tally.f_val;
    row.g_grad = tally.g_grad;
    row.g_val = tally.g_val;
    row.prox_calls = tally.prox_calls;
    return row;
}

std::vector<SweepRow> run_sweep(const SweepPlan& plan) {
    plan.validate();
    std::vector<SweepRow> rows;
    rows.reserve(plan.eps_list.size() * plan.reps);
    for (double eps : plan.eps_list)
        for (int rep = 0; rep < plan.reps; ++rep) rows.push_back(run_single(plan, eps, rep));
    return rows;
}

double sweep_row_field(const SweepRow& row, const std::string& field) {
    if (field == "eps") return row.eps;
    if (field == "f_grad") return static_cast<double>(row.f_grad);
    if (field == "f_val") return static_cast<double>(row.f_val);
    if (field == "g_grad") return static_cast<double>(row.g_grad);
    if (field == "g_val") return static_cast<double>(row.g_val);
    if (field == "prox_calls") return static_cast<double>(row.prox_calls);
    if (field == "outer_iters") return static_cast<double>(row.outer_iters);
    if (field == "total_backtracks_L") return static_cast<double>(row.total_backtracks_L);
    if (field == "total_backtracks_M") return static_cast<double>(row.total_backtracks_M);
    if (field == "final_gap") return row.final_gap;
    if (field == "wall_time_ms") return row.wall_time_ms;
    throw ConfigError("unknown sweep field: " + field);
}

SlopeFit fit_loglog_slope(const std::vector<SweepRow>& rows, const std::string& y_field,
                          const std::string& x_field) {
    std::vector<double> lx, ly;
    for (const SweepRow& r : rows) {
        const double x = sweep_row_field(r, x_field);
        const double y = sweep_row_field(r, y_field);
        if (x > 0.0 && y > 0.0 && std::isfinite(x) && std::isfinite(y)) {
            lx.push_back(std::log(x));
            ly.push_back(std::log(y));
        }
    }
    const int n = static_cast<int>(lx.size());
    if (n < 3) throw std::invalid_argument("fit_loglog_slope: need at least 3 positive points");
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_loglog_slope: x values are all equal");
    SlopeFit fit;
    fit.points = n;
    fit.slope = sxy / sxx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;  // constant y: exact fit
    return fit;
}

SlopeFit fit_with_trim(const std::vector<SweepRow>& rows, const std::string& y_field,
                       bool* trimmed) {
    std::vector<double> eps_values;
    for (const SweepRow& r : rows)
        if (std::find(eps_values.begin(), eps_values.end(), r.eps) == eps_values.end())
            eps_values.push_back(r.eps);
    bool do_trim = eps_values.size() >= 5;
    if (trimmed) *trimmed = do_trim;
    if (!do_trim) return fit_loglog_slope(rows, y_field);
    const double largest = *std::max_element(eps_values.begin(), eps_values.end());
    std::vector<SweepRow> kept;
    for (const SweepRow& r : rows)
        if (r.eps != largest) kept.push_back(r);
    return fit_loglog_slope(kept, y_field);
}

namespace {

const char* kColumns[] = {"solver",     "family",  "dim",
                          "nu",         "eps",     "f_grad",
                          "f_val",      "g_grad",  "g_val",
                          "prox_calls", "outer_iters", "total_backtracks_L",
                          "total_backtracks_M", "final_gap", "wall_time_ms",
                          "converged",  "error"};

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// minimal RFC-4180 reader: returns records of fields
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> rec;
    std::string field;
    bool quoted = false;
    size_t i = 0;
    auto end_field = [&]() {
        rec.push_back(field);
        field.clear();
    };
    auto end_record = [&]() {
        end_field();
        records.push_back(rec);
        rec.clear();
    };
    while (i < text.size()) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            end_record();
        } else if (c != '\r') {
            field += c;
        }
        ++i;
    }
    if (!field.empty() || !rec.empty()) end_record();
    return records;
}

nlohmann::json row_to_json_obj(const SweepRow& r) {
    nlohmann::json j;
    j["solver"] = r.solver;
    j["family"] = r.family;
    j["dim"] = r.dim;
    j["nu"] = r.nu;
    j["eps"] = r.eps;
    j["f_grad"] = r.f_grad;
    j["f_val"] = r.f_val;
    j["g_grad"] = r.g_grad;
    j["g_val"] = r.g_val;
    j["prox_calls"] = r.prox_calls;
    j["outer_iters"] = r.outer_iters;
    j["total_backtracks_L"] = r.total_backtracks_L;
    j["total_backtracks_M"] = r.total_backtracks_M;
    if (std::isnan(r.final_gap))
        j["final_gap"] = nullptr;
    else
        j["final_gap"] = r.final_gap;
    j["wall_time_ms"] = r.wall_time_ms;
    j["converged"] = r.converged;
    j["error"] = r.error;
    return j;
}

SweepRow row_from_json_obj(const nlohmann::json& j) {
    SweepRow r;
    r.solver = j.at("solver").get<std::string>();
    r.family = j.at("family").get<std::string>();
    r.dim = j.at("dim").get<int>();
    r.nu = j.at("nu").get<double>();
    r.eps = j.at("eps").get<double>();
    r.f_grad = j.at("f_grad").get<std::int64_t>();
    r.f_val = j.at("f_val").get<std::int64_t>();
    r.g_grad = j.at("g_grad").get<std::int64_t>();
    r.g_val = j.at("g_val").get<std::int64_t>();
    r.prox_calls = j.at("prox_calls").get<std::int64_t>();
    r.outer_iters = j.at("outer_iters").get<std::int64_t>();
    r.total_backtracks_L = j.at("total_backtracks_L").get<std::int64_t>();
    r.total_backtracks_M = j.at("total_backtracks_M").get<std::int64_t>();
    r.final_gap = j.at("final_gap").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                              : j.at("final_gap").get<double>();
    r.wall_time_ms = j.at("wall_time_ms").get<double>();
    r.converged = j.at("converged").get<bool>();
    r.error = j.at("error").get<std::string>();
    return r;
}

}  // namespace

std::string rows_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    for (size_t i = 0; i < std::size(kColumns); ++i)
        out << (i ? "," : "") << kColumns[i];
    out << '\n';
    for (const SweepRow& r : rows) {
        out << csv_quote(r.solver) << ',' << csv_quote(r.family) << ',' << r.dim << ','
            << fmt_double(r.nu) << ',' << fmt_double(r.eps) << ',' << r.f_grad << ',' << r.f_val
            << ',' << r.g_grad << ',' << r.g_val << ',' << r.prox_calls << ',' << r.outer_iters
            << ',' << r.total_backtracks_L << ',' << r.total_backtracks_M << ','
            << fmt_double(r.final_gap) << ',' << fmt_double(r.wall_time_ms) << ','
            << (r.converged ? "true" : "false") << ',' << csv_quote(r.error) << '\n';
    }
    return out.str();
}

std::vector<SweepRow> rows_from_csv(const std::string& text) {
    auto records = parse_csv(text);
    if (records.empty()) throw ConfigError("csv report: missing header");
    const size_t ncol = std::size(kColumns);
    if (records[0].size() != ncol) throw ConfigError("csv report: unexpected header");
    for (size_t c = 0; c < ncol; ++c)
        if (records[0][c] != kColumns[c])
            throw ConfigError("csv report: unexpected column '" + records[0][c] + "'");
    std::vector<SweepRow> rows;
    for (size_t i = 1; i < records.size(); ++i) {
        const auto& f = records[i];
        if (f.size() == 1 && f[0].empty()) continue;  // trailing blank line
        if (f.size() != ncol) throw ConfigError("csv report: wrong field count on a data row");
        SweepRow r;
        r.solver = f[0];
        r.family = f[1];
        r.dim = std::stoi(f[2]);
        r.nu = std::stod(f[3]);
        r.eps = std::stod(f[4]);
        r.f_grad = std::stoll(f[5]);
        r.f_val = std::stoll(f[6]);
        r.g_grad = std::stoll(f[7]);
        r.g_val = std::stoll(f[8]);
        r.prox_calls = std::stoll(f[9]);
        r.outer_iters = std::stoll(f[10]);
        r.total_backtracks_L = std::stoll(f[11]);
        r.total_backtracks_M = std::stoll(f[12]);
        r.final_gap = std::stod(f[13]);
        r.wall_time_ms = std::stod(f[14]);
        r.converged = f[15] == "true";
        r.error = f[16];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string rows_to_json(const std::vector<SweepRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const SweepRow& r : rows) arr.push_back(row_to_json_obj(r));
    return arr.dump(2) + "\n";
}

std::vector<SweepRow> rows_from_json(const std::string& text) {
    nlohmann::json arr = nlohmann::json::parse(text);
    if (!arr.is_array()) throw ConfigError("json report: expected an array");
    std::vector<SweepRow> rows;
    for (const auto& j : arr) rows.push_back(row_from_json_obj(j));
    return rows;
}

void emit_report(const std::vector<SweepRow>& rows, const std::string& format,
                 const std::string& path) {
    std::string payload;
    if (format == "csv")
        payload = rows_to_csv(rows);
    else if (format == "json")
        payload = rows_to_json(rows);
    else
        throw ConfigError("emit_report: format must be csv or json");

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw OracleFailure("emit_report: cannot open for writing: " + path);
        out << payload;
        if (!out) throw OracleFailure("emit_report: write failed: " + path);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw OracleFailure("emit_report: rename failed: " + path + ": " + ec.message());
}

std::vector<SweepRow> load_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw OracleFailure("load_report: cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    for (char c : text) {
        if (c == '[' || c == '{') return rows_from_json(text);
        if (!std::isspace(static_cast<unsigned char>(c))) break;
    }
    return rows_from_csv(text);
}

}  // namespace gradslide
