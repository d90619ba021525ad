#pragma once

// Task execution and output rendering for the batch front-end. Every command
// produces long-format rows under the fixed column set
//   task,u,b,v,w,value,stderr,route,config_hash,seed
// so any downstream plotting script can consume one schema. Provenance
// (tool version, tolerances) rides along as comment lines (CSV) or top-level
// fields (JSON).

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "parisian/config.hpp"
#include "parisian/parisian.hpp"

namespace parisian {

// |z| at or above this fails a compare run (CLI exit code 3).
inline constexpr double kCompareZThreshold = 3.29;

struct OutputRow {
    std::string task;
    std::optional<double> u, b, v, w, value, stderr_;
    std::string route;
};

struct RunResult {
    std::vector<OutputRow> rows;
    bool compare_failed = false;
};

namespace cmddetail {

inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string fmt_opt(const std::optional<double>& x) { return x ? fmt(*x) : ""; }

inline double laplace_barrier(const ParisianProblem& p, const TaskConfig& t) {
    return t.b ? *t.b : p.default_barrier();
}

}  // namespace cmddetail

inline RunResult cmd_scale(const RunConfig& cfg) {
    RunResult res;
    ScaleEvaluator ev(cfg.model, cfg.numerics);
    const std::string route = cfg.model.claim.is_exponential() ? "closed-form" : "volterra";
    const double q = cfg.task.q;
    for (int i = 0; i < cfg.task.points; ++i) {
        const double x = cfg.task.x_min +
                         (cfg.task.x_max - cfg.task.x_min) * double(i) /
                             double(cfg.task.points - 1);
        OutputRow w_row{"scale_w", x, {}, {}, {}, ev.w(x), {}, route};
        res.rows.push_back(w_row);
        OutputRow wq_row{"scale_wq", x, {}, q, {}, ev.wq(q, x), {}, route};
        res.rows.push_back(wq_row);
    }
    // Laplace-identity residuals |int e^{-beta x} W^{(q)} - 1/(psi(beta)-q)|
    const double phi_q = ev.phi(q);
    for (double shift : {0.5, 1.0, 2.0}) {
        const double beta = phi_q + shift;
        const double numeric = integrate_tail(
            [&](double x) { return std::exp(-beta * x) * ev.wq(q, x); }, 0.0, cfg.numerics, 1.0);
        const double exact = 1.0 / (cumulant(cfg.model, beta) - q);
        OutputRow row{"scale_lt_resid", {}, {}, q, beta, std::abs(numeric - exact), {}, route};
        res.rows.push_back(row);
    }
    return res;
}

inline RunResult cmd_ruin_prob(const RunConfig& cfg) {
    RunResult res;
    ParisianProblem p(cfg.model, cfg.kernel, cfg.numerics);
    const Route r = cfg.task.route;
    for (double u : cfg.task.u) {
        OutputRow row{"ruin_prob", u,  {}, {}, {}, p.ruin_prob(u, r),
                      {},          route_name(p.resolve(r))};
        res.rows.push_back(row);
    }
    return res;
}

inline RunResult cmd_laplace(const RunConfig& cfg) {
    RunResult res;
    ParisianProblem p(cfg.model, cfg.kernel, cfg.numerics);
    const double b = cmddetail::laplace_barrier(p, cfg.task);
    for (double u : cfg.task.u) {
        if (u > b) throw config_error("config error at /task: u <= b required, got u > default b");
        OutputRow row{"laplace", u,  b, cfg.task.v, cfg.task.w, p.joint_lt(u, cfg.task.v, cfg.task.w, b),
                      {},        "quadrature"};
        res.rows.push_back(row);
    }
    return res;
}

inline RunResult cmd_simulate(const RunConfig& cfg) {
    RunResult res;
    for (double u : cfg.task.u) {
        SimConfig sim = cfg.sim;
        sim.initial_reserve = u;
        RuinEstimate est;
        OutputRow row;
        if (cfg.task.target == SimTarget::RuinProb) {
            est = simulate_ruin(cfg.model, cfg.kernel, sim);
            row = {"simulate_ruin_prob", u, {}, {}, {}, est.value, est.std_error, "monte-carlo"};
        } else {
            ParisianProblem p(cfg.model, cfg.kernel, cfg.numerics);
            sim.barrier = cmddetail::laplace_barrier(p, cfg.task);
            sim.v = cfg.task.v;
            sim.w = cfg.task.w;
            est = simulate_joint_lt(cfg.model, cfg.kernel, sim);
            row = {"simulate_laplace", u,         sim.barrier,   cfg.task.v, cfg.task.w,
                   est.value,          est.std_error, "monte-carlo"};
        }
        res.rows.push_back(row);
    }
    return res;
}

inline RunResult cmd_compare(const RunConfig& cfg) {
    RunResult res;
    ParisianProblem p(cfg.model, cfg.kernel, cfg.numerics);
    for (double u : cfg.task.u) {
        SimConfig sim = cfg.sim;
        sim.initial_reserve = u;
        double analytic = 0.0;
        RuinEstimate est;
        std::optional<double> b;
        if (cfg.task.target == SimTarget::RuinProb) {
            analytic = p.ruin_prob(u, cfg.task.route);
            est = simulate_ruin(cfg.model, cfg.kernel, sim);
        } else {
            b = cmddetail::laplace_barrier(p, cfg.task);
            analytic = p.joint_lt(u, cfg.task.v, cfg.task.w, *b);
            sim.barrier = *b;
            sim.v = cfg.task.v;
            sim.w = cfg.task.w;
            est = simulate_joint_lt(cfg.model, cfg.kernel, sim);
        }
        const double z = (est.value - analytic) / est.std_error;
        const bool pass = std::abs(z) < kCompareZThreshold;
        const std::string route = route_name(p.resolve(cfg.task.route));
        res.rows.push_back(
            {"compare_analytic", u, b, cfg.task.v, cfg.task.w, analytic, {}, route});
        res.rows.push_back(
            {"compare_mc", u, b, cfg.task.v, cfg.task.w, est.value, est.std_error, "monte-carlo"});
        res.rows.push_back({"compare_z", u, b, cfg.task.v, cfg.task.w, z, {}, ""});
        res.rows.push_back(
            {"compare_pass", u, b, cfg.task.v, cfg.task.w, pass ? 1.0 : 0.0, {}, ""});
        if (!pass) res.compare_failed = true;
    }
    return res;
}

inline RunResult run_task(const RunConfig& cfg) {
    switch (cfg.task.type) {
        case TaskType::Scale: return cmd_scale(cfg);
        case TaskType::RuinProb: return cmd_ruin_prob(cfg);
        case TaskType::Laplace: return cmd_laplace(cfg);
        case TaskType::Simulate: return cmd_simulate(cfg);
        case TaskType::Compare: return cmd_compare(cfg);
    }
    throw internal_error("run_task: unhandled task type");
}

inline std::string render_csv(const RunConfig& cfg, const RunResult& res) {
    std::ostringstream os;
    os << "# parisian " << PARISIAN_VERSION << "\n";
    os << "# abs_tol=" << cmddetail::fmt(cfg.numerics.abs_tol)
       << " rel_tol=" << cmddetail::fmt(cfg.numerics.rel_tol)
       << " truncation_mass=" << cmddetail::fmt(cfg.numerics.truncation_mass)
       << " z_threshold=" << cmddetail::fmt(kCompareZThreshold) << "\n";
    os << "task,u,b,v,w,value,stderr,route,config_hash,seed\n";
    for (const auto& r : res.rows) {
        os << r.task << ',' << cmddetail::fmt_opt(r.u) << ',' << cmddetail::fmt_opt(r.b) << ','
           << cmddetail::fmt_opt(r.v) << ',' << cmddetail::fmt_opt(r.w) << ','
           << cmddetail::fmt_opt(r.value) << ',' << cmddetail::fmt_opt(r.stderr_) << ','
           << r.route << ',' << cfg.config_hash << ',' << cfg.sim.seed << "\n";
    }
    return os.str();
}

inline std::string render_json(const RunConfig& cfg, const RunResult& res) {
    nlohmann::ordered_json out;
    out["tool"] = "parisian";
    out["version"] = PARISIAN_VERSION;
    out["config_hash"] = cfg.config_hash;
    out["seed"] = cfg.sim.seed;
    out["tolerances"] = {{"abs_tol", cfg.numerics.abs_tol},
                         {"rel_tol", cfg.numerics.rel_tol},
                         {"truncation_mass", cfg.numerics.truncation_mass},
                         {"z_threshold", kCompareZThreshold}};
    out["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : res.rows) {
        nlohmann::ordered_json row;
        row["task"] = r.task;
        auto put = [&](const char* key, const std::optional<double>& v) {
            if (v)
                row[key] = *v;
            else
                row[key] = nullptr;
        };
        put("u", r.u);
        put("b", r.b);
        put("v", r.v);
        put("w", r.w);
        put("value", r.value);
        put("stderr", r.stderr_);
        row["route"] = r.route;
        row["config_hash"] = cfg.config_hash;
        row["seed"] = cfg.sim.seed;
        out["rows"].push_back(row);
    }
    return out.dump(2) + "\n";
}

inline std::string render(const RunConfig& cfg, const RunResult& res) {
    return cfg.output.format == OutputFormat::Csv ? render_csv(cfg, res)
                                                  : render_json(cfg, res);
}

}  // namespace parisian
