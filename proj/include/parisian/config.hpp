#pragma once

// Declarative run configuration: one JSON document fully describes a run
// (model, kernel, task, numerics, simulation, output). Parsing is strict:
// unknown keys are rejected and every message carries the JSON path and, for
// syntax errors, the line/column.

#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "parisian/delay_kernel.hpp"
#include "parisian/model.hpp"
#include "parisian/quadrature.hpp"
#include "parisian/ruin.hpp"
#include "parisian/simulate.hpp"

namespace parisian {

// Any configuration problem; the CLI maps this to exit code 2.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

enum class TaskType { Scale, RuinProb, Laplace, Simulate, Compare };
enum class SimTarget { RuinProb, Laplace };
enum class OutputFormat { Csv, Json };

struct TaskConfig {
    TaskType type = TaskType::RuinProb;
    std::vector<double> u{0.0};
    double v = 0.0;
    double w = 0.0;
    std::optional<double> b;          // laplace barrier; default_barrier() if absent
    Route route = Route::Auto;
    SimTarget target = SimTarget::RuinProb;  // simulate/compare
    // scale grid
    double q = 0.0;
    double x_min = -1.0;
    double x_max = 5.0;
    int points = 25;
};

struct OutputConfig {
    OutputFormat format = OutputFormat::Csv;
    std::string path;  // empty: stdout
};

struct RunConfig {
    RiskModel model;
    DelayKernel kernel = DelayKernel::immediate();
    TaskConfig task;
    QuadratureSpec numerics;
    SimConfig sim;
    OutputConfig output;
    std::string config_hash;
};

namespace cfgdetail {

using json = nlohmann::json;

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
    throw config_error("config error at " + (path.empty() ? "/" : path) + ": " + msg);
}

inline void require_keys(const json& j, const std::string& path,
                         const std::set<std::string>& allowed,
                         const std::set<std::string>& required) {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& kv : j.items())
        if (!allowed.count(kv.key())) fail(path, "unknown key \"" + kv.key() + "\"");
    for (const auto& k : required)
        if (!j.contains(k)) fail(path, "missing required key \"" + k + "\"");
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

inline double number_at(const json& j, const std::string& path, const std::string& key) {
    return number(j.at(key), path + "/" + key);
}

inline double number_or(const json& j, const std::string& path, const std::string& key,
                        double fallback) {
    return j.contains(key) ? number_at(j, path, key) : fallback;
}

inline std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

inline std::vector<ErlangComponent> components(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of components");
    std::vector<ErlangComponent> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = path + "/" + std::to_string(i);
        require_keys(j[i], p, {"weight", "shape", "rate"}, {"weight", "shape", "rate"});
        const double shape = number_at(j[i], p, "shape");
        if (shape < 1.0 || shape != std::floor(shape) || shape > 1e6)
            fail(p + "/shape", "shape must be a positive integer");
        out.push_back({number_at(j[i], p, "weight"), unsigned(shape), number_at(j[i], p, "rate")});
    }
    return out;
}

inline ClaimLaw claim_law(const json& j, const std::string& path) {
    require_keys(j, path, {"type", "rate", "components", "size"}, {"type"});
    const std::string type = text(j.at("type"), path + "/type");
    try {
        if (type == "exponential") {
            require_keys(j, path, {"type", "rate"}, {"type", "rate"});
            return ClaimLaw::exponential(number_at(j, path, "rate"));
        }
        if (type == "erlang_mixture") {
            require_keys(j, path, {"type", "components"}, {"type", "components"});
            return ClaimLaw::erlang_mixture(components(j.at("components"), path + "/components"));
        }
        if (type == "deterministic") {
            require_keys(j, path, {"type", "size"}, {"type", "size"});
            return ClaimLaw::deterministic(number_at(j, path, "size"));
        }
    } catch (const model_error& e) {
        fail(path, e.what());
    }
    fail(path + "/type", "unknown claim law \"" + type + "\"");
}

inline DelayKernel kernel(const json& j, const std::string& path) {
    require_keys(j, path, {"type", "breakpoints", "cells", "delay"}, {"type"});
    const std::string type = text(j.at("type"), path + "/type");
    try {
        if (type == "deterministic") {
            require_keys(j, path, {"type", "delay"}, {"type", "delay"});
            return DelayKernel::deterministic(number_at(j, path, "delay"));
        }
        if (type != "piecewise_exponential" && type != "piecewise_erlang_mixture")
            fail(path + "/type", "unknown kernel type \"" + type + "\"");
        require_keys(j, path, {"type", "breakpoints", "cells"}, {"type", "cells"});
        std::vector<double> breaks;
        if (j.contains("breakpoints")) {
            const auto& jb = j.at("breakpoints");
            if (!jb.is_array()) fail(path + "/breakpoints", "expected an array");
            for (std::size_t i = 0; i < jb.size(); ++i)
                breaks.push_back(number(jb[i], path + "/breakpoints/" + std::to_string(i)));
        }
        const auto& jc = j.at("cells");
        if (!jc.is_array() || jc.empty()) fail(path + "/cells", "expected a non-empty array");
        if (jc.size() != breaks.size() + 1)
            fail(path + "/cells", "need exactly breakpoints+1 cells, got " +
                                      std::to_string(jc.size()) + " for " +
                                      std::to_string(breaks.size()) + " breakpoints");
        std::vector<DelayKernel::Cell> cells;
        for (std::size_t i = 0; i < jc.size(); ++i) {
            const std::string p = path + "/cells/" + std::to_string(i);
            DelayKernel::Cell cell;
            if (type == "piecewise_exponential") {
                require_keys(jc[i], p, {"rate", "immediate"}, {});
                if (jc[i].contains("immediate") && jc[i].at("immediate").is_boolean() &&
                    jc[i].at("immediate").get<bool>()) {
                    cell.immediate = true;
                } else {
                    if (!jc[i].contains("rate"))
                        fail(p, "cell needs \"rate\" or \"immediate\": true");
                    cell.components = {{1.0, 1, number_at(jc[i], p, "rate")}};
                }
            } else {
                require_keys(jc[i], p, {"components", "immediate"}, {});
                if (jc[i].contains("immediate") && jc[i].at("immediate").is_boolean() &&
                    jc[i].at("immediate").get<bool>()) {
                    cell.immediate = true;
                } else {
                    if (!jc[i].contains("components"))
                        fail(p, "cell needs \"components\" or \"immediate\": true");
                    cell.components = components(jc[i].at("components"), p + "/components");
                }
            }
            cells.push_back(std::move(cell));
        }
        if (type == "piecewise_exponential")
            return DelayKernel::piecewise_exponential(std::move(breaks), std::move(cells));
        return DelayKernel::piecewise_erlang_mixture(std::move(breaks), std::move(cells));
    } catch (const model_error& e) {
        fail(path, e.what());
    }
}

inline Route route(const json& j, const std::string& path) {
    const std::string s = text(j, path);
    if (s == "auto") return Route::Auto;
    if (s == "closed-form") return Route::ClosedForm;
    if (s == "quadrature") return Route::Quadrature;
    fail(path, "unknown route \"" + s + "\" (auto | closed-form | quadrature)");
}

inline TaskConfig task(const json& j, const std::string& path) {
    require_keys(j, path,
                 {"type", "u", "v", "w", "b", "route", "target", "q", "x_min", "x_max", "points"},
                 {"type"});
    TaskConfig t;
    const std::string type = text(j.at("type"), path + "/type");
    if (type == "scale")
        t.type = TaskType::Scale;
    else if (type == "ruin-prob")
        t.type = TaskType::RuinProb;
    else if (type == "laplace")
        t.type = TaskType::Laplace;
    else if (type == "simulate")
        t.type = TaskType::Simulate;
    else if (type == "compare")
        t.type = TaskType::Compare;
    else
        fail(path + "/type", "unknown task \"" + type + "\"");

    if (j.contains("u")) {
        t.u.clear();
        const auto& ju = j.at("u");
        if (ju.is_array()) {
            for (std::size_t i = 0; i < ju.size(); ++i)
                t.u.push_back(number(ju[i], path + "/u/" + std::to_string(i)));
        } else {
            t.u.push_back(number(ju, path + "/u"));
        }
        if (t.u.empty()) fail(path + "/u", "empty grid");
        for (double u : t.u)
            if (!(u >= 0.0)) fail(path + "/u", "initial reserve must be >= 0");
    }
    t.v = number_or(j, path, "v", 0.0);
    t.w = number_or(j, path, "w", 0.0);
    if (j.contains("b")) t.b = number_at(j, path, "b");
    if (j.contains("route")) t.route = route(j.at("route"), path + "/route");
    if (j.contains("target")) {
        const std::string s = text(j.at("target"), path + "/target");
        if (s == "ruin-prob")
            t.target = SimTarget::RuinProb;
        else if (s == "laplace")
            t.target = SimTarget::Laplace;
        else
            fail(path + "/target", "unknown target \"" + s + "\" (ruin-prob | laplace)");
    }
    t.q = number_or(j, path, "q", 0.0);
    t.x_min = number_or(j, path, "x_min", -1.0);
    t.x_max = number_or(j, path, "x_max", 5.0);
    if (j.contains("points")) {
        t.points = int(number_at(j, path, "points"));
        if (t.points < 2) fail(path + "/points", "need at least 2 grid points");
    }
    if (!(t.v >= 0.0)) fail(path + "/v", "v must be >= 0");
    if (!(t.w >= 0.0)) fail(path + "/w", "w must be >= 0");
    if (t.b && !(*t.b > 0.0)) fail(path + "/b", "b must be > 0");
    if (t.b)
        for (double u : t.u)
            if (u > *t.b) fail(path, "cross-field constraint violated: u <= b");
    if (t.type == TaskType::Scale && !(t.x_max > t.x_min))
        fail(path, "cross-field constraint violated: x_min < x_max");
    if (t.type == TaskType::Scale && !(t.q >= 0.0)) fail(path + "/q", "q must be >= 0");
    return t;
}

inline QuadratureSpec numerics(const json& j, const std::string& path) {
    require_keys(j, path, {"abs_tol", "rel_tol", "max_subdivisions", "truncation_mass"}, {});
    QuadratureSpec q;
    q.abs_tol = number_or(j, path, "abs_tol", q.abs_tol);
    q.rel_tol = number_or(j, path, "rel_tol", q.rel_tol);
    q.truncation_mass = number_or(j, path, "truncation_mass", q.truncation_mass);
    if (j.contains("max_subdivisions"))
        q.max_subdivisions = int(number_at(j, path, "max_subdivisions"));
    try {
        q.validate();
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
    return q;
}

inline SimConfig sim(const json& j, const std::string& path) {
    require_keys(j, path, {"n_paths", "seed", "threads", "bias_tol", "max_events"}, {});
    SimConfig s;
    if (j.contains("n_paths")) s.n_paths = std::size_t(number_at(j, path, "n_paths"));
    if (j.contains("seed")) s.seed = std::uint64_t(number_at(j, path, "seed"));
    if (j.contains("threads")) s.threads = unsigned(number_at(j, path, "threads"));
    s.bias_tol = number_or(j, path, "bias_tol", s.bias_tol);
    if (j.contains("max_events")) s.max_events = std::size_t(number_at(j, path, "max_events"));
    try {
        s.validate();
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
    return s;
}

inline OutputConfig output(const json& j, const std::string& path) {
    require_keys(j, path, {"format", "path"}, {});
    OutputConfig o;
    if (j.contains("format")) {
        const std::string s = text(j.at("format"), path + "/format");
        if (s == "csv")
            o.format = OutputFormat::Csv;
        else if (s == "json")
            o.format = OutputFormat::Json;
        else
            fail(path + "/format", "unknown format \"" + s + "\" (csv | json)");
    }
    if (j.contains("path")) o.path = text(j.at("path"), path + "/path");
    return o;
}

inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

}  // namespace cfgdetail

// Parse and validate a full run configuration from raw JSON bytes.
inline RunConfig parse_config(const std::string& bytes) {
    using cfgdetail::json;
    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::parse_error& e) {
        // translate the byte offset into line/column
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < e.byte && i < bytes.size(); ++i) {
            if (bytes[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw config_error("config syntax error at line " + std::to_string(line) + ", column " +
                           std::to_string(col) + ": " + e.what());
    }

    cfgdetail::require_keys(j, "", {"model", "kernel", "task", "numerics", "sim", "output"},
                            {"model", "kernel", "task"});

    RunConfig cfg;
    const auto& jm = j.at("model");
    cfgdetail::require_keys(jm, "/model", {"premium_rate", "claim_rate", "claim"},
                            {"premium_rate", "claim_rate", "claim"});
    cfg.model.premium_rate = cfgdetail::number_at(jm, "/model", "premium_rate");
    cfg.model.claim_rate = cfgdetail::number_at(jm, "/model", "claim_rate");
    cfg.model.claim = cfgdetail::claim_law(jm.at("claim"), "/model/claim");
    try {
        validate_model(cfg.model);
    } catch (const model_error& e) {
        cfgdetail::fail("/model", e.what());
    }

    cfg.kernel = cfgdetail::kernel(j.at("kernel"), "/kernel");
    cfg.task = cfgdetail::task(j.at("task"), "/task");
    if (j.contains("numerics")) cfg.numerics = cfgdetail::numerics(j.at("numerics"), "/numerics");
    if (j.contains("sim")) cfg.sim = cfgdetail::sim(j.at("sim"), "/sim");
    if (j.contains("output")) cfg.output = cfgdetail::output(j.at("output"), "/output");
    cfg.config_hash = cfgdetail::fnv1a_hex(bytes);
    return cfg;
}

}  // namespace parisian
