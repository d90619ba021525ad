#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "parisian/config.hpp"

// 2000-path exponential-delay run whose z-score lands at -3.83; found by scanning seeds
// and frozen so the exit-code-3 path has a deterministic regression test.
#define PARISIAN_ZFAIL_SEED "327"

namespace {

const std::string kCli = PARISIAN_CLI_PATH;
const std::string kConfigs = PARISIAN_CONFIG_DIR;

struct CliResult {
    int exit_code = -1;
    std::string out;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run(const std::string& args) {
    const int rc = std::system((kCli + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
}

CliResult run_capture(const std::string& args, const std::string& tag) {
    const std::string out_path = std::string("cli_test_") + tag + ".csv";
    CliResult res;
    const int rc =
        std::system((kCli + " " + args + " --out " + out_path + " 2> cli_test_stderr.txt").c_str());
    res.exit_code = WEXITSTATUS(rc);
    res.out = slurp(out_path);
    return res;
}

struct Row {
    std::map<std::string, std::string> fields;
    double value() const { return std::stod(fields.at("value")); }
    double num(const std::string& key) const { return std::stod(fields.at(key)); }
};

std::vector<Row> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> header;
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        while (cells.size() < header.size()) cells.push_back("");
        if (header.empty()) {
            header = cells;
            continue;
        }
        Row r;
        for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i)
            r.fields[header[i]] = cells[i];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<Row> rows_with_task(const std::vector<Row>& rows, const std::string& task) {
    std::vector<Row> out;
    for (const auto& r : rows)
        if (r.fields.at("task") == task) out.push_back(r);
    return out;
}

}  // namespace

TEST_CASE("ruin-prob on the exponential-delay fixture", "[cli]") {
    auto res = run_capture("ruin-prob " + kConfigs + "/exp_delay_ruin.json", "expd");
    REQUIRE(res.exit_code == 0);
    auto rows = parse_csv(res.out);
    auto rp = rows_with_task(rows, "ruin_prob");
    REQUIRE(rp.size() == 3);
    CHECK(rp[0].value() == Catch::Approx(0.2928932).margin(1e-6));
    CHECK(rp[1].value() == Catch::Approx(0.2928932 * std::exp(-0.5)).margin(1e-6));
    CHECK(rp[2].value() == Catch::Approx(0.2928932 * std::exp(-1.0)).margin(1e-6));
    CHECK(rp[0].fields.at("route") == "closed-form");
    CHECK(!rp[0].fields.at("config_hash").empty());
}

TEST_CASE("immediate kernel reduces to the classical formula", "[cli]") {
    auto res = run_capture("ruin-prob " + kConfigs + "/immediate_ruin.json", "imm");
    REQUIRE(res.exit_code == 0);
    auto rp = rows_with_task(parse_csv(res.out), "ruin_prob");
    REQUIRE(rp.size() == 2);
    CHECK(rp[0].value() == Catch::Approx(0.5).margin(1e-12));
    CHECK(rp[1].value() == Catch::Approx(0.5 * std::exp(-1.0)).margin(1e-12));
}

TEST_CASE("mixture-kernel fixture stays inside the classical bound", "[cli]") {
    auto res = run_capture("ruin-prob " + kConfigs + "/mixture_delay_ruin.json", "mixd");
    REQUIRE(res.exit_code == 0);
    auto rp = rows_with_task(parse_csv(res.out), "ruin_prob");
    REQUIRE(rp.size() == 1);
    CHECK(rp[0].value() > 0.0);
    CHECK(rp[0].value() < 0.5);  // classical ruin bound at u=0
}

TEST_CASE("scale table rows", "[cli]") {
    auto res = run_capture("scale " + kConfigs + "/scale_table.json", "scale");
    REQUIRE(res.exit_code == 0);
    auto rows = parse_csv(res.out);
    bool saw_zero = false;
    for (const auto& r : rows_with_task(rows, "scale_w")) {
        const double x = r.num("u");
        if (x == 0.0) {
            saw_zero = true;
            CHECK(r.value() == Catch::Approx(0.5).margin(1e-12));  // W(0) = 1/c
        }
        if (x < 0.0) CHECK(r.value() == 0.0);
    }
    CHECK(saw_zero);
    auto resid = rows_with_task(rows, "scale_lt_resid");
    REQUIRE(resid.size() == 3);
    for (const auto& r : resid) CHECK(r.value() < 1e-6);
}

TEST_CASE("laplace at the u = b boundary is zero", "[cli]") {
    auto res = run_capture("laplace " + kConfigs + "/laplace_boundary.json", "lb");
    REQUIRE(res.exit_code == 0);
    auto rows = rows_with_task(parse_csv(res.out), "laplace");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].value() == 0.0);
}

TEST_CASE("laplace value is reproducible and sane", "[cli]") {
    auto res = run_capture("laplace " + kConfigs + "/laplace_exp_delay.json", "lc");
    REQUIRE(res.exit_code == 0);
    auto rows = rows_with_task(parse_csv(res.out), "laplace");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].value() > 0.0);
    CHECK(rows[0].value() < 1.0);
}

TEST_CASE("config errors exit with code 2 and name the field", "[cli]") {
    const std::string bad = "cli_test_bad.json";
    {
        std::ofstream out(bad);
        out << R"({"model": {"premium_rate": 2.0, "claim_rate": 1.0,
                   "claim": {"type": "exponential", "rte": 1.0}},
                   "kernel": {"type": "piecewise_exponential", "cells": [{"rate": 1.0}]},
                   "task": {"type": "ruin-prob"}})";
    }
    const int rc = std::system((kCli + " ruin-prob " + bad + " 2> cli_test_err.txt").c_str());
    CHECK(WEXITSTATUS(rc) == 2);
    const std::string err = slurp("cli_test_err.txt");
    CHECK(err.find("/model/claim") != std::string::npos);
    CHECK(err.find("rte") != std::string::npos);

    CHECK(run("ruin-prob does_not_exist.json") == 2);
    // command/task mismatch
    CHECK(run("laplace " + kConfigs + "/exp_delay_ruin.json") == 2);
    // malformed JSON reports line/column
    {
        std::ofstream out(bad);
        out << "{\n  \"model\": oops\n}";
    }
    const int rc2 = std::system((kCli + " ruin-prob " + bad + " 2> cli_test_err.txt").c_str());
    CHECK(WEXITSTATUS(rc2) == 2);
    const std::string err2 = slurp("cli_test_err.txt");
    CHECK(err2.find("line 2") != std::string::npos);
}

TEST_CASE("cross-field validation: u <= b", "[cli]") {
    const std::string bad = "cli_test_ub.json";
    {
        std::ofstream out(bad);
        out << R"({"model": {"premium_rate": 2.0, "claim_rate": 1.0,
                   "claim": {"type": "exponential", "rate": 1.0}},
                   "kernel": {"type": "piecewise_exponential", "cells": [{"rate": 1.0}]},
                   "task": {"type": "laplace", "u": 6.0, "b": 5.0}})";
    }
    CHECK(run("laplace " + bad) == 2);
}

TEST_CASE("simulate runs are byte-identical across repeats and thread counts", "[cli]") {
    const std::string cfg = kConfigs + "/simulate_exp_delay.json";
    auto a = run_capture("simulate " + cfg + " --threads 1", "sim_a");
    auto b = run_capture("simulate " + cfg + " --threads 1", "sim_b");
    auto c = run_capture("simulate " + cfg + " --threads 2", "sim_c");
    auto d = run_capture("simulate " + cfg + " --threads 3", "sim_d");
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
    CHECK(a.out == d.out);
    // different seed changes the estimate but stays near the analytic value
    auto e = run_capture("simulate " + cfg + " --seed 11", "sim_e");
    REQUIRE(e.exit_code == 0);
    CHECK(e.out != a.out);
    auto rows = rows_with_task(parse_csv(e.out), "simulate_ruin_prob");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].fields.at("seed") == "11");
    CHECK(std::abs(rows[0].value() - 0.2928932) < 5.0 * rows[0].num("stderr"));
}

TEST_CASE("compare joins analytic and Monte Carlo columns", "[cli]") {
    auto res = run_capture("compare " + kConfigs + "/compare_exp_delay.json", "cmp");
    REQUIRE(res.exit_code == 0);
    auto rows = parse_csv(res.out);
    auto analytic = rows_with_task(rows, "compare_analytic");
    auto mc = rows_with_task(rows, "compare_mc");
    auto z = rows_with_task(rows, "compare_z");
    auto pass = rows_with_task(rows, "compare_pass");
    REQUIRE(analytic.size() == 1);
    REQUIRE(mc.size() == 1);
    REQUIRE(z.size() == 1);
    REQUIRE(pass.size() == 1);
    CHECK(analytic[0].value() == Catch::Approx(0.2928932).margin(1e-6));
    CHECK(std::abs(z[0].value()) < 3.29);
    CHECK(pass[0].value() == 1.0);
    const double zcheck = (mc[0].value() - analytic[0].value()) / mc[0].num("stderr");
    CHECK(z[0].value() == Catch::Approx(zcheck).margin(1e-12));
}

TEST_CASE("compare handles the laplace target", "[cli]") {
    auto res = run_capture("compare " + kConfigs + "/compare_laplace.json", "cmpl");
    REQUIRE(res.exit_code == 0);
    auto rows = parse_csv(res.out);
    auto analytic = rows_with_task(rows, "compare_analytic");
    auto z = rows_with_task(rows, "compare_z");
    REQUIRE(analytic.size() == 1);
    REQUIRE(z.size() == 1);
    CHECK(analytic[0].num("b") == 6.0);
    CHECK(analytic[0].num("v") == 0.5);
    CHECK(std::abs(z[0].value()) < 3.29);
}

TEST_CASE("compare exits 3 when the z threshold trips", "[cli]") {
    // seed picked so that this 2000-path run lands beyond |z| >= 3.29; the
    // run is deterministic, so this is a stable regression check of the exit
    // path, not a flaky statistical test
    const std::string cfg = "cli_test_zfail.json";
    {
        std::ofstream out(cfg);
        out << R"({"model": {"premium_rate": 2.0, "claim_rate": 1.0,
                   "claim": {"type": "exponential", "rate": 1.0}},
                   "kernel": {"type": "piecewise_exponential", "cells": [{"rate": 1.0}]},
                   "task": {"type": "compare", "target": "ruin-prob", "u": 0.0},
                   "sim": {"n_paths": 2000, "seed": )" PARISIAN_ZFAIL_SEED R"(}})";
    }
    auto res = run_capture("compare " + cfg, "zfail");
    CHECK(res.exit_code == 3);
    auto pass = rows_with_task(parse_csv(res.out), "compare_pass");
    REQUIRE(pass.size() == 1);
    CHECK(pass[0].value() == 0.0);
}

TEST_CASE("json output mirrors the csv fields", "[cli]") {
    const std::string cfg = "cli_test_json.json";
    {
        std::ofstream out(cfg);
        out << R"({"model": {"premium_rate": 2.0, "claim_rate": 1.0,
                   "claim": {"type": "exponential", "rate": 1.0}},
                   "kernel": {"type": "piecewise_exponential", "cells": [{"rate": 1.0}]},
                   "task": {"type": "ruin-prob", "u": 0.0},
                   "output": {"format": "json"}})";
    }
    const std::string out_path = "cli_test_json_out.json";
    const int rc = std::system((kCli + " ruin-prob " + cfg + " --out " + out_path).c_str());
    REQUIRE(WEXITSTATUS(rc) == 0);
    auto doc = nlohmann::json::parse(slurp(out_path));
    CHECK(doc.at("tool") == "parisian");
    CHECK(doc.at("rows").size() == 1);
    const auto& row = doc.at("rows")[0];
    CHECK(row.at("task") == "ruin_prob");
    CHECK(std::abs(row.at("value").get<double>() - 0.2928932) < 1e-6);
    CHECK(row.at("config_hash") == doc.at("config_hash"));
}
