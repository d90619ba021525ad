// Batch front-end: parisian <command> <config.json> [--out PATH] [--seed N]
// [--threads N]. Commands map one-to-one onto the config's task block; all
// numbers come from the config so runs are reproducible from the file alone.
//
// Exit codes: 0 success, 1 computation failure, 2 config error,
//             3 compare threshold failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "parisian/commands.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parisian::config_error("config error: cannot open \"" + path + "\"");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_atomic(const std::string& path, const std::string& bytes) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write \"" + tmp.string() + "\"");
        out << bytes;
    }
    fs::rename(tmp, target);
}

const char* task_name(parisian::TaskType t) {
    using parisian::TaskType;
    switch (t) {
        case TaskType::Scale: return "scale";
        case TaskType::RuinProb: return "ruin-prob";
        case TaskType::Laplace: return "laplace";
        case TaskType::Simulate: return "simulate";
        case TaskType::Compare: return "compare";
    }
    return "?";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parisian ruin probabilities and transforms for Levy insurance risk models"};
    app.set_version_flag("--version", std::string("parisian ") + PARISIAN_VERSION);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    long long seed_override = -1;
    int threads_override = -1;

    const std::pair<const char*, parisian::TaskType> commands[] = {
        {"scale", parisian::TaskType::Scale},
        {"ruin-prob", parisian::TaskType::RuinProb},
        {"laplace", parisian::TaskType::Laplace},
        {"simulate", parisian::TaskType::Simulate},
        {"compare", parisian::TaskType::Compare},
    };
    for (const auto& [name, type] : commands) {
        (void)type;
        auto* sub = app.add_subcommand(name, "");
        sub->add_option("config", config_path, "path to the JSON run configuration")->required();
        sub->add_option("--out", out_path, "write results here instead of stdout");
        sub->add_option("--seed", seed_override, "override sim.seed");
        sub->add_option("--threads", threads_override, "override sim.threads (worker count)");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        parisian::RunConfig cfg = parisian::parse_config(read_file(config_path));

        parisian::TaskType expected = parisian::TaskType::RuinProb;
        for (const auto& [name, type] : commands)
            if (app.get_subcommand(name)->parsed()) expected = type;
        if (cfg.task.type != expected)
            throw parisian::config_error(std::string("config error at /task/type: config says \"") +
                                         task_name(cfg.task.type) + "\" but the command is \"" +
                                         task_name(expected) + "\"");

        if (seed_override >= 0) cfg.sim.seed = std::uint64_t(seed_override);
        if (threads_override >= 0) cfg.sim.threads = unsigned(threads_override);
        if (!out_path.empty()) cfg.output.path = out_path;

        const parisian::RunResult result = parisian::run_task(cfg);
        const std::string rendered = parisian::render(cfg, result);
        if (cfg.output.path.empty())
            std::fputs(rendered.c_str(), stdout);
        else
            write_atomic(cfg.output.path, rendered);

        return result.compare_failed ? 3 : 0;
    } catch (const parisian::config_error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
