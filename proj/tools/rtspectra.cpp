// rtspectra <command> [--config path] [--set key=value ...] [--out dir] [--seed n]

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rtspectra/config.hpp"
#include "rtspectra/errors.hpp"
#include "rtspectra/runner.hpp"

namespace {

nlohmann::json read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw rtspectra::ConfigError("--config", "cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return nlohmann::json::parse(text.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw rtspectra::ConfigError(path, std::string("invalid JSON (byte offset ") + std::to_string(e.byte) + ")");
    }
}

}  // namespace

int main(int argc, char** argv) {
    using namespace rtspectra;

    CLI::App app{"Growth rates, evolution and stability audits for stratified viscous flow"};
    app.set_version_flag("--version", tool_version());
    std::string command, config_path;
    CliOverrides cli;
    std::uint64_t seed = 0;
    std::string out;
    app.add_option("command", command, "Command to run")
        ->required()
        ->check(CLI::IsMember(command_names()));
    app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--set", cli.sets, "Override a config key, e.g. --set params.mu=0.05")->take_all();
    auto* seed_opt = app.add_option("--seed", seed, "Random seed");
    auto* out_opt = app.add_option("--out", out, "Output directory (default $RTSPECTRA_OUTPUT_ROOT/<command>)");
    app.footer("Exit codes: 0 pass, 1 certificate failure, 2 usage error, 3 numerical failure.");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : ExitUsage;
    }

    RunConfig cfg;
    try {
        cli.command = command;
        if (*seed_opt) cli.seed = seed;
        if (*out_opt) cli.out = out;
        const nlohmann::json doc = apply_cli(config_path.empty() ? nlohmann::json::object() : read_config_file(config_path), cli);
        cfg = config_from_json(doc);
    } catch (...) {
        std::string type, message;
        const int rc = exit_code_for_current_exception(type, message);
        std::cerr << "rtspectra: " << type << ": " << message << '\n';
        return rc;
    }

    const RunOutcome r = run(cfg);
    const auto& outcome = r.manifest["outcome"];
    if (outcome.contains("failure"))
        std::cerr << "rtspectra: " << outcome["failure"]["type"].get<std::string>() << ": "
                  << outcome["failure"]["message"].get<std::string>() << '\n';
    std::cout << to_string(cfg.command) << ": " << outcome["status"].get<std::string>() << " (exit " << r.exit_code
              << ")\n"
              << "summary: " << outcome["summary"].dump() << '\n'
              << "output: " << r.dir.string() << '\n';
    return r.exit_code;
}
