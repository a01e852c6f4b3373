// Command-line driver for the imaging pipeline.
//
// Subcommands:
//   simulate   synthesize the measurement campaign into the run directory
//   assemble   build the configured imaging operator from the dataset
//   invert     truncated-SVD inversion to an indicator map (also renders)
//   render     regenerate CSV/PGM images from the raw map
//   validate   run the identity-check battery; JSON-lines report
//   pipeline   simulate -> assemble -> invert -> render with caching
//
// Exit codes: 0 success, 1 stage or validation failure, 2 usage error
// (including unreadable or malformed configs).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tdlsm/config.hpp"
#include "tdlsm/pipeline.hpp"

namespace {

void print_stage(const tdlsm::StageResult& r) {
    std::cout << r.stage << ": " << (r.recomputed ? "computed" : "cached");
    for (const std::string& f : r.files) std::cout << " " << f;
    std::cout << "\n";
}

int run_validate_command(const tdlsm::RunConfig& cfg, const std::string& baselines_path) {
    tdlsm::ValidationBaselines base;
    if (!baselines_path.empty()) base = tdlsm::baselines_from_json(tdlsm::load_json(baselines_path));
    const tdlsm::ValidationRun run = tdlsm::run_validate(cfg, base);

    const std::filesystem::path dir = cfg.output_dir;
    std::filesystem::create_directories(dir);
    std::ofstream file(dir / "validation.jsonl", std::ios::binary | std::ios::trunc);
    for (const tdlsm::IdentityReport& r : run.reports) {
        const std::string line = tdlsm::report_json_line(r);
        std::cout << line << "\n";
        file << line << "\n";
    }
    std::cout << (run.all_pass ? "validate: all checks passed" : "validate: FAILED") << " ("
              << run.reports.size() << " reports)\n";
    return run.all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Passive time-domain imaging of sound-soft obstacles from cross-correlated records"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> threads_override;
    std::optional<std::string> out_override;
    app.add_option("-c,--config", config_path, "JSON config file; built-in defaults when omitted")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", seed_override, "Override the source-ensemble seed");
    app.add_option("--threads", threads_override, "Override the worker count");
    app.add_option("-o,--out", out_override, "Override the output directory");

    CLI::App* cmd_simulate = app.add_subcommand("simulate", "Synthesize passive/active records and incident terms");
    CLI::App* cmd_assemble = app.add_subcommand("assemble", "Assemble the configured imaging operator");
    CLI::App* cmd_invert = app.add_subcommand("invert", "Invert the operator into an indicator map and images");
    CLI::App* cmd_render = app.add_subcommand("render", "Re-render CSV/PGM images from the raw map");
    CLI::App* cmd_validate = app.add_subcommand("validate", "Run the identity-check battery");
    CLI::App* cmd_pipeline = app.add_subcommand("pipeline", "Run every stage in order, skipping cached work");

    std::string baselines_path;
    cmd_validate->add_option("--baselines", baselines_path, "Baseline thresholds JSON (defaults are built in)")
        ->check(CLI::ExistingFile);
    bool force = false;
    for (CLI::App* c : {cmd_simulate, cmd_assemble, cmd_invert, cmd_render, cmd_pipeline})
        c->add_flag("--force", force, "Recompute even when cached outputs match");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    tdlsm::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = tdlsm::config_from_json(tdlsm::load_json(config_path));
        if (seed_override) cfg.seed = *seed_override;
        if (threads_override) cfg.threads = *threads_override;
        if (out_override) cfg.output_dir = *out_override;
        tdlsm::validate_config(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error [config]: " << e.what() << "\n";
        return 2;
    }

    const std::filesystem::path dir = cfg.output_dir;
    std::string stage = "startup";
    try {
        if (cmd_simulate->parsed()) {
            stage = "simulate";
            print_stage(tdlsm::run_simulate(cfg, dir, force));
        } else if (cmd_assemble->parsed()) {
            stage = "assemble";
            print_stage(tdlsm::run_assemble(cfg, dir, force));
        } else if (cmd_invert->parsed()) {
            stage = "invert";
            print_stage(tdlsm::run_invert(cfg, dir, force));
            stage = "render";
            print_stage(tdlsm::run_render(cfg, dir, force));
        } else if (cmd_render->parsed()) {
            stage = "render";
            print_stage(tdlsm::run_render(cfg, dir, force));
        } else if (cmd_pipeline->parsed()) {
            for (const char* s : {"simulate", "assemble", "invert", "render"}) {
                stage = s;
                if (stage == "simulate") print_stage(tdlsm::run_simulate(cfg, dir, force));
                if (stage == "assemble") print_stage(tdlsm::run_assemble(cfg, dir, force));
                if (stage == "invert") print_stage(tdlsm::run_invert(cfg, dir, force));
                if (stage == "render") print_stage(tdlsm::run_render(cfg, dir, force));
            }
        } else if (cmd_validate->parsed()) {
            stage = "validate";
            return run_validate_command(cfg, baselines_path);
        }
    } catch (const std::exception& e) {
        std::cerr << "error [" << stage << "]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
