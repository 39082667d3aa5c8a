#include <exception>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "qoct/experiments.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::size_t jobs = 0; // 0 = all available cores
    bool quiet = false;
};

void attach_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides config output_dir)");
    cmd->add_option("--jobs", args.jobs, "worker threads for independent runs (0 = all cores)");
    cmd->add_flag("--quiet", args.quiet, "suppress progress lines");
}

int run_kind(qoct::ExperimentKind expected, const CommonArgs& args) {
    const qoct::ExperimentConfig config = qoct::load_config_file(args.config_path);
    if (config.kind != expected) {
        throw qoct::ConfigError("config declares experiment '" + qoct::to_string(config.kind) +
                                "' but the subcommand expects '" + qoct::to_string(expected) +
                                "'");
    }
    qoct::RunOptions options;
    if (!args.out_dir.empty()) {
        options.output_dir = args.out_dir;
    } else if (config.output_dir) {
        options.output_dir = *config.output_dir;
    } else {
        throw qoct::ConfigError("no output directory: pass --out or set output_dir");
    }
    options.jobs = args.jobs > 0 ? args.jobs
                                 : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    options.quiet = args.quiet;
    return qoct::run_experiment(config, options).exit_code;
}

int run_validate(const CommonArgs& args) {
    const qoct::ExperimentConfig config = qoct::load_config_file(args.config_path);
    if (!args.quiet) {
        std::cout << qoct::to_json(config).dump(2) << std::endl;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum optimal control experiments"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* help;
        qoct::ExperimentKind kind;
    };
    const Sub subs[] = {
        {"lz-convergence", "optimize avoided-crossing sweeps at several durations",
         qoct::ExperimentKind::lz_convergence},
        {"lz-qsl-compare", "compare analytic and convergence-based minimal times",
         qoct::ExperimentKind::lz_qsl_compare},
        {"chain-scan", "threshold transfer times for a set of chain lengths",
         qoct::ExperimentKind::chain_threshold_scan},
        {"chain-bounds", "per-site speed bounds vs achieved transfer times",
         qoct::ExperimentKind::chain_bound_compare},
    };

    CommonArgs args[5];
    int selected = -1;
    for (int i = 0; i < 4; ++i) {
        CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].help);
        attach_common(cmd, args[i]);
        cmd->callback([&selected, i] { selected = i; });
    }
    CLI::App* validate = app.add_subcommand("validate-config", "parse a config and echo it back");
    attach_common(validate, args[4]);
    validate->callback([&selected] { selected = 4; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // bad command lines count as configuration errors (--help stays 0)
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (selected == 4) return run_validate(args[4]);
        return run_kind(subs[selected].kind, args[selected]);
    } catch (const qoct::ConfigError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return 2;
    } catch (const qoct::IoError& e) {
        std::cerr << "io error: " << e.what() << std::endl;
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    }
}
