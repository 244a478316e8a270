#include <CLI11.hpp>

#include "splitfit/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"splitfit: split-minimization least-squares parameter identification"};
    app.require_subcommand(1);

    splitfit::cli::CommonArgs args;
    std::uint64_t seed = 0;
    unsigned workers = 0;

    auto add_common = [&](CLI::App* cmd, bool needs_data) {
        cmd->add_option("--config", args.config, "configuration document (JSON)")
            ->required()
            ->check(CLI::ExistingFile);
        auto* data = cmd->add_option("--data", args.data, "data series (CSV)");
        if (needs_data) data->required()->check(CLI::ExistingFile);
        cmd->add_option("--out", args.out_dir, "output directory")->required();
        auto* s = cmd->add_option("--seed", seed, "noise seed override");
        s->each([&](const std::string&) { args.seed = seed; });
        auto* w = cmd->add_option("--workers", workers, "concurrent scan workers");
        w->each([&](const std::string&) { args.workers = workers; });
        return cmd;
    };

    auto* simulate = add_common(app.add_subcommand("simulate", "write synthetic data"), false);
    auto* fit = add_common(app.add_subcommand("fit", "identify parameters"), true);
    fit->add_option("--engine", args.engine, "grid | secant | secant-eliminated")
        ->default_val("grid");
    auto* sections =
        add_common(app.add_subcommand("sections", "clever sections per parameter"), true);
    auto* analyze =
        add_common(app.add_subcommand("analyze", "noise and reliability analysis"), true);
    auto* compression = add_common(
        app.add_subcommand("compression-curve", "per-stage asymptotic stresses"), false);

    CLI11_PARSE(app, argc, argv);

    if (simulate->parsed()) return splitfit::cli::run_simulate(args);
    if (fit->parsed()) return splitfit::cli::run_fit(args);
    if (sections->parsed()) return splitfit::cli::run_sections(args);
    if (analyze->parsed()) return splitfit::cli::run_analyze(args);
    if (compression->parsed()) return splitfit::cli::run_compression_curve(args);
    return 1;
}
