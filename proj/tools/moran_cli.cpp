#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "moran/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Random weighted IFS Moran sets and measures: dimensions, weights, sampling, estimation"};
    app.set_version_flag("--version", std::string(moran::kToolVersion));
    app.require_subcommand(1);

    std::string config;
    moran::Overrides ov;
    std::uint64_t seed = 0;
    long long depth = 0, max_level = 0, max_window = 0;
    std::string out_dir;

    const std::pair<const char*, const char*> commands[] = {
        {"dims", "Closed-form set and measure dimensions"},
        {"attain", "Construct weights attaining target measure dimensions"},
        {"sample", "Export Moran intervals of a realization as CSV/SVG"},
        {"estimate", "Estimate dimensions from a realization"},
        {"lemma", "Check the stopping-set covering bound on labeled trees"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", config, "JSON configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Override the environment seed");
        sub->add_option("--depth", depth, "Override the realization depth");
        sub->add_option("-o,--out", out_dir, "Override the output directory");
        sub->add_option("--max-level", max_level, "Override estimator.max_level");
        sub->add_option("--max-window", max_window, "Override estimator.max_window");
    }
    CLI11_PARSE(app, argc, argv);

    auto* sub = app.get_subcommands().front();
    if (sub->count("--seed")) ov.seed = seed;
    if (sub->count("--depth")) ov.depth = depth;
    if (sub->count("--out")) ov.output_dir = out_dir;
    if (sub->count("--max-level")) ov.max_level = max_level;
    if (sub->count("--max-window")) ov.max_window = max_window;

    try {
        const auto cfg = moran::load_config(config, ov);
        return moran::run_command(sub->get_name(), cfg, std::cout);
    } catch (const moran::ValidationError& e) {
        std::cerr << "error: invalid ensemble\n";
        for (const auto& d : e.diagnostics()) std::cerr << "  " << moran::to_string(d.code) << ": " << d.message << "\n";
        return moran::exit_code(e.code());
    } catch (const moran::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (e.code() == moran::ErrorCode::EnumerationCapExceeded)
            std::cerr << "hint: lower sample.levels or the estimator windows, or raise estimator.enumeration_cap\n";
        return moran::exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
