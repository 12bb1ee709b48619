// spinbath_main.cpp — command-line front end
//
// Subcommands:
//   run <config>             solve one scenario and write its CSV
//   fig1|fig2|fig3 --out d   reproduce the survey figures as CSV
//   oracle-compare <config>  finite-N oracle vs reduced solver
//   sweep <config>           run the configured parameter sweep in parallel

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spinbath/spinbath.hpp"

namespace {

spinbath::ScenarioConfig load_with_seed(const std::string& path,
                                        const std::optional<std::uint64_t>& seed) {
    auto cfg = spinbath::load_config_file(path);
    if (seed) cfg.seed = *seed;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact reduced dynamics of a central spin-1/2 in a polarized spin bath"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;

    auto* run = app.add_subcommand("run", "solve one scenario and write its CSV");
    run->add_option("config", config_path, "scenario config file")->required();
    run->add_option("--out", out_path, "output CSV path (overrides [output] path)");
    run->add_option("--seed", seed, "override the config seed");

    std::string fig_out;
    auto* fig1_cmd = app.add_subcommand("fig1", "exponential-kernel fidelity surface");
    fig1_cmd->add_option("--out", fig_out, "output directory")->required();
    auto* fig2_cmd = app.add_subcommand("fig2", "gaussian-bath fidelity vs bath size");
    fig2_cmd->add_option("--out", fig_out, "output directory")->required();
    auto* fig3_cmd = app.add_subcommand("fig3", "free vs LEO-controlled fidelity");
    fig3_cmd->add_option("--out", fig_out, "output directory")->required();

    std::string compare_out = ".";
    auto* compare = app.add_subcommand("oracle-compare",
                                       "finite-N oracle vs reduced solver on one config");
    compare->add_option("config", config_path, "scenario config file")->required();
    compare->add_option("--out", compare_out, "output directory");
    compare->add_option("--seed", seed, "override the config seed");

    std::string sweep_out = ".";
    auto* sweep = app.add_subcommand("sweep", "run the configured parameter sweep");
    sweep->add_option("config", config_path, "scenario config file")->required();
    sweep->add_option("--out", sweep_out, "output directory");
    sweep->add_option("--seed", seed, "override the config seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            auto cfg = load_with_seed(config_path, seed);
            if (!out_path.empty()) cfg.output_path = out_path;
            const auto written = spinbath::run_scenario(cfg);
            std::cout << written.string() << "\n";
        } else if (fig1_cmd->parsed()) {
            std::cout << spinbath::fig1(fig_out).string() << "\n";
        } else if (fig2_cmd->parsed()) {
            std::cout << spinbath::fig2(fig_out).string() << "\n";
        } else if (fig3_cmd->parsed()) {
            std::cout << spinbath::fig3(fig_out).string() << "\n";
        } else if (compare->parsed()) {
            const auto cfg = load_with_seed(config_path, seed);
            const auto result = spinbath::oracle_compare(cfg, compare_out);
            std::cout << "max_abs = " << spinbath::format_double(result.report.max_abs)
                      << "\nrms = " << spinbath::format_double(result.report.rms) << "\n";
        } else if (sweep->parsed()) {
            const auto cfg = load_with_seed(config_path, seed);
            for (const auto& path : spinbath::run_sweep(cfg, sweep_out))
                std::cout << path.string() << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
