#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace escflex;
    CLI::App app{"Electrified supply chain planning: solve, BESS comparison and sensitivity sweeps"};
    app.require_subcommand(1);

    cli::SolveArgs solve_args;
    std::string clearing;
    std::string solve_config;
    auto* solve = app.add_subcommand("solve", "Solve one scenario and write trajectories, KPIs and a manifest");
    solve->add_option("scenario", solve_args.scenario_dir, "Scenario directory")->required();
    solve->add_option_function<double>("--tax", [&](double v) { solve_args.tax = v; }, "Carbon tax, $/tonne CO2");
    solve->add_option("--clearing", clearing, "Demand clearing rule")
        ->check(CLI::IsMember({"per-step", "weekly", "monthly"}));
    solve->add_option("--out", solve_args.out, "Output directory")->required();
    solve->add_option("--config", solve_config, "Solver settings (JSON)");

    cli::BessArgs bess_args;
    std::string bess_config;
    auto* bess = app.add_subcommand("bess", "Compare flexible scheduling against a battery on the frozen schedule");
    bess->add_option("scenario", bess_args.scenario_dir, "Scenario directory")->required();
    bess->add_option("--tax", bess_args.taxes, "Carbon taxes, $/tonne CO2")->delimiter(',');
    bess->add_option("--out", bess_args.out, "Output directory")->required();
    bess->add_option("--config", bess_config, "Solver settings (JSON)");

    cli::SweepArgs sweep_args;
    std::string sweep_config;
    auto* sweep = app.add_subcommand("sweep", "Run a grid of taxes, clearing rules and cost scale factors");
    sweep->add_option("scenario", sweep_args.scenario_dir, "Scenario directory")->required();
    sweep->add_option("--grid", sweep_args.grid, "Grid specification (JSON)")->required();
    sweep->add_option("--out", sweep_args.out, "Output directory")->required();
    sweep->add_option("--config", sweep_config, "Solver settings (JSON)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : cli::kExitError;
    }

    if (*solve) {
        if (!clearing.empty()) solve_args.clearing = parse_clearing(clearing);
        if (!solve_config.empty()) solve_args.config = solve_config;
        return cli::cmd_solve(solve_args, std::cout, std::cerr);
    }
    if (*bess) {
        if (!bess_config.empty()) bess_args.config = bess_config;
        return cli::cmd_bess(bess_args, std::cout, std::cerr);
    }
    if (!sweep_config.empty()) sweep_args.config = sweep_config;
    return cli::cmd_sweep(sweep_args, std::cout, std::cerr);
}
