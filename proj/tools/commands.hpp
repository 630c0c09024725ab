#pragma once

#include "escflex/scenario.hpp"
#include "escflex/solve.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace escflex::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInfeasible = 2;

struct SolveArgs {
    std::filesystem::path scenario_dir;
    std::optional<double> tax;  // $/tn; the scenario's own penalty when absent
    std::optional<DemandClearing> clearing;
    std::filesystem::path out;
    std::optional<std::filesystem::path> config;
};

struct BessArgs {
    std::filesystem::path scenario_dir;
    std::vector<double> taxes{0.0};
    std::filesystem::path out;
    std::optional<std::filesystem::path> config;
};

struct SweepArgs {
    std::filesystem::path scenario_dir;
    std::filesystem::path grid;
    std::filesystem::path out;
    std::optional<std::filesystem::path> config;
};

/// Solver settings from a JSON file: backend, feasibility_tol,
/// optimality_tol, time_limit_seconds, tie_break (none|least_inventory),
/// tie_break_slack. Missing keys keep their defaults.
SolverConfig load_solver_config(const std::filesystem::path& file);

// Each command writes its outputs and one manifest.json into `out`, reports
// problems on `err` prefixed with the stage that failed, and returns an exit
// code: 0 ok, 1 error, 2 infeasible.
int cmd_solve(const SolveArgs& args, std::ostream& log, std::ostream& err);
int cmd_bess(const BessArgs& args, std::ostream& log, std::ostream& err);
int cmd_sweep(const SweepArgs& args, std::ostream& log, std::ostream& err);

/// Table-IV-shaped rows written by cmd_bess.
struct BessRow {
    double tax = 0.0;
    double b_max_kwh = 0.0;
    double proposed_pct = 0.0;
    double bess_pct = 0.0;
};
std::string bess_csv(const std::vector<BessRow>& rows);

}  // namespace escflex::cli
