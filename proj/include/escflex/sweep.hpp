#pragma once

#include "escflex/kpi.hpp"
#include "escflex/scenario.hpp"
#include "escflex/solve.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace escflex {

enum class FloorQuantity { Fleet, Equipment };

/// Smallest fleet size (or total equipment) any feasible plan can have,
/// ignoring cost. Throws InfeasibleScenarioError when no plan exists.
double minimum_feasible_floor(const Scenario& scenario, FloorQuantity quantity, const SolverConfig& config = {});

struct SweepSpec {
    std::vector<double> taxes{0.0};  // $/tonne CO2
    std::vector<double> truck_scales{1.0};
    std::vector<double> mfg_scales{1.0};
    std::vector<DemandClearing> clearings;  // empty: the scenario's own
    std::size_t workers = 0;                // 0: ESCFLEX_WORKERS or 1
    SolverConfig solver;

    void validate() const;
};

/// JSON object with optional keys taxes, truck_scales, mfg_scales,
/// clearings (names), workers, time_limit_seconds.
SweepSpec load_sweep_spec(const std::filesystem::path& file);

/// Worker count from the ESCFLEX_WORKERS environment variable (default 1).
std::size_t default_workers();

struct SweepRow {
    DemandClearing clearing = DemandClearing::Weekly;
    double truck_scale = 1.0;
    double mfg_scale = 1.0;
    double tax = 0.0;
    std::string status;  // optimal | infeasible | time_limit | error: ...
    double objective = 0.0;
    double energy_kwh = 0.0;
    double renewable_pct = 0.0;
    double fleet = 0.0;
    double equipment = 0.0;
    double warehouse_kg = 0.0;
    std::optional<double> distance_km;
    bool fleet_at_floor = false;
    bool equipment_at_floor = false;
    std::optional<KpiReport> kpi;

    bool ok() const { return status == "optimal"; }
};

struct SweepResult {
    std::vector<SweepRow> rows;  // clearing, truck scale, mfg scale, tax order
    std::map<DemandClearing, double> fleet_floor;
    std::map<DemandClearing, double> equipment_floor;
};

/// One independent solve per grid point; a failing cell is recorded in its
/// row and never stops the grid. Output does not depend on worker count.
SweepResult run_sweep(const Scenario& base, const SweepSpec& spec);

/// The scenario at one grid point.
Scenario sweep_point(const Scenario& base, double tax, double truck_scale, double mfg_scale,
                     DemandClearing clearing);

std::string sweep_csv(const SweepResult& result);
std::string sweep_json(const SweepResult& result, int indent = 2);
/// Human-readable table with daggers on cells at their floor.
std::string sweep_table(const SweepResult& result);
void save_sweep(const SweepResult& result, const std::filesystem::path& dir);

}  // namespace escflex
