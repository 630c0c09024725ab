#pragma once

#include "escflex/scenario.hpp"
#include "escflex/solve.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace escflex {

struct RenewableFractions {
    double pct_of_demand = 0.0;     // renewable kWh consumed / all kWh consumed
    double pct_of_available = 0.0;  // renewable kWh consumed / renewable kWh available
};

/// Renewable consumption per step is min(sum p, sum r).
RenewableFractions renewable_fractions(const PlanSolution& solution, const Scenario& scenario);

struct EnergySplit {
    double non_renewable = 0.0, wind = 0.0, solar = 0.0;  // kWh
    double total() const { return non_renewable + wind + solar; }
};

struct EnergyAttribution {
    EnergySplit manufacturing;
    EnergySplit transport;
    double total() const { return manufacturing.total() + transport.total(); }
};

/// Splits sum p dt into sectors and sources. Manufacturing takes its process
/// draw at each step; transport takes the rest of that step's purchase (net
/// charging, which trucks later spend on trips). Each sector inherits the
/// step's source mix, and renewables split wind/solar by availability.
EnergyAttribution attribute_energy(const PlanSolution& solution, const Scenario& scenario);

/// Process energy drawn per step, kWh.
std::vector<double> manufacturing_energy_series(const PlanSolution& solution, const Scenario& scenario);

struct Utilization {
    double trucks_pct = 0.0;
    double warehouse_pct = 0.0;
    double equipment_pct = 0.0;
};

/// Means over steps (and entities); entities with zero capacity are skipped.
/// A truck counts as used for every step of a trip, never while charging.
Utilization utilization(const PlanSolution& solution, const Scenario& scenario);

/// series[t] = sum over s <= t of (P_a - P_b) dt with P the system draw.
/// Positive means a consumes earlier than b.
std::vector<double> cumulative_shift(const PlanSolution& a, const PlanSolution& b, double step_hours);

/// Trucks in transit at each step (loaded and empty).
std::vector<double> trucks_in_transit(const PlanSolution& solution, const Scenario& scenario);

/// Total km driven, loaded and empty. Uses the scenario's path distances;
/// throws std::invalid_argument if one is missing.
double total_distance(const PlanSolution& solution, const Scenario& scenario);
/// Same with explicit distances keyed by path name ("A>B").
double total_distance(const PlanSolution& solution, const Scenario& scenario,
                      const std::map<std::string, double>& km_by_path);

struct KpiReport {
    RenewableFractions renewables;
    double energy_total_kwh = 0.0;
    double renewable_available_kwh = 0.0;
    EnergyAttribution energy;
    Utilization utilization;
    ObjectiveBreakdown cost;
    double fleet_size = 0.0;
    double warehouse_total_kg = 0.0;
    double equipment_total = 0.0;
    std::optional<double> total_distance_km;  // absent when paths lack distances
    std::vector<double> cumulative_energy_kwh;
};

KpiReport make_kpi_report(const PlanSolution& solution, const Scenario& scenario);

std::string kpi_json(const KpiReport& report, int indent = 2);
/// Plain-text table: one line per labelled report.
std::string kpi_table(const std::vector<std::pair<std::string, KpiReport>>& reports);
/// kpi.json plus cumulative_energy.csv (step,kwh).
void save_kpi(const KpiReport& report, const std::filesystem::path& dir);

}  // namespace escflex
