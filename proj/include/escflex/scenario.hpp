#pragma once

#include "escflex/grid.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace escflex {

inline constexpr double kHoursPerYear = 8760.0;
inline constexpr double kHoursPerWeek = 168.0;
inline constexpr double kDefaultEmissionFactor = 0.389;  // kg CO2 / kWh, gas at the margin
inline constexpr double kDefaultEpsilon = 0.001;         // $/kWh on every kWh drawn

enum class DemandClearing { PerStep, Weekly, Monthly };

std::string_view to_string(DemandClearing clearing);
DemandClearing parse_clearing(std::string_view text);

struct Horizon {
    std::size_t n_steps = 0;
    double step_hours = 1.0;

    double hours() const { return static_cast<double>(n_steps) * step_hours; }
    /// Steps in one clearing week (at least one).
    std::size_t steps_per_week() const;

    bool operator==(const Horizon&) const = default;
};

struct Location {
    std::string id;
    std::string name;
    double wind_mw = 0.0;   // nameplate, as stored on disk
    double solar_mw = 0.0;

    bool operator==(const Location&) const = default;
};

struct Path {
    std::size_t origin = 0;
    std::size_t dest = 0;
    std::size_t travel_steps = 1;
    double energy_kwh = 0.0;  // loaded trip
    std::optional<double> distance_km;

    bool operator==(const Path&) const = default;
};

struct TruckSpec {
    double battery_kwh = 0.0;
    double load_kg = 0.0;
    double empty_weight_kg = 0.0;
    double full_charge_hours = 0.0;
    double unit_cost = 0.0;
    double lifetime_years = 0.0;
    /// Trip energy must already sit in the origin's charge at the end of the
    /// previous step, so a truck cannot leave on power bought in its
    /// departure step. Off reproduces the balance exactly as written.
    bool charge_before_departure = true;

    /// Unloaded-to-loaded weight ratio; an empty trip costs theta times a loaded one.
    double theta() const { return empty_weight_kg / (empty_weight_kg + load_kg); }

    bool operator==(const TruckSpec&) const = default;
};

/// One manufacturing process. A unit started at step t draws power_per_unit_kw
/// for duration_steps steps, consumes raw_per_unit_kg at t and delivers
/// output_per_unit_kg at t + duration_steps.
struct ProcessSpec {
    std::string id;
    std::vector<std::size_t> sites;  // location indices hosting the process
    std::size_t duration_steps = 1;
    double power_per_unit_kw = 0.0;
    double output_per_unit_kg = 0.0;
    double raw_per_unit_kg = 0.0;
    double equip_unit_cost = 0.0;
    double equip_lifetime_years = 0.0;

    bool operator==(const ProcessSpec&) const = default;
};

/// All monetary rates the optimizer sees.
struct CostBook {
    double k_truck = 0.0;               // $/h per truck
    std::vector<double> k_store;        // $/(kg h), per location
    std::vector<double> k_equip;        // $/(unit h), per process
    double k_power = 0.0;               // $/kWh of non-renewable energy
    double epsilon = kDefaultEpsilon;   // $/kWh of any energy
    double k_batt = 0.0;                // $/kWh of battery over the whole horizon
    double emission_factor = kDefaultEmissionFactor;

    bool operator==(const CostBook&) const = default;
};

/// Exogenous inputs. Rows are locations, columns are steps.
struct ExogenousSeries {
    Grid product_kg;  // signed as read: + import, - demand (before clearing)
    Grid raw_kg;      // raw material arrivals
    Grid wind_cf;     // capacity factors in [0, 1]
    Grid solar_cf;

    bool operator==(const ExogenousSeries&) const = default;
};

/// A process placed at a site; the entity behind m and M variables.
struct ProcessSite {
    std::size_t process = 0;
    std::size_t location = 0;
};

struct Scenario {
    Horizon horizon;
    std::vector<Location> locations;
    std::vector<Path> paths;
    TruckSpec truck;
    std::vector<ProcessSpec> processes;
    CostBook costs;
    ExogenousSeries exogenous;
    DemandClearing clearing = DemandClearing::Weekly;

    std::size_t location_index(std::string_view id) const;
    std::vector<ProcessSite> process_sites() const;
    std::string path_name(std::size_t path) const;
    std::string process_site_name(const ProcessSite& unit) const;

    double wind_kw(std::size_t loc, std::size_t step) const;
    double solar_kw(std::size_t loc, std::size_t step) const;
    double renewable_kw(std::size_t loc, std::size_t step) const;
    /// Sum of renewable_kw over locations for one step.
    double renewable_total_kw(std::size_t step) const;

    /// q after applying the clearing rule: imports stay where they are,
    /// demand is collected onto the deadline step of its clearing window.
    Grid product_injection() const;

    /// Throws ScenarioError on the first violated invariant.
    void validate() const;

    bool operator==(const Scenario&) const = default;
};

// Parameter calculators.

/// Carbon tax ($/tonne CO2) to a non-renewable energy penalty ($/kWh).
double carbon_tax_to_penalty(double tax_per_tonne, double emission_factor_kg_per_kwh);

/// Capital cost spread evenly over the asset lifetime, in $/h.
double levelize(double capital, double lifetime_years);

/// Battery capital cost scaled to a horizon as a share of the battery lifetime.
double battery_cost_over_horizon(double capital_per_kwh, double lifetime_years, double horizon_hours);

struct CementEnergy {
    double power_per_unit_kw;   // kWh per hour of kiln operation
    double output_per_unit_kg;
    double raw_per_unit_kg;
};

/// Heating energy E = m c dT for one hour of kiln throughput, in kWh.
/// With 150 t/h, 0.92 kJ/(kg C) and 1400 C this gives 53,666.7 kWh. The
/// shipped cement scenarios use kReferenceCementEnergyKwh instead, about
/// 5.6% higher than the bare heating energy.
CementEnergy cement_process_params(double kiln_rate_kg_h, double specific_heat_kj_kg_c, double delta_t_c);

inline constexpr double kReferenceCementEnergyKwh = 56667.0;

double warehouse_cost_per_kg_hour(double area_m2, double height_m, double density_kg_m3,
                                  double construction_cost, double lifetime_years);

// Files.

Scenario load_scenario(const std::filesystem::path& dir);
void save_scenario(const Scenario& scenario, const std::filesystem::path& dir);

}  // namespace escflex
