#pragma once

#include "escflex/scenario.hpp"

#include <filesystem>
#include <string>

namespace testing {

inline std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(ESCFLEX_FIXTURES) / name;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("escflex-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// One site, one process (1 unit = 1000 kg out of 1000 kg raw, 100 kW for one
// step), no trucks, no renewables. Demand is per step.
inline escflex::Scenario one_city(std::size_t n_steps) {
    using namespace escflex;
    Scenario sc;
    sc.horizon = {n_steps, 1.0};
    sc.locations = {{"A", "A", 0.0, 0.0}};
    sc.truck = {900, 20000, 10000, 2, 150000, 30, true};
    ProcessSpec p;
    p.id = "kiln";
    p.sites = {0};
    p.duration_steps = 1;
    p.power_per_unit_kw = 100;
    p.output_per_unit_kg = 1000;
    p.raw_per_unit_kg = 1000;
    p.equip_unit_cost = 1;
    p.equip_lifetime_years = 1;
    sc.processes = {p};
    sc.costs.k_truck = levelize(sc.truck.unit_cost, sc.truck.lifetime_years);
    sc.costs.k_store = {1e-3};
    sc.costs.k_equip = {0.5};
    sc.costs.k_power = 0.1;
    sc.costs.epsilon = 0.001;
    sc.exogenous.product_kg = Grid(1, n_steps);
    sc.exogenous.raw_kg = Grid(1, n_steps);
    sc.exogenous.wind_cf = Grid(1, n_steps);
    sc.exogenous.solar_cf = Grid(1, n_steps);
    sc.clearing = DemandClearing::PerStep;
    return sc;
}

// Plant A, town B, one path each way of `tau` steps and 300 kWh.
inline escflex::Scenario two_city(std::size_t n_steps, std::size_t tau = 1) {
    using namespace escflex;
    Scenario sc = one_city(n_steps);
    sc.locations.push_back({"B", "B", 0.0, 0.0});
    sc.paths = {{0, 1, tau, 300.0, 100.0}, {1, 0, tau, 300.0, 100.0}};
    sc.costs.k_store = {1e-3, 1e-3};
    for (Grid* g : {&sc.exogenous.product_kg, &sc.exogenous.raw_kg, &sc.exogenous.wind_cf, &sc.exogenous.solar_cf})
        *g = Grid(2, n_steps);
    return sc;
}

}  // namespace testing
