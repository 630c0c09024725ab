#include "escflex/sweep.hpp"

#include "escflex/csv.hpp"
#include "escflex/errors.hpp"
#include "escflex/model.hpp"

#include <fmt/core.h>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace escflex {

double minimum_feasible_floor(const Scenario& sc, FloorQuantity quantity, const SolverConfig& config) {
    auto lp = build_lp(sc);
    std::fill(lp.lp.cost.begin(), lp.lp.cost.end(), 0.0);
    const auto kind = quantity == FloorQuantity::Fleet ? VarKind::FleetSize : VarKind::EquipCap;
    if (!lp.space.has(kind)) return 0.0;
    for (std::size_t e = 0; e < lp.space.entities(kind); ++e) lp.lp.cost[lp.space(kind, e)] = 1.0;
    auto res = make_backend(config.backend)->solve(lp.lp, config);
    if (res.status == LpStatus::Infeasible) throw InfeasibleScenarioError("floor: scenario has no feasible plan");
    if (res.status != LpStatus::Optimal) throw SolverError(fmt::format("floor: {}", to_string(res.status)));
    return std::max(0.0, res.objective);
}

void SweepSpec::validate() const {
    if (taxes.empty() || truck_scales.empty() || mfg_scales.empty())
        throw std::invalid_argument("sweep: every point list needs at least one entry");
    for (double t : taxes)
        if (!(t >= 0.0)) throw std::invalid_argument("sweep: taxes must be >= 0");
    for (double f : truck_scales)
        if (!(f > 0.0)) throw std::invalid_argument("sweep: scale factors must be > 0");
    for (double f : mfg_scales)
        if (!(f > 0.0)) throw std::invalid_argument("sweep: scale factors must be > 0");
    solver.validate();
}

SweepSpec load_sweep_spec(const std::filesystem::path& file) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(file));
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(file.filename().string(), 0, "", e.what());
    }
    SweepSpec spec;
    try {
        if (j.contains("taxes")) spec.taxes = j["taxes"].get<std::vector<double>>();
        if (j.contains("truck_scales")) spec.truck_scales = j["truck_scales"].get<std::vector<double>>();
        if (j.contains("mfg_scales")) spec.mfg_scales = j["mfg_scales"].get<std::vector<double>>();
        if (j.contains("clearings"))
            for (const auto& c : j["clearings"]) spec.clearings.push_back(parse_clearing(c.get<std::string>()));
        if (j.contains("workers")) spec.workers = j["workers"].get<std::size_t>();
        if (j.contains("time_limit_seconds")) spec.solver.time_limit_seconds = j["time_limit_seconds"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(file.filename().string(), 0, "", e.what());
    }
    spec.validate();
    return spec;
}

std::size_t default_workers() {
    if (const char* env = std::getenv("ESCFLEX_WORKERS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return 1;
}

Scenario sweep_point(const Scenario& base, double tax, double truck_scale, double mfg_scale, DemandClearing clearing) {
    Scenario sc = base;
    sc.clearing = clearing;
    sc.costs.k_truck *= truck_scale;
    for (auto& k : sc.costs.k_equip) k *= mfg_scale;
    sc.costs.k_power = carbon_tax_to_penalty(tax, sc.costs.emission_factor);
    return sc;
}

namespace {

bool at_floor(double value, double floor) { return std::abs(value - floor) <= 1e-6 * std::max(1.0, floor); }

// Runs jobs 0..count-1 on up to `workers` threads.
template <class Job>
void parallel_for(std::size_t count, std::size_t workers, Job job) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    std::atomic<std::size_t> next{0};
    auto loop = [&] {
        for (auto i = next++; i < count; i = next++) job(i);
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(loop);
    loop();
    for (auto& t : pool) t.join();
}

}  // namespace

SweepResult run_sweep(const Scenario& base, const SweepSpec& spec) {
    spec.validate();
    base.validate();
    const auto clearings = spec.clearings.empty() ? std::vector<DemandClearing>{base.clearing} : spec.clearings;
    const auto workers = spec.workers ? spec.workers : default_workers();

    SweepResult out;
    for (auto c : clearings)
        for (double ts : spec.truck_scales)
            for (double ms : spec.mfg_scales)
                for (double tax : spec.taxes) {
                    SweepRow row;
                    row.clearing = c;
                    row.truck_scale = ts;
                    row.mfg_scale = ms;
                    row.tax = tax;
                    out.rows.push_back(row);
                }

    // floors only depend on the clearing rule, not on prices
    std::vector<std::pair<double, double>> floors(clearings.size(), {NAN, NAN});
    parallel_for(clearings.size() * 2, workers, [&](std::size_t job) {
        auto c = job / 2;
        Scenario sc = base;
        sc.clearing = clearings[c];
        try {
            double v = minimum_feasible_floor(sc, job % 2 ? FloorQuantity::Equipment : FloorQuantity::Fleet,
                                              spec.solver);
            (job % 2 ? floors[c].second : floors[c].first) = v;
        } catch (const std::exception&) {
            // leave NaN: nothing is tagged
        }
    });
    for (std::size_t c = 0; c < clearings.size(); ++c) {
        out.fleet_floor[clearings[c]] = floors[c].first;
        out.equipment_floor[clearings[c]] = floors[c].second;
    }

    parallel_for(out.rows.size(), workers, [&](std::size_t idx) {
        auto& row = out.rows[idx];
        try {
            auto sc = sweep_point(base, row.tax, row.truck_scale, row.mfg_scale, row.clearing);
            auto sol = solve(build_lp(sc), spec.solver);
            row.status = std::string(to_string(sol.status));
            if (sol.status != SolveStatus::Optimal) return;
            auto kpi = make_kpi_report(sol, sc);
            row.objective = sol.objective;
            row.energy_kwh = kpi.energy_total_kwh;
            row.renewable_pct = kpi.renewables.pct_of_demand;
            row.fleet = kpi.fleet_size;
            row.equipment = kpi.equipment_total;
            row.warehouse_kg = kpi.warehouse_total_kg;
            row.distance_km = kpi.total_distance_km;
            row.kpi = std::move(kpi);
        } catch (const InfeasibleScenarioError& e) {
            row.status = "infeasible";
        } catch (const std::exception& e) {
            row.status = std::string("error: ") + e.what();
        }
    });
    for (auto& row : out.rows) {
        if (!row.ok()) continue;
        double ff = out.fleet_floor[row.clearing], ef = out.equipment_floor[row.clearing];
        row.fleet_at_floor = !std::isnan(ff) && at_floor(row.fleet, ff);
        row.equipment_at_floor = !std::isnan(ef) && at_floor(row.equipment, ef);
    }
    return out;
}

std::string sweep_csv(const SweepResult& r) {
    CsvWriter csv({"clearing", "truck_scale", "mfg_scale", "tax_usd_per_tonne", "status", "energy_kwh",
                   "renewable_pct", "fleet_size", "fleet_at_floor", "equipment_units", "equipment_at_floor",
                   "warehouse_kg", "distance_km"});
    for (const auto& row : r.rows) {
        auto num = [&](double v) { return row.ok() ? format_number(v) : std::string(); };
        csv.row({std::string(to_string(row.clearing)), format_number(row.truck_scale), format_number(row.mfg_scale),
                 format_number(row.tax), row.status, num(row.energy_kwh), num(row.renewable_pct), num(row.fleet),
                 row.fleet_at_floor ? "1" : "0", num(row.equipment), row.equipment_at_floor ? "1" : "0",
                 num(row.warehouse_kg), row.distance_km ? format_number(*row.distance_km) : ""});
    }
    return csv.str();
}

std::string sweep_json(const SweepResult& r, int indent) {
    nlohmann::ordered_json j;
    auto floors = nlohmann::ordered_json::object();
    for (const auto& [c, v] : r.fleet_floor)
        floors[std::string(to_string(c))] = {
            {"fleet", std::isnan(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v)},
            {"equipment", std::isnan(r.equipment_floor.at(c)) ? nlohmann::ordered_json(nullptr)
                                                               : nlohmann::ordered_json(r.equipment_floor.at(c))}};
    j["floors"] = floors;
    j["cells"] = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
        nlohmann::ordered_json cell;
        cell["clearing"] = std::string(to_string(row.clearing));
        cell["truck_scale"] = row.truck_scale;
        cell["mfg_scale"] = row.mfg_scale;
        cell["tax_usd_per_tonne"] = row.tax;
        cell["status"] = row.status;
        if (row.ok()) {
            cell["objective_usd"] = row.objective;
            cell["fleet_at_floor"] = row.fleet_at_floor;
            cell["equipment_at_floor"] = row.equipment_at_floor;
            cell["kpi"] = nlohmann::ordered_json::parse(kpi_json(*row.kpi, -1));
        }
        j["cells"].push_back(cell);
    }
    return j.dump(indent);
}

std::string sweep_table(const SweepResult& r) {
    std::string out = fmt::format("{:<9} {:>6} {:>6} {:>6} {:>12} {:>8} {:>11} {:>11} {:>14} {:>12}\n", "clearing",
                                  "truck", "mfg", "tax", "energy(GWh)", "ren%", "fleet", "equipment", "warehouse(t)",
                                  "dist(1e3km)");
    for (const auto& row : r.rows) {
        if (!row.ok()) {
            out += fmt::format("{:<9} {:>6} {:>6} {:>6} {}\n", to_string(row.clearing), row.truck_scale,
                               row.mfg_scale, row.tax, row.status);
            continue;
        }
        auto dagger = [](bool on) { return on ? "†" : " "; };
        out += fmt::format("{:<9} {:>6} {:>6} {:>6} {:>12.3f} {:>8.2f} {:>10.2f}{} {:>10.2f}{} {:>14.1f} {:>12}\n",
                           to_string(row.clearing), row.truck_scale, row.mfg_scale, row.tax, row.energy_kwh / 1e6,
                           row.renewable_pct, row.fleet, dagger(row.fleet_at_floor), row.equipment,
                           dagger(row.equipment_at_floor), row.warehouse_kg / 1000.0,
                           row.distance_km ? fmt::format("{:.2f}", *row.distance_km / 1000.0) : "n/a");
    }
    out += "† at the minimum feasible value for that clearing rule\n";
    return out;
}

void save_sweep(const SweepResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text_file(dir / "sweep.csv", sweep_csv(r));
    write_text_file(dir / "sweep.json", sweep_json(r) + "\n");
    write_text_file(dir / "sweep.txt", sweep_table(r));
}

}  // namespace escflex
