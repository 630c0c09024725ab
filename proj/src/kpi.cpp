#include "escflex/kpi.hpp"

#include "escflex/csv.hpp"

#include <fmt/core.h>
#include <json.hpp>

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace escflex {

namespace {

double pct(double num, double den) { return den > 0.0 ? std::clamp(100.0 * num / den, 0.0, 100.0) : 0.0; }

std::vector<double> system_draw(const PlanSolution& s) {
    const auto& p = s[VarKind::Power];
    std::vector<double> out(p.cols());
    for (std::size_t t = 0; t < p.cols(); ++t) out[t] = p.column_sum(t);
    return out;
}

}  // namespace

RenewableFractions renewable_fractions(const PlanSolution& s, const Scenario& sc) {
    const double dt = sc.horizon.step_hours;
    auto draw = system_draw(s);
    double total = 0.0, green = 0.0, avail = 0.0;
    for (std::size_t t = 0; t < draw.size(); ++t) {
        double r = sc.renewable_total_kw(t);
        total += draw[t] * dt;
        green += std::min(draw[t], r) * dt;
        avail += r * dt;
    }
    return {pct(green, total), pct(green, avail)};
}

std::vector<double> manufacturing_energy_series(const PlanSolution& s, const Scenario& sc) {
    const auto n = sc.horizon.n_steps;
    const double dt = sc.horizon.step_hours;
    const auto sites = sc.process_sites();
    const auto& m = s[VarKind::ProcessStart];
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k < sites.size(); ++k) {
        const auto& proc = sc.processes[sites[k].process];
        for (std::size_t t = 0; t < n; ++t)
            for (std::size_t tau = 0; tau < proc.duration_steps; ++tau)
                out[t] += dt * proc.power_per_unit_kw * m(k, (t + n - tau % n) % n);
    }
    return out;
}

EnergyAttribution attribute_energy(const PlanSolution& s, const Scenario& sc) {
    const double dt = sc.horizon.step_hours;
    const auto n = sc.horizon.n_steps;
    auto draw = system_draw(s);
    auto mfg = manufacturing_energy_series(s, sc);

    // per-step source mix of what was bought
    std::vector<EnergySplit> mix(n);
    EnergySplit all;
    for (std::size_t t = 0; t < n; ++t) {
        double wind = 0.0, solar = 0.0;
        for (std::size_t i = 0; i < sc.locations.size(); ++i) {
            wind += sc.wind_kw(i, t);
            solar += sc.solar_kw(i, t);
        }
        double e = draw[t] * dt;
        double green = std::min(draw[t], wind + solar) * dt;
        EnergySplit step;
        step.non_renewable = e - green;
        if (green > 0.0) {
            step.wind = green * wind / (wind + solar);
            step.solar = green - step.wind;
        }
        mix[t] = step;
        all.non_renewable += step.non_renewable;
        all.wind += step.wind;
        all.solar += step.solar;
    }
    EnergyAttribution out;
    for (std::size_t t = 0; t < n; ++t) {
        const EnergySplit& basis = mix[t].total() > 0.0 ? mix[t] : all;
        double denom = basis.total();
        if (denom <= 0.0) continue;
        out.manufacturing.non_renewable += mfg[t] * basis.non_renewable / denom;
        out.manufacturing.wind += mfg[t] * basis.wind / denom;
        out.manufacturing.solar += mfg[t] * basis.solar / denom;
    }
    out.transport.non_renewable = all.non_renewable - out.manufacturing.non_renewable;
    out.transport.wind = all.wind - out.manufacturing.wind;
    out.transport.solar = all.solar - out.manufacturing.solar;
    return out;
}

std::vector<double> trucks_in_transit(const PlanSolution& s, const Scenario& sc) {
    const auto n = sc.horizon.n_steps;
    std::vector<double> out(n, 0.0);
    const auto& y = s[VarKind::LoadedDispatch];
    const auto& ye = s[VarKind::EmptyDispatch];
    for (std::size_t k = 0; k < sc.paths.size(); ++k)
        for (std::size_t t = 0; t < n; ++t)
            for (std::size_t tau = 0; tau < sc.paths[k].travel_steps; ++tau) {
                auto from = (t + n - tau % n) % n;
                out[t] += y(k, from) + ye(k, from);
            }
    return out;
}

Utilization utilization(const PlanSolution& s, const Scenario& sc) {
    constexpr double kTiny = 1e-9;
    const auto n = sc.horizon.n_steps;
    Utilization u;
    if (!sc.paths.empty()) {
        double fleet = s[VarKind::FleetSize](0, 0);
        if (fleet > kTiny) {
            auto moving = trucks_in_transit(s, sc);
            u.trucks_pct = pct(std::accumulate(moving.begin(), moving.end(), 0.0) / static_cast<double>(n), fleet);
        }
    }
    const auto& X = s[VarKind::Product];
    const auto& F = s[VarKind::Raw];
    const auto& W = s[VarKind::WarehouseCap];
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < sc.locations.size(); ++i) {
        if (W(i, 0) <= kTiny) continue;
        double used = 0.0;
        for (std::size_t t = 0; t < n; ++t) used += (X(i, t) + F(i, t)) / W(i, 0);
        sum += used / static_cast<double>(n);
        ++count;
    }
    u.warehouse_pct = count ? pct(sum, static_cast<double>(count)) : 0.0;

    const auto sites = sc.process_sites();
    const auto& m = s[VarKind::ProcessStart];
    const auto& M = s[VarKind::EquipCap];
    sum = 0.0;
    count = 0;
    for (std::size_t k = 0; k < sites.size(); ++k) {
        if (M(k, 0) <= kTiny) continue;
        const auto dur = sc.processes[sites[k].process].duration_steps;
        double used = 0.0;
        for (std::size_t t = 0; t < n; ++t)
            for (std::size_t tau = 0; tau < dur; ++tau) used += m(k, (t + n - tau % n) % n) / M(k, 0);
        sum += used / static_cast<double>(n);
        ++count;
    }
    u.equipment_pct = count ? pct(sum, static_cast<double>(count)) : 0.0;
    return u;
}

std::vector<double> cumulative_shift(const PlanSolution& a, const PlanSolution& b, double step_hours) {
    const auto& pa = a[VarKind::Power];
    const auto& pb = b[VarKind::Power];
    if (pa.rows() != pb.rows() || pa.cols() != pb.cols())
        throw std::invalid_argument("cumulative_shift: solutions have different shapes");
    auto da = system_draw(a), db = system_draw(b);
    std::vector<double> out(da.size());
    double run = 0.0;
    for (std::size_t t = 0; t < da.size(); ++t) {
        run += (da[t] - db[t]) * step_hours;
        out[t] = run;
    }
    return out;
}

double total_distance(const PlanSolution& s, const Scenario& sc, const std::map<std::string, double>& km) {
    const auto& y = s[VarKind::LoadedDispatch];
    const auto& ye = s[VarKind::EmptyDispatch];
    double total = 0.0;
    for (std::size_t k = 0; k < sc.paths.size(); ++k) {
        auto name = sc.path_name(k);
        auto it = km.find(name);
        if (it == km.end()) throw std::invalid_argument(fmt::format("no distance for path {}", name));
        total += it->second * (y.row_sum(k) + ye.row_sum(k));
    }
    return total;
}

double total_distance(const PlanSolution& s, const Scenario& sc) {
    std::map<std::string, double> km;
    for (std::size_t k = 0; k < sc.paths.size(); ++k)
        if (sc.paths[k].distance_km) km[sc.path_name(k)] = *sc.paths[k].distance_km;
    return total_distance(s, sc, km);
}

KpiReport make_kpi_report(const PlanSolution& s, const Scenario& sc) {
    KpiReport r;
    const double dt = sc.horizon.step_hours;
    r.renewables = renewable_fractions(s, sc);
    auto draw = system_draw(s);
    double run = 0.0;
    for (double v : draw) {
        run += v * dt;
        r.cumulative_energy_kwh.push_back(run);
    }
    r.energy_total_kwh = run;
    for (std::size_t t = 0; t < sc.horizon.n_steps; ++t) r.renewable_available_kwh += sc.renewable_total_kw(t) * dt;
    r.energy = attribute_energy(s, sc);
    r.utilization = utilization(s, sc);
    r.cost = s.breakdown;
    if (!sc.paths.empty()) r.fleet_size = s[VarKind::FleetSize](0, 0);
    r.warehouse_total_kg = s[VarKind::WarehouseCap].sum();
    r.equipment_total = s[VarKind::EquipCap].sum();
    bool have_km = std::all_of(sc.paths.begin(), sc.paths.end(), [](const Path& p) { return p.distance_km.has_value(); });
    if (have_km) r.total_distance_km = total_distance(s, sc);
    return r;
}

std::string kpi_json(const KpiReport& r, int indent) {
    auto split = [](const EnergySplit& e) {
        return nlohmann::ordered_json{
            {"non_renewable", e.non_renewable}, {"wind", e.wind}, {"solar", e.solar}, {"total", e.total()}};
    };
    nlohmann::ordered_json j;
    j["renewable_pct_of_demand"] = r.renewables.pct_of_demand;
    j["renewable_pct_of_available"] = r.renewables.pct_of_available;
    j["energy_total_kwh"] = r.energy_total_kwh;
    j["renewable_available_kwh"] = r.renewable_available_kwh;
    j["energy_kwh"] = {{"manufacturing", split(r.energy.manufacturing)}, {"transport", split(r.energy.transport)}};
    j["utilization_pct"] = {{"trucks", r.utilization.trucks_pct},
                            {"warehouse", r.utilization.warehouse_pct},
                            {"equipment", r.utilization.equipment_pct}};
    j["capex_usd"] = {{"trucks", r.cost.capex_truck},
                      {"warehouse", r.cost.capex_warehouse},
                      {"equipment", r.cost.capex_equipment}};
    j["opex_usd"] = {{"nonrenewable_penalty", r.cost.opex_nonrenewable_penalty},
                     {"base_energy", r.cost.opex_base_energy}};
    j["fleet_size"] = r.fleet_size;
    j["warehouse_total_kg"] = r.warehouse_total_kg;
    j["equipment_total_units"] = r.equipment_total;
    j["total_distance_km"] = r.total_distance_km ? nlohmann::ordered_json(*r.total_distance_km) : nullptr;
    return j.dump(indent);
}

std::string kpi_table(const std::vector<std::pair<std::string, KpiReport>>& reports) {
    std::string out = fmt::format("{:<16} {:>12} {:>10} {:>10} {:>10} {:>14}\n", "Scenario", "Energy(GWh)",
                                  "Ren%Dem", "Ren%Avail", "Fleet", "Dist(1e3 km)");
    for (const auto& [label, r] : reports) {
        std::string dist = r.total_distance_km ? fmt::format("{:.2f}", *r.total_distance_km / 1000.0) : "n/a";
        out += fmt::format("{:<16} {:>12.3f} {:>10.2f} {:>10.2f} {:>10.2f} {:>14}\n", label,
                           r.energy_total_kwh / 1e6, r.renewables.pct_of_demand, r.renewables.pct_of_available,
                           r.fleet_size, dist);
    }
    return out;
}

void save_kpi(const KpiReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text_file(dir / "kpi.json", kpi_json(r) + "\n");
    CsvWriter csv({"step", "kwh"});
    for (std::size_t t = 0; t < r.cumulative_energy_kwh.size(); ++t)
        csv.row({std::to_string(t), format_number(r.cumulative_energy_kwh[t])});
    csv.save(dir / "cumulative_energy.csv");
}

}  // namespace escflex
