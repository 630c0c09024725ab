#include "escflex/scenario.hpp"

#include "escflex/csv.hpp"
#include "escflex/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/core.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace escflex {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

std::string_view to_string(DemandClearing clearing) {
    switch (clearing) {
        case DemandClearing::PerStep: return "per-step";
        case DemandClearing::Weekly: return "weekly";
        case DemandClearing::Monthly: return "monthly";
    }
    return "weekly";
}

DemandClearing parse_clearing(std::string_view text) {
    if (text == "per-step" || text == "per_step" || text == "step") return DemandClearing::PerStep;
    if (text == "weekly") return DemandClearing::Weekly;
    if (text == "monthly") return DemandClearing::Monthly;
    throw ScenarioError("params.toml", 0, "clearing",
                        fmt::format("unknown demand clearing '{}' (per-step|weekly|monthly)", text));
}

std::size_t Horizon::steps_per_week() const {
    auto steps = static_cast<std::size_t>(std::floor(kHoursPerWeek / step_hours + 1e-9));
    return std::max<std::size_t>(steps, 1);
}

// ---------------------------------------------------------------------------
// Calculators

double carbon_tax_to_penalty(double tax_per_tonne, double emission_factor_kg_per_kwh) {
    if (tax_per_tonne < 0.0) throw std::invalid_argument("carbon tax must be >= 0");
    if (emission_factor_kg_per_kwh < 0.0) throw std::invalid_argument("emission factor must be >= 0");
    return tax_per_tonne * emission_factor_kg_per_kwh / 1000.0;
}

double levelize(double capital, double lifetime_years) {
    if (capital < 0.0) throw std::invalid_argument("capital cost must be >= 0");
    if (!(lifetime_years > 0.0)) throw std::invalid_argument("lifetime must be > 0");
    return capital / (lifetime_years * kHoursPerYear);
}

double battery_cost_over_horizon(double capital_per_kwh, double lifetime_years, double horizon_hours) {
    return levelize(capital_per_kwh, lifetime_years) * horizon_hours;
}

CementEnergy cement_process_params(double kiln_rate_kg_h, double specific_heat_kj_kg_c, double delta_t_c) {
    if (!(kiln_rate_kg_h > 0.0) || !(specific_heat_kj_kg_c > 0.0) || !(delta_t_c > 0.0))
        throw std::invalid_argument("kiln rate, specific heat and temperature change must be > 0");
    double kj = kiln_rate_kg_h * specific_heat_kj_kg_c * delta_t_c;
    return {kj / 3600.0, kiln_rate_kg_h, kiln_rate_kg_h};
}

double warehouse_cost_per_kg_hour(double area_m2, double height_m, double density_kg_m3,
                                  double construction_cost, double lifetime_years) {
    if (!(area_m2 > 0.0) || !(height_m > 0.0) || !(density_kg_m3 > 0.0) || !(construction_cost > 0.0) ||
        !(lifetime_years > 0.0))
        throw std::invalid_argument("warehouse parameters must all be > 0");
    double capacity_kg = area_m2 * height_m * density_kg_m3;
    return construction_cost / (capacity_kg * lifetime_years * kHoursPerYear);
}

// ---------------------------------------------------------------------------
// Scenario accessors

std::size_t Scenario::location_index(std::string_view id) const {
    for (std::size_t i = 0; i < locations.size(); ++i)
        if (locations[i].id == id) return i;
    throw ScenarioError("", 0, "location", fmt::format("unknown location '{}'", id));
}

std::vector<ProcessSite> Scenario::process_sites() const {
    std::vector<ProcessSite> out;
    for (std::size_t s = 0; s < processes.size(); ++s)
        for (auto loc : processes[s].sites) out.push_back({s, loc});
    return out;
}

std::string Scenario::path_name(std::size_t path) const {
    const auto& p = paths[path];
    return locations[p.origin].id + ">" + locations[p.dest].id;
}

std::string Scenario::process_site_name(const ProcessSite& unit) const {
    return processes[unit.process].id + "@" + locations[unit.location].id;
}

double Scenario::wind_kw(std::size_t loc, std::size_t step) const {
    return exogenous.wind_cf(loc, step) * locations[loc].wind_mw * 1000.0;
}

double Scenario::solar_kw(std::size_t loc, std::size_t step) const {
    return exogenous.solar_cf(loc, step) * locations[loc].solar_mw * 1000.0;
}

double Scenario::renewable_kw(std::size_t loc, std::size_t step) const {
    return wind_kw(loc, step) + solar_kw(loc, step);
}

double Scenario::renewable_total_kw(std::size_t step) const {
    double total = 0.0;
    for (std::size_t i = 0; i < locations.size(); ++i) total += renewable_kw(i, step);
    return total;
}

Grid Scenario::product_injection() const {
    const auto n = horizon.n_steps;
    Grid q(locations.size(), n);
    std::size_t window = n;
    if (clearing == DemandClearing::PerStep) window = 1;
    if (clearing == DemandClearing::Weekly) window = horizon.steps_per_week();
    for (std::size_t i = 0; i < locations.size(); ++i) {
        double pending = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            double v = exogenous.product_kg(i, t);
            if (v > 0.0)
                q(i, t) += v;
            else
                pending += v;
            bool deadline = (t + 1) % window == 0 || t + 1 == n;
            if (deadline) {
                q(i, t) += pending;
                pending = 0.0;
            }
        }
    }
    return q;
}

namespace {

void require(bool ok, const std::string& file, std::size_t line, const std::string& field,
             const std::string& what) {
    if (!ok) throw ScenarioError(file, line, field, what);
}

void check_grid(const Grid& g, std::size_t rows, std::size_t cols, const char* name) {
    require(g.rows() == rows && g.cols() == cols, "", 0, name,
            fmt::format("series must cover {} locations x {} steps", rows, cols));
}

}  // namespace

void Scenario::validate() const {
    require(horizon.n_steps >= 1, "params.toml", 0, "n_steps", "horizon needs at least one step");
    require(horizon.step_hours > 0.0, "params.toml", 0, "step_hours", "step size must be > 0");
    require(!locations.empty(), "locations.csv", 0, "", "no locations");

    std::set<std::string> ids;
    for (const auto& loc : locations) {
        require(ids.insert(loc.id).second, "locations.csv", 0, "id", fmt::format("duplicate id '{}'", loc.id));
        require(loc.wind_mw >= 0.0 && loc.solar_mw >= 0.0, "locations.csv", 0, "wind_mw",
                fmt::format("negative nameplate at '{}'", loc.id));
    }

    const auto& t = truck;
    require(t.battery_kwh > 0, "params.toml", 0, "truck.battery_kwh", "must be > 0");
    require(t.load_kg > 0, "params.toml", 0, "truck.load_kg", "must be > 0");
    require(t.empty_weight_kg > 0, "params.toml", 0, "truck.empty_weight_kg", "must be > 0");
    require(t.full_charge_hours > 0, "params.toml", 0, "truck.full_charge_hours", "must be > 0");
    require(t.unit_cost > 0, "params.toml", 0, "truck.unit_cost", "must be > 0");
    require(t.lifetime_years > 0, "params.toml", 0, "truck.lifetime_years", "must be > 0");

    std::set<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t k = 0; k < paths.size(); ++k) {
        const auto& p = paths[k];
        auto row = fmt::format("path {}", k);
        require(p.origin < locations.size() && p.dest < locations.size(), "paths.csv", 0, "origin",
                row + ": unknown location");
        require(p.origin != p.dest, "paths.csv", 0, "dest", row + ": origin equals destination");
        require(p.travel_steps >= 1, "paths.csv", 0, "travel_steps", row + ": must be >= 1");
        require(p.energy_kwh > 0.0, "paths.csv", 0, "energy_kwh", row + ": must be > 0");
        require(p.energy_kwh <= t.battery_kwh, "paths.csv", 0, "energy_kwh",
                row + ": path unreachable on one charge (energy exceeds truck battery)");
        require(!p.distance_km || *p.distance_km >= 0.0, "paths.csv", 0, "distance_km", row + ": must be >= 0");
        require(pairs.insert({p.origin, p.dest}).second, "paths.csv", 0, "dest", row + ": duplicate path");
    }

    std::set<std::string> pids;
    for (const auto& s : processes) {
        auto f = [&](const char* field) { return fmt::format("process.{}.{}", s.id, field); };
        require(pids.insert(s.id).second, "params.toml", 0, f("id"), "duplicate process id");
        require(s.duration_steps >= 1, "params.toml", 0, f("duration_steps"), "must be >= 1");
        require(s.power_per_unit_kw > 0, "params.toml", 0, f("power_per_unit_kw"), "must be > 0");
        require(s.output_per_unit_kg > 0, "params.toml", 0, f("output_per_unit_kg"), "must be > 0");
        require(s.raw_per_unit_kg > 0, "params.toml", 0, f("raw_per_unit_kg"), "must be > 0");
        require(s.equip_unit_cost >= 0, "params.toml", 0, f("equip_unit_cost"), "must be >= 0");
        require(s.equip_lifetime_years > 0, "params.toml", 0, f("equip_lifetime_years"), "must be > 0");
        require(!s.sites.empty(), "params.toml", 0, f("sites"), "process needs at least one site");
        std::set<std::size_t> seen;
        for (auto loc : s.sites) {
            require(loc < locations.size(), "params.toml", 0, f("sites"), "unknown site");
            require(seen.insert(loc).second, "params.toml", 0, f("sites"), "duplicate site");
        }
    }

    const auto& c = costs;
    require(c.k_truck >= 0, "params.toml", 0, "costs.k_truck", "must be >= 0");
    require(c.k_store.size() == locations.size(), "params.toml", 0, "costs.k_store", "one rate per location");
    for (double v : c.k_store) require(v >= 0, "params.toml", 0, "costs.k_store", "must be >= 0");
    require(c.k_equip.size() == processes.size(), "params.toml", 0, "costs.k_equip", "one rate per process");
    for (double v : c.k_equip) require(v >= 0, "params.toml", 0, "costs.k_equip", "must be >= 0");
    require(c.k_power >= 0, "params.toml", 0, "costs.k_power", "must be >= 0");
    require(c.epsilon >= 0, "params.toml", 0, "costs.epsilon", "must be >= 0");
    require(c.k_batt >= 0, "params.toml", 0, "costs.k_batt", "must be >= 0");
    require(c.emission_factor >= 0, "params.toml", 0, "costs.emission_factor", "must be >= 0");

    const auto nl = locations.size();
    const auto nt = horizon.n_steps;
    check_grid(exogenous.product_kg, nl, nt, "demand");
    check_grid(exogenous.raw_kg, nl, nt, "raw_arrivals");
    check_grid(exogenous.wind_cf, nl, nt, "wind_cf");
    check_grid(exogenous.solar_cf, nl, nt, "solar_cf");
    for (std::size_t i = 0; i < nl; ++i) {
        for (std::size_t k = 0; k < nt; ++k) {
            auto at = fmt::format("location {} step {}", locations[i].id, k);
            require(std::isfinite(exogenous.product_kg(i, k)), "demand.csv", 0, "kg_signed", at + ": not finite");
            require(exogenous.raw_kg(i, k) >= 0.0, "raw_arrivals.csv", 0, "kg", at + ": must be >= 0");
            double w = exogenous.wind_cf(i, k), s = exogenous.solar_cf(i, k);
            require(w >= 0.0 && w <= 1.0, "capacity_factors.csv", 0, "wind_cf", at + ": must be in [0, 1]");
            require(s >= 0.0 && s <= 1.0, "capacity_factors.csv", 0, "solar_cf", at + ": must be in [0, 1]");
        }
    }
}

// ---------------------------------------------------------------------------
// Loading

namespace {

double parse_double(const std::string& text, const std::string& field) {
    std::string s = text;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ScenarioError("params.toml", 0, field, fmt::format("not a number: '{}'", text));
    return v;
}

std::string unquote(std::string s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

class Params {
public:
    explicit Params(const fs::path& file) {
        if (!fs::exists(file)) throw ScenarioError("params.toml", 0, "", "missing file");
        try {
            pt::read_ini(file.string(), tree_);
        } catch (const pt::ini_parser_error& e) {
            throw ScenarioError("params.toml", e.line(), "", e.message());
        }
    }

    const pt::ptree& tree() const { return tree_; }

    const pt::ptree& section(const std::string& name) const {
        auto it = tree_.find(name);
        if (it == tree_.not_found()) throw ScenarioError("params.toml", 0, name, "schema mismatch: missing section");
        return it->second;
    }

    static std::optional<std::string> text(const pt::ptree& sec, const std::string& key) {
        auto it = sec.find(key);
        if (it == sec.not_found()) return std::nullopt;
        return unquote(it->second.data());
    }

    static double number(const pt::ptree& sec, const std::string& sec_name, const std::string& key) {
        auto v = text(sec, key);
        if (!v) throw ScenarioError("params.toml", 0, sec_name + "." + key, "schema mismatch: missing key");
        return parse_double(*v, sec_name + "." + key);
    }

    static std::optional<double> maybe(const pt::ptree& sec, const std::string& sec_name, const std::string& key) {
        auto v = text(sec, key);
        if (!v) return std::nullopt;
        return parse_double(*v, sec_name + "." + key);
    }

private:
    pt::ptree tree_;
};

std::size_t lookup(const std::map<std::string, std::size_t>& index, const CsvTable& t, std::size_t row,
                   std::size_t col) {
    auto it = index.find(t.cell(row, col));
    if (it == index.end())
        throw ScenarioError(t.source(), t.line(row), t.header()[col],
                            fmt::format("unknown location '{}'", t.cell(row, col)));
    return it->second;
}

std::size_t step_of(const CsvTable& t, std::size_t row, std::size_t col, std::size_t n_steps) {
    auto v = t.integer(row, col);
    if (v < 0 || static_cast<std::size_t>(v) >= n_steps)
        throw ScenarioError(t.source(), t.line(row), t.header()[col],
                            fmt::format("step {} outside horizon [0, {})", v, n_steps));
    return static_cast<std::size_t>(v);
}

void load_sparse_series(const fs::path& file, const char* value_col, bool non_negative,
                        const std::map<std::string, std::size_t>& index, Grid& grid) {
    if (!fs::exists(file)) throw ScenarioError(file.filename().string(), 0, "", "missing file");
    auto t = CsvTable::read(file);
    auto c_loc = t.column("location"), c_step = t.column("step"), c_val = t.column(value_col);
    Grid seen(grid.rows(), grid.cols());
    for (std::size_t r = 0; r < t.size(); ++r) {
        auto i = lookup(index, t, r, c_loc);
        auto k = step_of(t, r, c_step, grid.cols());
        double v = t.number(r, c_val);
        if (non_negative && v < 0.0)
            throw ScenarioError(t.source(), t.line(r), value_col, "must be >= 0");
        if (!std::isfinite(v)) throw ScenarioError(t.source(), t.line(r), value_col, "not finite");
        if (seen(i, k) != 0.0) throw ScenarioError(t.source(), t.line(r), "step", "duplicate (location, step)");
        seen(i, k) = 1.0;
        grid(i, k) = v;
    }
}

}  // namespace

Scenario load_scenario(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ScenarioError(dir.string(), 0, "", "scenario directory not found");
    Scenario sc;
    Params params(dir / "params.toml");

    const auto& hz = params.section("horizon");
    double n_steps = Params::number(hz, "horizon", "n_steps");
    if (n_steps < 1 || n_steps != std::floor(n_steps))
        throw ScenarioError("params.toml", 0, "horizon.n_steps", "must be a positive integer");
    sc.horizon.n_steps = static_cast<std::size_t>(n_steps);
    sc.horizon.step_hours = Params::number(hz, "horizon", "step_hours");
    if (!(sc.horizon.step_hours > 0)) throw ScenarioError("params.toml", 0, "horizon.step_hours", "must be > 0");
    if (auto cl = Params::text(hz, "demand_clearing")) sc.clearing = parse_clearing(*cl);

    // locations.csv
    {
        auto t = CsvTable::read(dir / "locations.csv");
        auto c_id = t.column("id"), c_name = t.column("name"), c_w = t.column("wind_mw"), c_s = t.column("solar_mw");
        for (std::size_t r = 0; r < t.size(); ++r) {
            Location loc;
            loc.id = t.cell(r, c_id);
            loc.name = t.cell(r, c_name);
            if (loc.id.empty()) throw ScenarioError(t.source(), t.line(r), "id", "empty id");
            double w = t.number(r, c_w), s = t.number(r, c_s);
            if (w < 0) throw ScenarioError(t.source(), t.line(r), "wind_mw", "nameplate must be >= 0");
            if (s < 0) throw ScenarioError(t.source(), t.line(r), "solar_mw", "nameplate must be >= 0");
            loc.wind_mw = w;
            loc.solar_mw = s;
            sc.locations.push_back(std::move(loc));
        }
    }
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < sc.locations.size(); ++i) {
        if (!index.emplace(sc.locations[i].id, i).second)
            throw ScenarioError("locations.csv", 0, "id", fmt::format("duplicate id '{}'", sc.locations[i].id));
    }
    const auto nl = sc.locations.size();
    const auto nt = sc.horizon.n_steps;

    const auto& tr = params.section("truck");
    sc.truck.battery_kwh = Params::number(tr, "truck", "battery_kwh");
    sc.truck.load_kg = Params::number(tr, "truck", "load_kg");
    sc.truck.empty_weight_kg = Params::number(tr, "truck", "empty_weight_kg");
    sc.truck.full_charge_hours = Params::number(tr, "truck", "full_charge_hours");
    sc.truck.unit_cost = Params::number(tr, "truck", "unit_cost");
    sc.truck.lifetime_years = Params::number(tr, "truck", "lifetime_years");
    if (auto v = Params::text(tr, "charge_before_departure")) {
        if (*v == "true") sc.truck.charge_before_departure = true;
        else if (*v == "false") sc.truck.charge_before_departure = false;
        else throw ScenarioError("params.toml", 0, "truck.charge_before_departure", "expected true or false");
    }

    // paths.csv
    {
        auto t = CsvTable::read(dir / "paths.csv");
        auto c_o = t.column("origin"), c_d = t.column("dest"), c_tau = t.column("travel_steps"),
             c_e = t.column("energy_kwh");
        std::optional<std::size_t> c_km;
        if (t.has_column("distance_km")) c_km = t.column("distance_km");
        for (std::size_t r = 0; r < t.size(); ++r) {
            Path p;
            p.origin = lookup(index, t, r, c_o);
            p.dest = lookup(index, t, r, c_d);
            auto tau = t.integer(r, c_tau);
            if (tau < 1) throw ScenarioError(t.source(), t.line(r), "travel_steps", "must be >= 1");
            p.travel_steps = static_cast<std::size_t>(tau);
            p.energy_kwh = t.number(r, c_e);
            if (p.origin == p.dest) throw ScenarioError(t.source(), t.line(r), "dest", "origin equals destination");
            if (!(p.energy_kwh > 0)) throw ScenarioError(t.source(), t.line(r), "energy_kwh", "must be > 0");
            if (p.energy_kwh > sc.truck.battery_kwh)
                throw ScenarioError(t.source(), t.line(r), "energy_kwh",
                                    fmt::format("path unreachable on one charge ({} kWh > battery {} kWh)",
                                                p.energy_kwh, sc.truck.battery_kwh));
            if (c_km) {
                double km = t.number(r, *c_km);
                if (km < 0) throw ScenarioError(t.source(), t.line(r), "distance_km", "must be >= 0");
                p.distance_km = km;
            }
            sc.paths.push_back(p);
        }
    }

    // processes: every section named process.<id>
    for (const auto& [name, sec] : params.tree()) {
        if (name.rfind("process.", 0) != 0) continue;
        ProcessSpec s;
        s.id = name.substr(8);
        auto sites = Params::text(sec, "sites");
        if (!sites) throw ScenarioError("params.toml", 0, name + ".sites", "schema mismatch: missing key");
        std::stringstream ss(*sites);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item.erase(0, item.find_first_not_of(' '));
            item.erase(item.find_last_not_of(' ') + 1);
            auto it = index.find(item);
            if (it == index.end())
                throw ScenarioError("params.toml", 0, name + ".sites", fmt::format("unknown location '{}'", item));
            s.sites.push_back(it->second);
        }
        double dur = Params::number(sec, name, "duration_steps");
        if (dur < 1 || dur != std::floor(dur))
            throw ScenarioError("params.toml", 0, name + ".duration_steps", "must be a positive integer");
        s.duration_steps = static_cast<std::size_t>(dur);
        s.power_per_unit_kw = Params::number(sec, name, "power_per_unit_kw");
        s.output_per_unit_kg = Params::number(sec, name, "output_per_unit_kg");
        s.raw_per_unit_kg = Params::number(sec, name, "raw_per_unit_kg");
        s.equip_unit_cost = Params::number(sec, name, "equip_unit_cost");
        s.equip_lifetime_years = Params::number(sec, name, "equip_lifetime_years");
        if (!(s.equip_lifetime_years > 0))
            throw ScenarioError("params.toml", 0, name + ".equip_lifetime_years", "must be > 0");
        sc.costs.k_equip.push_back(
            Params::maybe(sec, name, "k_equip").value_or(levelize(s.equip_unit_cost, s.equip_lifetime_years)));
        sc.processes.push_back(std::move(s));
    }

    const auto& co = params.section("costs");
    if (!(sc.truck.lifetime_years > 0))
        throw ScenarioError("params.toml", 0, "truck.lifetime_years", "must be > 0");
    sc.costs.k_truck = Params::maybe(co, "costs", "k_truck").value_or(levelize(sc.truck.unit_cost, sc.truck.lifetime_years));
    sc.costs.emission_factor = Params::maybe(co, "costs", "emission_factor").value_or(kDefaultEmissionFactor);
    sc.costs.epsilon = Params::maybe(co, "costs", "epsilon").value_or(kDefaultEpsilon);
    if (auto kp = Params::maybe(co, "costs", "k_power"))
        sc.costs.k_power = *kp;
    else if (auto tax = Params::maybe(co, "costs", "carbon_tax"))
        sc.costs.k_power = carbon_tax_to_penalty(*tax, sc.costs.emission_factor);
    if (auto kb = Params::maybe(co, "costs", "k_batt")) {
        sc.costs.k_batt = *kb;
    } else {
        double capital = Params::maybe(co, "costs", "battery_cost_per_kwh").value_or(400.0);
        double life = Params::maybe(co, "costs", "battery_lifetime_years").value_or(5.0);
        sc.costs.k_batt = battery_cost_over_horizon(capital, life, sc.horizon.hours());
    }
    double store_default = 0.0;
    if (auto ks = Params::maybe(co, "costs", "k_store")) {
        store_default = *ks;
    } else if (auto wh = params.tree().find("warehouse"); wh != params.tree().not_found()) {
        const auto& w = wh->second;
        store_default = warehouse_cost_per_kg_hour(
            Params::number(w, "warehouse", "area_m2"), Params::number(w, "warehouse", "height_m"),
            Params::number(w, "warehouse", "density_kg_m3"), Params::number(w, "warehouse", "construction_cost"),
            Params::number(w, "warehouse", "lifetime_years"));
    } else {
        throw ScenarioError("params.toml", 0, "costs.k_store", "schema mismatch: need costs.k_store or [warehouse]");
    }
    sc.costs.k_store.assign(nl, store_default);
    if (auto st = params.tree().find("storage"); st != params.tree().not_found()) {
        for (const auto& [loc, value] : st->second) {
            auto it = index.find(loc);
            if (it == index.end())
                throw ScenarioError("params.toml", 0, "storage." + loc, "unknown location");
            sc.costs.k_store[it->second] = parse_double(unquote(value.data()), "storage." + loc);
        }
    }

    // capacity_factors.csv must cover every (location, step)
    sc.exogenous.wind_cf = Grid(nl, nt);
    sc.exogenous.solar_cf = Grid(nl, nt);
    {
        auto t = CsvTable::read(dir / "capacity_factors.csv");
        auto c_step = t.column("step"), c_loc = t.column("location"), c_w = t.column("wind_cf"),
             c_s = t.column("solar_cf");
        Grid seen(nl, nt);
        for (std::size_t r = 0; r < t.size(); ++r) {
            auto k = step_of(t, r, c_step, nt);
            auto i = lookup(index, t, r, c_loc);
            double w = t.number(r, c_w), s = t.number(r, c_s);
            if (!(w >= 0.0 && w <= 1.0))
                throw ScenarioError(t.source(), t.line(r), "wind_cf",
                                    fmt::format("capacity factor {} outside [0, 1]", w));
            if (!(s >= 0.0 && s <= 1.0))
                throw ScenarioError(t.source(), t.line(r), "solar_cf",
                                    fmt::format("capacity factor {} outside [0, 1]", s));
            if (seen(i, k) != 0.0) throw ScenarioError(t.source(), t.line(r), "step", "duplicate (location, step)");
            seen(i, k) = 1.0;
            sc.exogenous.wind_cf(i, k) = w;
            sc.exogenous.solar_cf(i, k) = s;
        }
        for (std::size_t i = 0; i < nl; ++i)
            for (std::size_t k = 0; k < nt; ++k)
                if (seen(i, k) == 0.0)
                    throw ScenarioError(t.source(), 0, "step",
                                        fmt::format("missing capacity factors for {} step {}", sc.locations[i].id, k));
    }

    sc.exogenous.product_kg = Grid(nl, nt);
    sc.exogenous.raw_kg = Grid(nl, nt);
    load_sparse_series(dir / "demand.csv", "kg_signed", false, index, sc.exogenous.product_kg);
    load_sparse_series(dir / "raw_arrivals.csv", "kg", true, index, sc.exogenous.raw_kg);

    sc.validate();
    return sc;
}

// ---------------------------------------------------------------------------
// Saving

void save_scenario(const Scenario& sc, const fs::path& dir) {
    sc.validate();
    fs::create_directories(dir);
    const auto nl = sc.locations.size();
    const auto nt = sc.horizon.n_steps;

    {
        CsvWriter w({"id", "name", "wind_mw", "solar_mw"});
        for (const auto& loc : sc.locations)
            w.row({loc.id, loc.name, format_number(loc.wind_mw), format_number(loc.solar_mw)});
        w.save(dir / "locations.csv");
    }
    {
        bool km = !sc.paths.empty() && std::all_of(sc.paths.begin(), sc.paths.end(),
                                                   [](const Path& p) { return p.distance_km.has_value(); });
        std::vector<std::string> header{"origin", "dest", "travel_steps", "energy_kwh"};
        if (km) header.push_back("distance_km");
        CsvWriter w(header);
        for (const auto& p : sc.paths) {
            std::vector<std::string> row{sc.locations[p.origin].id, sc.locations[p.dest].id,
                                         std::to_string(p.travel_steps), format_number(p.energy_kwh)};
            if (km) row.push_back(format_number(*p.distance_km));
            w.row(row);
        }
        w.save(dir / "paths.csv");
    }
    {
        CsvWriter w({"step", "location", "wind_cf", "solar_cf"});
        for (std::size_t k = 0; k < nt; ++k)
            for (std::size_t i = 0; i < nl; ++i)
                w.row({std::to_string(k), sc.locations[i].id, format_number(sc.exogenous.wind_cf(i, k)),
                       format_number(sc.exogenous.solar_cf(i, k))});
        w.save(dir / "capacity_factors.csv");
    }
    auto sparse = [&](const Grid& g, const char* value_col, const fs::path& file) {
        CsvWriter w({"location", "step", value_col});
        for (std::size_t i = 0; i < nl; ++i)
            for (std::size_t k = 0; k < nt; ++k)
                if (g(i, k) != 0.0) w.row({sc.locations[i].id, std::to_string(k), format_number(g(i, k))});
        w.save(file);
    };
    sparse(sc.exogenous.product_kg, "kg_signed", dir / "demand.csv");
    sparse(sc.exogenous.raw_kg, "kg", dir / "raw_arrivals.csv");

    std::string p;
    auto kv = [&](const std::string& k, const std::string& v) { p += k + " = " + v + "\n"; };
    auto num = [&](const std::string& k, double v) { kv(k, format_number(v)); };
    p += "[horizon]\n";
    kv("n_steps", std::to_string(nt));
    num("step_hours", sc.horizon.step_hours);
    kv("demand_clearing", fmt::format("\"{}\"", to_string(sc.clearing)));
    p += "\n[truck]\n";
    num("battery_kwh", sc.truck.battery_kwh);
    num("load_kg", sc.truck.load_kg);
    num("empty_weight_kg", sc.truck.empty_weight_kg);
    num("full_charge_hours", sc.truck.full_charge_hours);
    num("unit_cost", sc.truck.unit_cost);
    num("lifetime_years", sc.truck.lifetime_years);
    kv("charge_before_departure", sc.truck.charge_before_departure ? "true" : "false");
    p += "\n[costs]\n";
    num("k_truck", sc.costs.k_truck);
    num("k_store", sc.costs.k_store.empty() ? 0.0 : sc.costs.k_store.front());
    num("k_power", sc.costs.k_power);
    num("epsilon", sc.costs.epsilon);
    num("k_batt", sc.costs.k_batt);
    num("emission_factor", sc.costs.emission_factor);
    p += "\n[storage]\n";
    for (std::size_t i = 0; i < nl; ++i) num(sc.locations[i].id, sc.costs.k_store[i]);
    for (std::size_t s = 0; s < sc.processes.size(); ++s) {
        const auto& pr = sc.processes[s];
        p += fmt::format("\n[process.{}]\n", pr.id);
        std::string sites;
        for (auto loc : pr.sites) sites += (sites.empty() ? "" : ",") + sc.locations[loc].id;
        kv("sites", fmt::format("\"{}\"", sites));
        kv("duration_steps", std::to_string(pr.duration_steps));
        num("power_per_unit_kw", pr.power_per_unit_kw);
        num("output_per_unit_kg", pr.output_per_unit_kg);
        num("raw_per_unit_kg", pr.raw_per_unit_kg);
        num("equip_unit_cost", pr.equip_unit_cost);
        num("equip_lifetime_years", pr.equip_lifetime_years);
        num("k_equip", sc.costs.k_equip[s]);
    }
    write_text_file(dir / "params.toml", p);
}

}  // namespace escflex
