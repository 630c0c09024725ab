#include "escflex/model.hpp"

#include "escflex/errors.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace escflex {

namespace {

constexpr std::array<std::string_view, kNumVarKinds> kSymbols = {"C", "Y", "X",       "F", "p",    "z",
                                                                 "y", "y_empty", "m", "Yhat", "W", "M"};

}  // namespace

std::string_view symbol(VarKind kind) { return kSymbols[static_cast<std::size_t>(kind)]; }

VarKind parse_var_kind(std::string_view text) {
    for (auto k : kAllVarKinds)
        if (symbol(k) == text) return k;
    throw std::invalid_argument(fmt::format("unknown variable kind '{}'", text));
}

bool is_timed(VarKind kind) {
    return kind != VarKind::FleetSize && kind != VarKind::WarehouseCap && kind != VarKind::EquipCap;
}

VariableSpace::VariableSpace(const Scenario& sc) : n_steps_(sc.horizon.n_steps) {
    const auto n_loc = sc.locations.size();
    const auto n_sites = sc.process_sites().size();
    const bool trucks = !sc.paths.empty();
    auto set = [&](VarKind k, std::size_t count) { entities_[index(k)] = count; };
    set(VarKind::Charge, n_loc);
    set(VarKind::StationaryTrucks, trucks ? n_loc : 0);
    set(VarKind::Product, n_loc);
    set(VarKind::Raw, n_loc);
    set(VarKind::Power, n_loc);
    set(VarKind::NonRenewable, 1);
    set(VarKind::LoadedDispatch, sc.paths.size());
    set(VarKind::EmptyDispatch, sc.paths.size());
    set(VarKind::ProcessStart, n_sites);
    set(VarKind::FleetSize, trucks ? 1 : 0);
    set(VarKind::WarehouseCap, n_loc);
    set(VarKind::EquipCap, n_sites);
    for (auto k : kAllVarKinds) {
        offset_[index(k)] = size_;
        size_ += entities(k) * steps(k);
    }
}

std::size_t VariableSpace::column(const VariableKey& key) const {
    if (key.entity >= entities(key.kind) || key.step >= steps(key.kind))
        throw std::out_of_range(fmt::format("variable {}[{}][{}] outside the space", symbol(key.kind), key.entity,
                                            key.step));
    return offset(key.kind) + key.entity * steps(key.kind) + key.step;
}

VariableKey VariableSpace::key(std::size_t col) const {
    if (col >= size_) throw std::out_of_range("column outside the variable space");
    for (auto k : kAllVarKinds) {
        auto span = entities(k) * steps(k);
        if (col < offset(k) + span) {
            auto local = col - offset(k);
            return {k, local / steps(k), local % steps(k)};
        }
    }
    throw std::logic_error("unreachable");
}

std::string VariableSpace::name(const VariableKey& key, const Scenario& sc) const {
    std::string entity;
    switch (key.kind) {
    case VarKind::LoadedDispatch:
    case VarKind::EmptyDispatch: entity = sc.path_name(key.entity); break;
    case VarKind::ProcessStart:
    case VarKind::EquipCap: entity = sc.process_site_name(sc.process_sites()[key.entity]); break;
    case VarKind::NonRenewable:
    case VarKind::FleetSize: break;
    default: entity = sc.locations[key.entity].id;
    }
    std::string out(symbol(key.kind));
    if (!entity.empty()) out += "[" + entity + "]";
    if (is_timed(key.kind)) out += fmt::format("[{}]", key.step);
    return out;
}

std::string_view role_name(RowRole role) {
    switch (role) {
    case RowRole::ChargeBalance: return "charge_balance";
    case RowRole::TruckBalance: return "truck_balance";
    case RowRole::ProductBalance: return "product_balance";
    case RowRole::RawBalance: return "raw_balance";
    case RowRole::ChargeRate: return "charge_rate";
    case RowRole::ChargeCapacity: return "charge_capacity";
    case RowRole::DepartureCharge: return "departure_charge";
    case RowRole::WarehouseCapacity: return "warehouse_capacity";
    case RowRole::FleetSize: return "fleet_size";
    case RowRole::EquipmentCapacity: return "equipment_capacity";
    case RowRole::PowerBalance: return "power_balance";
    case RowRole::Nonnegativity: return "nonnegativity";
    }
    return "unknown";
}

namespace {

std::string row_entity(const RowTag& tag, const Scenario& sc) {
    switch (tag.role) {
    case RowRole::FleetSize:
    case RowRole::PowerBalance: return {};
    case RowRole::EquipmentCapacity: return sc.process_site_name(sc.process_sites()[tag.entity]);
    default: return sc.locations[tag.entity].id;
    }
}

std::string row_name(const RowTag& tag, const Scenario& sc) {
    auto entity = row_entity(tag, sc);
    std::string out(role_name(tag.role));
    if (!entity.empty()) out += "[" + entity + "]";
    return out + fmt::format("[{}]", tag.step);
}

}  // namespace

std::string describe(const RowTag& tag, const Scenario& sc) {
    if (tag.role == RowRole::Nonnegativity) return fmt::format("nonnegativity (column {})", tag.entity);
    auto out = row_name(tag, sc);
    if (tag.wraps) out += " (periodic boundary)";
    return out;
}

double empty_truck_energy(const Path& path, double theta) { return theta * path.energy_kwh; }

double objective_coefficient(const Scenario& sc, VarKind kind, std::size_t entity) {
    const double dt = sc.horizon.step_hours;
    const double span = sc.horizon.hours();
    const auto& c = sc.costs;
    switch (kind) {
    case VarKind::FleetSize: return span * c.k_truck;
    case VarKind::WarehouseCap: return span * c.k_store[entity];
    case VarKind::EquipCap: return span * c.k_equip[sc.process_sites()[entity].process];
    case VarKind::NonRenewable: return dt * c.k_power;
    case VarKind::Power: return dt * c.epsilon;
    default: return 0.0;
    }
}

void check_supply(const Scenario& sc) {
    const auto n_loc = sc.locations.size();
    // connected parts of the network: trucks can move product within one
    std::vector<std::size_t> parent(n_loc);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (const auto& p : sc.paths) parent[find(p.origin)] = find(p.dest);

    std::vector<double> demand(n_loc, 0.0), low(n_loc, 0.0), high(n_loc, 0.0);
    for (std::size_t i = 0; i < n_loc; ++i) {
        double q = sc.exogenous.product_kg.row_sum(i);
        double raw = sc.exogenous.raw_kg.row_sum(i);
        double lo = kInf, hi = 0.0;
        for (const auto& s : sc.processes)
            if (std::find(s.sites.begin(), s.sites.end(), i) != s.sites.end()) {
                lo = std::min(lo, s.output_per_unit_kg / s.raw_per_unit_kg);
                hi = std::max(hi, s.output_per_unit_kg / s.raw_per_unit_kg);
            }
        if (raw > 0.0 && hi == 0.0)
            throw InfeasibleScenarioError(fmt::format(
                "raw arrivals at {} ({} kg) can never be consumed: no process runs there", sc.locations[i].id, raw));
        auto root = find(i);
        demand[root] -= q;
        if (raw > 0.0) {
            low[root] += raw * lo;
            high[root] += raw * hi;
        }
    }
    for (std::size_t i = 0; i < n_loc; ++i) {
        if (find(i) != i) continue;
        std::string members;
        for (std::size_t k = 0; k < n_loc; ++k)
            if (find(k) == i) members += (members.empty() ? "" : ",") + sc.locations[k].id;
        const double tol = 1e-9 * std::max({1.0, std::abs(demand[i]), high[i]});
        if (demand[i] > high[i] + tol)
            throw InfeasibleScenarioError(
                fmt::format("net demand {} kg at {{{}}} exceeds the most the raw arrivals can yield ({} kg)",
                            demand[i], members, high[i]));
        if (demand[i] < low[i] - tol)
            throw InfeasibleScenarioError(
                fmt::format("raw arrivals at {{{}}} force at least {} kg of product but net demand is {} kg",
                            members, low[i], demand[i]));
    }
}

namespace {

class RowWriter {
public:
    RowWriter(const Scenario& sc, const VariableSpace& space, SparseLpBuilder& builder, std::vector<RowTag>& tags)
        : sc_(sc), space_(space), b_(builder), tags_(tags), n_(sc.horizon.n_steps) {}

    // Adds coef * var[entity][t - lag] with cyclic wrap-around.
    void add(VarKind kind, std::size_t entity, std::size_t t, std::size_t lag, double coef) {
        if (lag % n_ > t) wraps_ = true;
        auto step = is_timed(kind) ? (t + n_ - lag % n_) % n_ : 0;
        terms_.push_back({space_(kind, entity, step), coef});
    }

    void emit(RowRole role, std::size_t entity, std::size_t t, RowSense sense, double rhs) {
        std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) { return a.col < b.col; });
        bool empty = true;
        for (std::size_t k = 0; k < terms_.size();) {
            double sum = 0.0;
            auto col = terms_[k].col;
            for (; k < terms_.size() && terms_[k].col == col; ++k) sum += terms_[k].coef;
            if (sum != 0.0) empty = false;
        }
        RowTag tag{role, entity, t, wraps_};
        if (empty) {
            bool ok = sense == RowSense::Equal ? rhs == 0.0 : rhs >= 0.0;
            if (!ok)
                throw InfeasibleScenarioError(
                    fmt::format("{} has no free variables but requires {}", describe(tag, sc_), rhs));
        } else {
            b_.add_row(sense, rhs, terms_);
            tags_.push_back(tag);
        }
        terms_.clear();
        wraps_ = false;
    }

private:
    const Scenario& sc_;
    const VariableSpace& space_;
    SparseLpBuilder& b_;
    std::vector<RowTag>& tags_;
    std::size_t n_;
    std::vector<Term> terms_;
    bool wraps_ = false;
};

}  // namespace

LinearProgram build_lp(const Scenario& sc, const BuildOptions& options) {
    sc.validate();
    if (options.precheck) check_supply(sc);

    LinearProgram out;
    out.scenario = sc;
    out.space = VariableSpace(sc);
    const auto& space = out.space;

    SparseLpBuilder b;
    for (std::size_t col = 0; col < space.size(); ++col) {
        auto key = space.key(col);
        b.add_column(objective_coefficient(sc, key.kind, key.entity));
    }

    const auto n = sc.horizon.n_steps;
    const double dt = sc.horizon.step_hours;
    const auto n_loc = sc.locations.size();
    const auto sites = sc.process_sites();
    const bool trucks = !sc.paths.empty();
    const auto& truck = sc.truck;
    const double theta = truck.theta();
    const Grid q = sc.product_injection();
    const auto& f = sc.exogenous.raw_kg;

    using enum VarKind;
    RowWriter w(sc, space, b, out.rows);

    auto add_state_delta = [&](VarKind kind, std::size_t i, std::size_t t) {
        w.add(kind, i, t, 0, 1.0);
        w.add(kind, i, t, 1, -1.0);
    };

    for (std::size_t i = 0; i < n_loc; ++i)
        for (std::size_t t = 0; t < n; ++t) {
            add_state_delta(Charge, i, t);
            w.add(Power, i, t, 0, -dt);
            for (std::size_t s = 0; s < sites.size(); ++s) {
                if (sites[s].location != i) continue;
                const auto& proc = sc.processes[sites[s].process];
                for (std::size_t tau = 0; tau < proc.duration_steps; ++tau)
                    w.add(ProcessStart, s, t, tau, dt * proc.power_per_unit_kw);
            }
            for (std::size_t k = 0; k < sc.paths.size(); ++k) {
                const auto& path = sc.paths[k];
                if (path.origin != i) continue;
                w.add(LoadedDispatch, k, t, 0, path.energy_kwh);
                w.add(EmptyDispatch, k, t, 0, empty_truck_energy(path, theta));
            }
            w.emit(RowRole::ChargeBalance, i, t, RowSense::Equal, 0.0);
        }

    if (trucks)
        for (std::size_t i = 0; i < n_loc; ++i)
            for (std::size_t t = 0; t < n; ++t) {
                add_state_delta(StationaryTrucks, i, t);
                for (std::size_t k = 0; k < sc.paths.size(); ++k) {
                    const auto& path = sc.paths[k];
                    if (path.origin == i) {
                        w.add(LoadedDispatch, k, t, 0, 1.0);
                        w.add(EmptyDispatch, k, t, 0, 1.0);
                    }
                    if (path.dest == i) {
                        w.add(LoadedDispatch, k, t, path.travel_steps, -1.0);
                        w.add(EmptyDispatch, k, t, path.travel_steps, -1.0);
                    }
                }
                w.emit(RowRole::TruckBalance, i, t, RowSense::Equal, 0.0);
            }

    for (std::size_t i = 0; i < n_loc; ++i)
        for (std::size_t t = 0; t < n; ++t) {
            add_state_delta(Product, i, t);
            for (std::size_t k = 0; k < sc.paths.size(); ++k) {
                const auto& path = sc.paths[k];
                if (path.origin == i) w.add(LoadedDispatch, k, t, 0, truck.load_kg);
                if (path.dest == i) w.add(LoadedDispatch, k, t, path.travel_steps, -truck.load_kg);
            }
            for (std::size_t s = 0; s < sites.size(); ++s) {
                if (sites[s].location != i) continue;
                const auto& proc = sc.processes[sites[s].process];
                w.add(ProcessStart, s, t, proc.duration_steps, -proc.output_per_unit_kg);
            }
            w.emit(RowRole::ProductBalance, i, t, RowSense::Equal, q(i, t));
        }

    for (std::size_t i = 0; i < n_loc; ++i)
        for (std::size_t t = 0; t < n; ++t) {
            add_state_delta(Raw, i, t);
            for (std::size_t s = 0; s < sites.size(); ++s)
                if (sites[s].location == i)
                    w.add(ProcessStart, s, t, 0, sc.processes[sites[s].process].raw_per_unit_kg);
            w.emit(RowRole::RawBalance, i, t, RowSense::Equal, f(i, t));
        }

    for (std::size_t i = 0; i < n_loc; ++i)
        for (std::size_t t = 0; t < n; ++t) {
            add_state_delta(Charge, i, t);
            if (trucks) w.add(StationaryTrucks, i, t, 1, -dt / truck.full_charge_hours * truck.battery_kwh);
            w.emit(RowRole::ChargeRate, i, t, RowSense::LessEqual, 0.0);

            w.add(Charge, i, t, 0, 1.0);
            if (trucks) w.add(StationaryTrucks, i, t, 0, -truck.battery_kwh);
            w.emit(RowRole::ChargeCapacity, i, t, RowSense::LessEqual, 0.0);

            if (trucks && truck.charge_before_departure) {
                bool departs = false;
                for (std::size_t k = 0; k < sc.paths.size(); ++k) {
                    const auto& path = sc.paths[k];
                    if (path.origin != i) continue;
                    departs = true;
                    w.add(LoadedDispatch, k, t, 0, path.energy_kwh);
                    w.add(EmptyDispatch, k, t, 0, empty_truck_energy(path, theta));
                }
                if (departs) {
                    w.add(Charge, i, t, 1, -1.0);
                    w.emit(RowRole::DepartureCharge, i, t, RowSense::LessEqual, 0.0);
                }
            }

            w.add(Product, i, t, 0, 1.0);
            w.add(Raw, i, t, 0, 1.0);
            w.add(WarehouseCap, i, t, 0, -1.0);
            w.emit(RowRole::WarehouseCapacity, i, t, RowSense::LessEqual, 0.0);
        }

    if (trucks)
        for (std::size_t t = 0; t < n; ++t) {
            for (std::size_t i = 0; i < n_loc; ++i) w.add(StationaryTrucks, i, t, 0, 1.0);
            for (std::size_t k = 0; k < sc.paths.size(); ++k)
                for (std::size_t tau = 0; tau < sc.paths[k].travel_steps; ++tau) {
                    w.add(LoadedDispatch, k, t, tau, 1.0);
                    w.add(EmptyDispatch, k, t, tau, 1.0);
                }
            w.add(FleetSize, 0, t, 0, -1.0);
            w.emit(RowRole::FleetSize, 0, t, RowSense::LessEqual, 0.0);
        }

    for (std::size_t s = 0; s < sites.size(); ++s) {
        const auto& proc = sc.processes[sites[s].process];
        for (std::size_t t = 0; t < n; ++t) {
            for (std::size_t tau = 0; tau < proc.duration_steps; ++tau) w.add(ProcessStart, s, t, tau, 1.0);
            w.add(EquipCap, s, t, 0, -1.0);
            w.emit(RowRole::EquipmentCapacity, s, t, RowSense::LessEqual, 0.0);
        }
    }

    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t i = 0; i < n_loc; ++i) w.add(Power, i, t, 0, 1.0);
        w.add(NonRenewable, 0, t, 0, -1.0);
        w.emit(RowRole::PowerBalance, 0, t, RowSense::LessEqual, sc.renewable_total_kw(t));
    }

    out.lp = b.finish();
    return out;
}

std::vector<std::string> LinearProgram::column_names() const {
    std::vector<std::string> names(space.size());
    for (std::size_t j = 0; j < names.size(); ++j) names[j] = space.name(space.key(j), scenario);
    return names;
}

std::vector<std::string> LinearProgram::row_names() const {
    std::vector<std::string> names(rows.size());
    for (std::size_t i = 0; i < names.size(); ++i) names[i] = row_name(rows[i], scenario);
    return names;
}

std::string LinearProgram::to_mps() const {
    return escflex::to_mps(lp, "escflex", column_names(), row_names());
}

}  // namespace escflex
