#pragma once

#include "escflex/scenario.hpp"
#include "escflex/sparse_lp.hpp"

#include <array>
#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace escflex {

enum class VarKind {
    Charge,            // C  [location][step]
    StationaryTrucks,  // Y  [location][step]
    Product,           // X  [location][step]
    Raw,               // F  [location][step]
    Power,             // p  [location][step]
    NonRenewable,      // z  [step]
    LoadedDispatch,    // y  [path][step]
    EmptyDispatch,     // y' [path][step]
    ProcessStart,      // m  [process site][step]
    FleetSize,         // Yhat
    WarehouseCap,      // W  [location]
    EquipCap,          // M  [process site]
};
inline constexpr std::size_t kNumVarKinds = 12;
inline constexpr std::array<VarKind, kNumVarKinds> kAllVarKinds = {
    VarKind::Charge,         VarKind::StationaryTrucks, VarKind::Product,       VarKind::Raw,
    VarKind::Power,          VarKind::NonRenewable,     VarKind::LoadedDispatch, VarKind::EmptyDispatch,
    VarKind::ProcessStart,   VarKind::FleetSize,        VarKind::WarehouseCap,  VarKind::EquipCap};

/// Short symbol used in file names and MPS column names ("C", "y_empty", "Yhat", ...).
std::string_view symbol(VarKind kind);
VarKind parse_var_kind(std::string_view symbol);
/// Whether the kind has a time index.
bool is_timed(VarKind kind);

struct VariableKey {
    VarKind kind;
    std::size_t entity = 0;  // location, path or process site; 0 for z and Yhat
    std::size_t step = 0;    // 0 for static kinds
    auto operator<=>(const VariableKey&) const = default;
};

/// Bijection between VariableKeys and LP columns. Each kind is a contiguous
/// block laid out entity-major; kinds that do not apply are empty blocks.
class VariableSpace {
public:
    VariableSpace() = default;
    explicit VariableSpace(const Scenario& scenario);

    bool has(VarKind kind) const { return entities(kind) > 0; }
    std::size_t entities(VarKind kind) const { return entities_[index(kind)]; }
    std::size_t steps(VarKind kind) const { return is_timed(kind) ? n_steps_ : 1; }
    std::size_t offset(VarKind kind) const { return offset_[index(kind)]; }
    std::size_t size() const { return size_; }

    /// Throws std::out_of_range for keys outside the space.
    std::size_t column(const VariableKey& key) const;
    VariableKey key(std::size_t column) const;
    std::size_t operator()(VarKind kind, std::size_t entity, std::size_t step = 0) const {
        return column({kind, entity, step});
    }

    std::string name(const VariableKey& key, const Scenario& scenario) const;

private:
    static std::size_t index(VarKind k) { return static_cast<std::size_t>(k); }
    std::size_t n_steps_ = 0;
    std::array<std::size_t, kNumVarKinds> entities_{};
    std::array<std::size_t, kNumVarKinds> offset_{};
    std::size_t size_ = 0;
};

enum class RowRole {
    ChargeBalance,
    TruckBalance,
    ProductBalance,
    RawBalance,
    ChargeRate,
    ChargeCapacity,
    DepartureCharge,
    WarehouseCapacity,
    FleetSize,
    EquipmentCapacity,
    PowerBalance,
    Nonnegativity,  // bounds; only reported by validate_solution
};

std::string_view role_name(RowRole role);

/// What a constraint row means: its role, the entity it belongs to
/// (location, process site, or 0 for system-wide rows) and its step.
/// `wraps` marks rows that reach across the periodic boundary.
struct RowTag {
    RowRole role;
    std::size_t entity = 0;
    std::size_t step = 0;
    bool wraps = false;
    bool operator==(const RowTag&) const = default;
};

std::string describe(const RowTag& tag, const Scenario& scenario);

struct ObjectiveBreakdown {
    double capex_truck = 0.0;
    double capex_warehouse = 0.0;
    double capex_equipment = 0.0;
    double opex_nonrenewable_penalty = 0.0;
    double opex_base_energy = 0.0;

    double capex() const { return capex_truck + capex_warehouse + capex_equipment; }
    double total() const { return capex() + opex_nonrenewable_penalty + opex_base_energy; }
    bool operator==(const ObjectiveBreakdown&) const = default;
};

struct LinearProgram {
    Scenario scenario;  // the instance this LP was built from
    VariableSpace space;
    SparseLp lp;
    std::vector<RowTag> rows;

    std::vector<std::string> column_names() const;
    std::vector<std::string> row_names() const;
    std::string to_mps() const;
};

struct BuildOptions {
    /// Reject instances whose demand cannot be met by any schedule before
    /// building. Off lets the solver discover the infeasibility instead.
    bool precheck = true;
};

/// Throws InfeasibleScenarioError when the precheck fails.
LinearProgram build_lp(const Scenario& scenario, const BuildOptions& options = {});

/// Objective coefficient for each column, by kind (also used to price
/// trajectories outside the LP).
double objective_coefficient(const Scenario& scenario, VarKind kind, std::size_t entity);

/// Energy an empty truck spends on a path.
double empty_truck_energy(const Path& path, double theta);

/// Periodic storage means every kg of raw material must be processed and every
/// kg of product consumed. Throws InfeasibleScenarioError when the raw
/// arrivals in a connected part of the network cannot yield its net demand.
void check_supply(const Scenario& scenario);

}  // namespace escflex
