#include "escflex/solve.hpp"

#include "escflex/csv.hpp"

#include <fmt/core.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace escflex {

std::string_view to_string(TieBreak tie_break) {
    switch (tie_break) {
    case TieBreak::None: return "none";
    case TieBreak::LeastInventory: return "least_inventory";
    }
    return "unknown";
}

TieBreak parse_tie_break(std::string_view text) {
    if (text == "none") return TieBreak::None;
    if (text == "least_inventory") return TieBreak::LeastInventory;
    throw std::invalid_argument(fmt::format("unknown tie break '{}' (none|least_inventory)", text));
}

void SolverConfig::validate() const {
    if (!(feasibility_tol > 0.0) || !(optimality_tol > 0.0))
        throw std::invalid_argument("solver tolerances must be > 0");
    if (!(tie_break_slack >= 0.0)) throw std::invalid_argument("tie_break_slack must be >= 0");
    if (!(time_limit_seconds > 0.0)) throw std::invalid_argument("solver time limit must be > 0");
}

namespace {

class EmbeddedSimplex final : public LpBackend {
public:
    std::string_view id() const override { return "simplex"; }
    LpResult solve(const SparseLp& lp, const SolverConfig& config) const override {
        SimplexOptions opt;
        // internal tolerances act on the scaled problem and sit well inside the
        // user-facing ones
        opt.feasibility_tol = std::min(1e-7, config.feasibility_tol * 0.1);
        opt.optimality_tol = std::min(1e-7, config.optimality_tol * 0.1);
        opt.residual_tol = config.feasibility_tol * 0.1;
        opt.time_limit_seconds = config.time_limit_seconds;
        return solve_simplex(lp, opt);
    }
};

}  // namespace

std::unique_ptr<LpBackend> make_backend(std::string_view id) {
    if (id == "simplex") return std::make_unique<EmbeddedSimplex>();
    throw std::invalid_argument(fmt::format("unknown solver backend '{}'", id));
}

std::string_view to_string(SolveStatus status) {
    switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::TimeLimit: return "time_limit";
    }
    return "unknown";
}

PlanSolution PlanSolution::zeros(const VariableSpace& space) {
    PlanSolution s;
    for (auto k : kAllVarKinds) s[k] = Grid(space.entities(k), space.has(k) ? space.steps(k) : 0);
    return s;
}

ObjectiveBreakdown evaluate_objective(const Scenario& sc, const PlanSolution& sol) {
    ObjectiveBreakdown b;
    auto priced = [&](VarKind kind) {
        const auto& g = sol[kind];
        double total = 0.0;
        for (std::size_t e = 0; e < g.rows(); ++e) total += objective_coefficient(sc, kind, e) * g.row_sum(e);
        return total;
    };
    b.capex_truck = priced(VarKind::FleetSize);
    b.capex_warehouse = priced(VarKind::WarehouseCap);
    b.capex_equipment = priced(VarKind::EquipCap);
    b.opex_nonrenewable_penalty = priced(VarKind::NonRenewable);
    b.opex_base_energy = priced(VarKind::Power);
    return b;
}

PlanSolution solve(const LinearProgram& lp, const SolverConfig& config) {
    config.validate();
    auto backend = make_backend(config.backend);
    auto res = backend->solve(lp.lp, config);
    if (res.status == LpStatus::Optimal && config.tie_break == TieBreak::LeastInventory) {
        const auto& space = lp.space;
        std::vector<Term> cost_row;
        for (std::size_t j = 0; j < lp.lp.num_cols(); ++j)
            if (lp.lp.cost[j] != 0.0) cost_row.push_back({j, lp.lp.cost[j]});
        double cap = res.objective + config.tie_break_slack * std::max(1.0, std::abs(res.objective));
        auto held = append_row(lp.lp, RowSense::LessEqual, cap, cost_row);
        std::fill(held.cost.begin(), held.cost.end(), 0.0);
        for (auto kind : {VarKind::Product, VarKind::Raw})
            for (std::size_t e = 0; e < space.entities(kind); ++e)
                for (std::size_t t = 0; t < space.steps(kind); ++t) held.cost[space(kind, e, t)] = 1.0;
        auto second = backend->solve(held, config);
        if (second.status == LpStatus::Optimal) {
            second.iterations += res.iterations;
            second.seconds += res.seconds;
            res = std::move(second);
        } else if (second.status != LpStatus::TimeLimit && second.status != LpStatus::IterationLimit) {
            throw SolverError(fmt::format("tie break: {}", to_string(second.status)));
        }
        // on a time limit the first optimum stands
    }

    const auto& space = lp.space;
    const auto& sc = lp.scenario;
    PlanSolution sol = PlanSolution::zeros(space);
    sol.meta.backend = std::string(backend->id());
    sol.meta.lp_status = std::string(to_string(res.status));
    sol.meta.tie_break = std::string(to_string(config.tie_break));
    sol.meta.iterations = res.iterations;
    sol.meta.seconds = res.seconds;
    sol.meta.k_power = sc.costs.k_power;
    sol.meta.rows = lp.lp.num_rows();
    sol.meta.columns = lp.lp.num_cols();
    sol.meta.nonzeros = lp.lp.nnz();

    switch (res.status) {
    case LpStatus::Optimal: sol.status = SolveStatus::Optimal; break;
    case LpStatus::Infeasible:
        sol.status = SolveStatus::Infeasible;
        for (auto r : res.infeasible_rows) sol.infeasibility_hint.push_back(describe(lp.rows[r], sc));
        return sol;
    case LpStatus::TimeLimit:
    case LpStatus::IterationLimit: sol.status = SolveStatus::TimeLimit; return sol;
    default: throw SolverError(fmt::format("solver backend '{}' failed: {}", backend->id(), to_string(res.status)));
    }

    for (std::size_t j = 0; j < space.size(); ++j) {
        auto key = space.key(j);
        double v = res.x[j];
        if (std::abs(v) < 1e-12) v = 0.0;  // round-off around zero
        sol[key.kind](key.entity, key.step) = v;
    }
    auto& z = sol[VarKind::NonRenewable];
    const auto& p = sol[VarKind::Power];
    for (std::size_t t = 0; t < sc.horizon.n_steps; ++t)
        z(0, t) = std::max(0.0, p.column_sum(t) - sc.renewable_total_kw(t));
    sol.breakdown = evaluate_objective(sc, sol);
    sol.objective = sol.breakdown.total();
    return sol;
}

PlanSolution solve_scenario(const Scenario& scenario, const SolverConfig& config) {
    return solve(build_lp(scenario), config);
}

std::string solution_summary_json(const PlanSolution& s, int indent) {
    nlohmann::ordered_json j;
    j["status"] = std::string(to_string(s.status));
    j["objective_usd"] = s.objective;
    j["breakdown_usd"] = {{"capex_truck", s.breakdown.capex_truck},
                          {"capex_warehouse", s.breakdown.capex_warehouse},
                          {"capex_equipment", s.breakdown.capex_equipment},
                          {"opex_nonrenewable_penalty", s.breakdown.opex_nonrenewable_penalty},
                          {"opex_base_energy", s.breakdown.opex_base_energy}};
    j["solver"] = {{"backend", s.meta.backend},     {"lp_status", s.meta.lp_status}, {"tie_break", s.meta.tie_break},
                   {"iterations", s.meta.iterations}, {"seconds", s.meta.seconds},
                   {"rows", s.meta.rows},             {"columns", s.meta.columns},
                   {"nonzeros", s.meta.nonzeros}};
    j["k_power_usd_per_kwh"] = s.meta.k_power;
    j["infeasibility_hint"] = s.infeasibility_hint;
    return j.dump(indent);
}

void save_solution(const PlanSolution& s, const Scenario& sc, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto sites = sc.process_sites();
    for (auto kind : kAllVarKinds) {
        const auto& g = s[kind];
        if (g.rows() == 0) continue;
        CsvWriter out({"entity", "step", "value"});
        for (std::size_t e = 0; e < g.rows(); ++e) {
            std::string entity;
            switch (kind) {
            case VarKind::LoadedDispatch:
            case VarKind::EmptyDispatch: entity = sc.path_name(e); break;
            case VarKind::ProcessStart:
            case VarKind::EquipCap: entity = sc.process_site_name(sites[e]); break;
            case VarKind::NonRenewable: entity = "system"; break;
            case VarKind::FleetSize: entity = "fleet"; break;
            default: entity = sc.locations[e].id;
            }
            for (std::size_t t = 0; t < g.cols(); ++t)
                out.row({entity, std::to_string(t), format_number(g(e, t))});
        }
        out.save(dir / (std::string(symbol(kind)) + ".csv"));
    }
    write_text_file(dir / "summary.json", solution_summary_json(s) + "\n");
}

}  // namespace escflex
