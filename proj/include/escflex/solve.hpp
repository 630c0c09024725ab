#pragma once

#include "escflex/grid.hpp"
#include "escflex/model.hpp"
#include "escflex/simplex.hpp"

#include <array>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace escflex {

/// How to pick among equally cheap plans.
enum class TieBreak {
    None,            // whatever optimum the backend returns
    LeastInventory,  // hold the cost, then minimise product and raw stock summed over steps
};
std::string_view to_string(TieBreak tie_break);
TieBreak parse_tie_break(std::string_view text);

struct SolverConfig {
    std::string backend = "simplex";
    /// LeastInventory re-solves with the optimal cost held to within
    /// tie_break_slack (relative) and stock as the objective. This gives
    /// a deterministic, economically motivated trajectory when the cost
    /// leaves timing open, as it does whenever renewables are the binding
    /// resource. Costs twice the solve time.
    TieBreak tie_break = TieBreak::None;
    double tie_break_slack = 1e-7;
    double feasibility_tol = 1e-6;
    double optimality_tol = 1e-6;
    double time_limit_seconds = kInf;

    void validate() const;
};

/// Narrow solver interface: standard-form LP in, primal vector and status out.
class LpBackend {
public:
    virtual ~LpBackend() = default;
    virtual std::string_view id() const = 0;
    virtual LpResult solve(const SparseLp& lp, const SolverConfig& config) const = 0;
};

/// Known ids: "simplex" (embedded). Throws std::invalid_argument otherwise.
std::unique_ptr<LpBackend> make_backend(std::string_view id);

/// The backend failed for a reason other than infeasibility or time.
class SolverError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SolveStatus { Optimal, Infeasible, TimeLimit };
std::string_view to_string(SolveStatus status);

struct SolverMetadata {
    std::string backend;
    std::string lp_status;
    std::string tie_break;
    std::size_t iterations = 0;
    double seconds = 0.0;
    double k_power = 0.0;  // penalty the plan was solved under
    std::size_t rows = 0, columns = 0, nonzeros = 0;
};

struct PlanSolution {
    SolveStatus status = SolveStatus::Infeasible;
    /// One grid per kind: entities x steps (static kinds have one column).
    std::array<Grid, kNumVarKinds> values;
    double objective = 0.0;
    ObjectiveBreakdown breakdown;
    SolverMetadata meta;
    /// For infeasible solves: descriptions of rows that could not be satisfied.
    std::vector<std::string> infeasibility_hint;

    const Grid& operator[](VarKind kind) const { return values[static_cast<std::size_t>(kind)]; }
    Grid& operator[](VarKind kind) { return values[static_cast<std::size_t>(kind)]; }

    /// Zero trajectories shaped for a variable space.
    static PlanSolution zeros(const VariableSpace& space);
};

/// Prices trajectories with the scenario's cost book.
ObjectiveBreakdown evaluate_objective(const Scenario& scenario, const PlanSolution& solution);

/// Solves the LP. Optimal plans are post-processed so z equals the
/// renewable shortfall max(0, sum p - sum r) at every step (z is otherwise
/// free to exceed it whenever k_power = 0).
PlanSolution solve(const LinearProgram& lp, const SolverConfig& config = {});

/// Convenience: build_lp + solve.
PlanSolution solve_scenario(const Scenario& scenario, const SolverConfig& config = {});

/// CSV per kind (entity,step,value) plus summary.json.
void save_solution(const PlanSolution& solution, const Scenario& scenario, const std::filesystem::path& dir);
std::string solution_summary_json(const PlanSolution& solution, int indent = 2);

}  // namespace escflex
