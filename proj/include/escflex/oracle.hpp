#pragma once

#include "escflex/scenario.hpp"
#include "escflex/solve.hpp"

#include <cstddef>
#include <stdexcept>

namespace escflex {

struct OracleLimits {
    std::size_t max_locations = 2;
    std::size_t max_steps = 8;
    std::size_t max_fleet = 3;
    std::size_t max_schedules = 200'000;  // residual LPs solved
};

class OracleLimitError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OracleResult {
    double objective = kInf;
    std::size_t schedules = 0;  // integer truck schedules examined
    std::size_t feasible = 0;   // of which the residual LP was feasible
    std::size_t fleets_pruned = 0;  // fleet sizes whose truck capex alone exceeds the best
    PlanSolution best;
};

/// Exhaustive integer truck schedules (fleet size, stationary trucks and
/// dispatches all integral, periodic over the horizon); every other
/// variable is solved as a residual LP. Fleet sizes are tried in increasing
/// order and the search stops once a fleet's capex alone reaches the best
/// objective found, which no larger fleet can beat. Returns the best plan.
OracleResult oracle_enumerate_detail(const Scenario& scenario, const OracleLimits& limits = {},
                                     const SolverConfig& config = {});

/// Best integer-schedule objective. Throws OracleLimitError for instances
/// beyond the limits and InfeasibleScenarioError when no schedule works.
double oracle_enumerate(const Scenario& scenario, const OracleLimits& limits = {});

}  // namespace escflex
