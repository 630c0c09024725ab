#pragma once

#include "escflex/model.hpp"
#include "escflex/solve.hpp"

#include <string>
#include <vector>

namespace escflex {

struct Violation {
    RowTag tag;
    double magnitude;  // absolute residual in the row's own units
    std::string what;
};

/// Re-checks every state update, limit, the power balance and
/// nonnegativity arithmetically on the trajectories. A row is violated when
/// its residual exceeds max(tolerance * max(1, sum of |terms|, |rhs|), 100 * tolerance).
std::vector<Violation> validate_solution(const Scenario& scenario, const PlanSolution& solution,
                                         double tolerance = 1e-6);

}  // namespace escflex
