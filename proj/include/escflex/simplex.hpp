#pragma once

#include "escflex/sparse_lp.hpp"

#include <cstddef>
#include <string_view>
#include <vector>

namespace escflex {

enum class LpStatus { Optimal, Infeasible, Unbounded, TimeLimit, IterationLimit, NumericalFailure };

std::string_view to_string(LpStatus status);

struct SimplexOptions {
    // Tolerances apply to the internally scaled problem.
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    double time_limit_seconds = kInf;
    std::size_t max_iterations = 50'000'000;
    std::size_t refactor_interval = 100;
    bool scaling = true;
    /// Row residuals and bound violations in original units that the final
    /// point must meet: relative to the row's terms, with an absolute floor
    /// of 100x.
    double residual_tol = 1e-7;
};

struct LpResult {
    LpStatus status = LpStatus::NumericalFailure;
    std::vector<double> x;         // structural values, original units
    std::vector<double> row_dual;  // d objective / d rhs
    double objective = 0.0;
    std::size_t iterations = 0;
    double seconds = 0.0;
    /// When infeasible: rows taking part in the infeasibility proof (or,
    /// after a primal phase 1, rows left violated). A hint, not an
    /// irreducible subset.
    std::vector<std::size_t> infeasible_rows;
};

/// Bounded revised simplex over an LU-factored basis: a dual phase with
/// steepest-edge pricing from the slack basis, then a primal cleanup
/// (composite phase 1, Devex pricing) once perturbations are removed.
/// Deterministic.
LpResult solve_simplex(const SparseLp& lp, const SimplexOptions& options = {});

}  // namespace escflex
