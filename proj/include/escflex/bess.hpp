#pragma once

#include "escflex/scenario.hpp"
#include "escflex/solve.hpp"

#include <string>
#include <vector>

namespace escflex {

/// Aggregate load of a frozen zero-tax schedule.
struct FixedLoadProfile {
    std::vector<double> demand_kw;     // sum over locations of p
    std::vector<double> renewable_kw;  // sum over locations of r
    double step_hours = 1.0;

    double energy_kwh() const;
    /// Renewable share of the profile with no storage: sum min(p, r) / sum p, in %.
    double renewable_pct() const;
};

/// Throws std::invalid_argument unless the plan is optimal and was solved
/// with k_power = 0.
FixedLoadProfile derive_fixed_profile(const PlanSolution& zero_tax_solution, const Scenario& scenario);

struct BessResult {
    double b_max_kwh = 0.0;
    std::vector<double> battery_kwh;  // B at the end of each step
    std::vector<double> z_kw;
    std::vector<double> curtail_kw;
    double renewable_pct = 0.0;
    double objective = 0.0;  // k_batt B^max + k_power dt sum z
};

/// Sizes one aggregate battery for a fixed profile:
///   min k_batt B^max + k_power dt sum z
///   B[t] - B[t-1] = dt (r - p + z - r_curt),  0 <= B <= B^max,  periodic B.
/// A second pass with the first objective held (and B^max no larger than
/// the first pass chose) minimises sum z, which the
/// first leaves open whenever k_power = 0. epsilon prices every kWh drawn,
/// which is constant for a fixed profile; it is accepted for completeness.
BessResult size_battery(const FixedLoadProfile& profile, double k_batt, double k_power, double epsilon = 0.0,
                        const SolverConfig& config = {});

void save_bess(const BessResult& result, const std::filesystem::path& dir);

}  // namespace escflex
