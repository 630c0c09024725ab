#include "escflex/oracle.hpp"

#include "escflex/errors.hpp"
#include "escflex/model.hpp"

#include <fmt/core.h>

#include <functional>

namespace escflex {

namespace {

// All ways to split `total` into `parts` non-negative integers.
void compositions(std::size_t total, std::size_t parts, std::vector<std::size_t>& cur,
                  const std::function<void(const std::vector<std::size_t>&)>& emit) {
    if (cur.size() + 1 == parts) {
        cur.push_back(total);
        emit(cur);
        cur.pop_back();
        return;
    }
    if (parts == 0) {
        if (total == 0) emit(cur);
        return;
    }
    for (std::size_t v = 0; v <= total; ++v) {
        cur.push_back(v);
        compositions(total - v, parts, cur, emit);
        cur.pop_back();
    }
}

class Enumerator {
public:
    Enumerator(const Scenario& sc, const OracleLimits& limits, const SolverConfig& config)
        : sc_(sc), limits_(limits), config_(config), lp_(build_lp(sc)), base_(lp_.lp), n_(sc.horizon.n_steps),
          n_loc_(sc.locations.size()), n_paths_(sc.paths.size()) {}

    OracleResult run() {
        if (n_paths_ == 0) {
            // nothing integral to choose
            evaluate_fixed();
            return std::move(result_);
        }
        // every cost term is nonnegative, so the fleet's own capex bounds any
        // schedule using it from below; larger fleets cannot beat the best
        const double per_truck = objective_coefficient(sc_, VarKind::FleetSize, 0);
        for (std::size_t fleet = 0; fleet <= limits_.max_fleet; ++fleet) {
            if (per_truck * static_cast<double>(fleet) >= result_.objective) {
                result_.fleets_pruned = limits_.max_fleet - fleet + 1;
                break;
            }
            // initial state: parked trucks per location plus trucks already on the
            // road (one slot per path, per remaining step, loaded or empty)
            std::size_t slots = 0;
            for (const auto& p : sc_.paths) slots += 2 * p.travel_steps;
            std::vector<std::size_t> cur;
            compositions(fleet, n_loc_ + slots, cur, [&](const std::vector<std::size_t>& split) {
                start(fleet, split);
            });
        }
        return std::move(result_);
    }

private:
    // dispatch[k][t] = {loaded, empty}
    void start(std::size_t fleet, const std::vector<std::size_t>& split) {
        fleet_ = fleet;
        start_parked_.assign(split.begin(), split.begin() + static_cast<std::ptrdiff_t>(n_loc_));
        loaded_.assign(n_paths_, std::vector<long>(n_, -1));
        empty_.assign(n_paths_, std::vector<long>(n_, -1));
        // trucks on the road at the start left during the last steps of the
        // previous cycle; periodicity pins those dispatches
        std::size_t at = n_loc_;
        for (std::size_t k = 0; k < n_paths_; ++k) {
            const auto tau = sc_.paths[k].travel_steps;
            for (std::size_t back = 1; back <= tau; ++back) {
                std::size_t a = split[at++], b = split[at++];
                auto t = n_ - back;
                if ((loaded_[k][t] >= 0 && loaded_[k][t] != static_cast<long>(a)) ||
                    (empty_[k][t] >= 0 && empty_[k][t] != static_cast<long>(b)))
                    return;
                loaded_[k][t] = static_cast<long>(a);
                empty_[k][t] = static_cast<long>(b);
            }
        }
        parked_ = start_parked_;
        step(0);
    }

    void step(std::size_t t) {
        if (t == n_) {
            if (parked_ == start_parked_) evaluate();
            return;
        }
        // arrivals at t left at t - tau: earlier in this cycle, or pinned by
        // the initial state when that wraps around
        std::vector<std::size_t> avail = parked_;
        for (std::size_t k = 0; k < n_paths_; ++k) {
            const auto& p = sc_.paths[k];
            auto from = (t + n_ - p.travel_steps) % n_;
            avail[p.dest] += static_cast<std::size_t>(loaded_[k][from] + empty_[k][from]);
        }
        choose(t, 0, avail);
    }

    // assign dispatches on path k at step t, then recurse
    void choose(std::size_t t, std::size_t k, std::vector<std::size_t>& avail) {
        if (k == n_paths_) {
            auto saved = parked_;
            parked_ = avail;
            step(t + 1);
            parked_ = saved;
            return;
        }
        const auto origin = sc_.paths[k].origin;
        const bool pinned = loaded_[k][t] >= 0;
        auto try_pair = [&](std::size_t a, std::size_t b) {
            if (a + b > avail[origin]) return;
            avail[origin] -= a + b;
            long old_a = loaded_[k][t], old_b = empty_[k][t];
            loaded_[k][t] = static_cast<long>(a);
            empty_[k][t] = static_cast<long>(b);
            choose(t, k + 1, avail);
            loaded_[k][t] = old_a;
            empty_[k][t] = old_b;
            avail[origin] += a + b;
        };
        if (pinned) {
            try_pair(static_cast<std::size_t>(loaded_[k][t]), static_cast<std::size_t>(empty_[k][t]));
            return;
        }
        for (std::size_t a = 0; a <= avail[origin]; ++a)
            for (std::size_t b = 0; a + b <= avail[origin]; ++b) try_pair(a, b);
    }

    void evaluate() {
        if (++result_.schedules > limits_.max_schedules)
            throw OracleLimitError(
                fmt::format("oracle: more than {} integer schedules; instance too large", limits_.max_schedules));
        auto& lp = lp_.lp;
        lp = base_;
        const auto& space = lp_.space;
        auto fix = [&](std::size_t col, double v) { lp.lower[col] = lp.upper[col] = v; };
        fix(space(VarKind::FleetSize, 0), static_cast<double>(fleet_));
        // replay the cycle to recover the stationary counts
        std::vector<double> parked(start_parked_.begin(), start_parked_.end());
        for (std::size_t t = 0; t < n_; ++t) {
            for (std::size_t k = 0; k < n_paths_; ++k) {
                const auto& p = sc_.paths[k];
                auto from = (t + n_ - p.travel_steps) % n_;
                parked[p.dest] += static_cast<double>(loaded_[k][from] + empty_[k][from]);
                parked[p.origin] -= static_cast<double>(loaded_[k][t] + empty_[k][t]);
                fix(space(VarKind::LoadedDispatch, k, t), static_cast<double>(loaded_[k][t]));
                fix(space(VarKind::EmptyDispatch, k, t), static_cast<double>(empty_[k][t]));
            }
            for (std::size_t i = 0; i < n_loc_; ++i) fix(space(VarKind::StationaryTrucks, i, t), parked[i]);
        }
        evaluate_fixed();
    }

    void evaluate_fixed() {
        if (n_paths_ == 0) ++result_.schedules;
        auto sol = solve(lp_, config_);
        if (sol.status != SolveStatus::Optimal) return;
        ++result_.feasible;
        if (sol.objective < result_.objective) {
            result_.objective = sol.objective;
            result_.best = std::move(sol);
        }
    }

    const Scenario& sc_;
    OracleLimits limits_;
    SolverConfig config_;
    LinearProgram lp_;
    SparseLp base_;
    std::size_t n_, n_loc_, n_paths_;
    OracleResult result_;

    std::size_t fleet_ = 0;
    std::vector<std::size_t> start_parked_, parked_;
    std::vector<std::vector<long>> loaded_, empty_;
};

}  // namespace

OracleResult oracle_enumerate_detail(const Scenario& sc, const OracleLimits& limits, const SolverConfig& config) {
    if (sc.locations.size() > limits.max_locations || sc.horizon.n_steps > limits.max_steps)
        throw OracleLimitError(fmt::format("oracle: instance has {} locations and {} steps; limits are {} and {}",
                                           sc.locations.size(), sc.horizon.n_steps, limits.max_locations,
                                           limits.max_steps));
    for (const auto& p : sc.paths)
        if (p.travel_steps >= sc.horizon.n_steps)
            throw OracleLimitError("oracle: trips must be shorter than the horizon");
    auto res = Enumerator(sc, limits, config).run();
    if (res.feasible == 0) throw InfeasibleScenarioError("oracle: no integer truck schedule is feasible");
    return res;
}

double oracle_enumerate(const Scenario& sc, const OracleLimits& limits) {
    return oracle_enumerate_detail(sc, limits).objective;
}

}  // namespace escflex
