#include "escflex/bess.hpp"

#include "escflex/csv.hpp"

#include <fmt/core.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace escflex {

double FixedLoadProfile::energy_kwh() const {
    return step_hours * std::accumulate(demand_kw.begin(), demand_kw.end(), 0.0);
}

double FixedLoadProfile::renewable_pct() const {
    double total = 0.0, green = 0.0;
    for (std::size_t t = 0; t < demand_kw.size(); ++t) {
        total += demand_kw[t];
        green += std::min(demand_kw[t], renewable_kw[t]);
    }
    return total > 0.0 ? 100.0 * green / total : 0.0;
}

FixedLoadProfile derive_fixed_profile(const PlanSolution& sol, const Scenario& sc) {
    if (sol.status != SolveStatus::Optimal) throw std::invalid_argument("fixed profile needs an optimal plan");
    if (sol.meta.k_power != 0.0)
        throw std::invalid_argument(
            fmt::format("fixed profile must come from a zero-tax plan (k_power was {})", sol.meta.k_power));
    const auto& p = sol[VarKind::Power];
    if (p.rows() != sc.locations.size() || p.cols() != sc.horizon.n_steps)
        throw std::invalid_argument("plan does not match the scenario");
    FixedLoadProfile prof;
    prof.step_hours = sc.horizon.step_hours;
    for (std::size_t t = 0; t < sc.horizon.n_steps; ++t) {
        prof.demand_kw.push_back(p.column_sum(t));
        prof.renewable_kw.push_back(sc.renewable_total_kw(t));
    }
    return prof;
}

BessResult size_battery(const FixedLoadProfile& prof, double k_batt, double k_power, double epsilon,
                        const SolverConfig& config) {
    const auto n = prof.demand_kw.size();
    if (n == 0 || prof.renewable_kw.size() != n) throw std::invalid_argument("profile lengths differ or are empty");
    if (!(prof.step_hours > 0.0)) throw std::invalid_argument("profile step must be > 0");
    for (std::size_t t = 0; t < n; ++t)
        if (!(prof.demand_kw[t] >= 0.0) || !(prof.renewable_kw[t] >= 0.0))
            throw std::invalid_argument("profile values must be >= 0");
    if (!(k_batt >= 0.0) || !(k_power >= 0.0) || !(epsilon >= 0.0))
        throw std::invalid_argument("battery costs must be >= 0");
    const double dt = prof.step_hours;

    // columns: Bmax, B[t], z[t], curt[t]
    auto B = [](std::size_t t) { return 1 + t; };
    auto Z = [n](std::size_t t) { return 1 + n + t; };
    auto R = [n](std::size_t t) { return 1 + 2 * n + t; };
    SparseLpBuilder b;
    b.add_column(k_batt);
    for (std::size_t t = 0; t < n; ++t) b.add_column(0.0);
    for (std::size_t t = 0; t < n; ++t) b.add_column(k_power * dt);
    for (std::size_t t = 0; t < n; ++t) b.add_column(0.0);
    for (std::size_t t = 0; t < n; ++t) {
        // B[t] - B[t-1] - dt z + dt curt = dt (r - p)
        std::vector<Term> row{{B(t), 1.0}, {Z(t), -dt}, {R(t), dt}};
        if (n > 1) row.push_back({B((t + n - 1) % n), -1.0});
        else row[0].coef = 0.0;
        b.add_row(RowSense::Equal, dt * (prof.renewable_kw[t] - prof.demand_kw[t]), row);
        std::vector<Term> cap{{B(t), 1.0}, {0, -1.0}};
        b.add_row(RowSense::LessEqual, 0.0, cap);
    }
    auto lp = b.finish();
    auto backend = make_backend(config.backend);
    auto first = backend->solve(lp, config);
    if (first.status != LpStatus::Optimal)
        throw SolverError(fmt::format("battery sizing: {}", to_string(first.status)));

    // hold the first objective, then use as little grid energy as possible
    const double best = first.objective;
    std::vector<Term> obj;
    for (std::size_t j = 0; j < lp.num_cols(); ++j)
        if (lp.cost[j] != 0.0) obj.push_back({j, lp.cost[j]});
    auto held = obj.empty() ? lp : append_row(lp, RowSense::LessEqual, best + 1e-9 * std::max(1.0, std::abs(best)), obj);
    std::fill(held.cost.begin(), held.cost.end(), 0.0);
    for (std::size_t t = 0; t < n; ++t) held.cost[Z(t)] = dt;
    // the slack on the held row must not buy battery: with k_power = 0 it
    // would otherwise pay for a sliver of storage that trims z
    held.upper[0] = first.x[0];
    auto second = backend->solve(held, config);
    const auto& x = second.status == LpStatus::Optimal ? second.x : first.x;

    BessResult out;
    out.b_max_kwh = x[0];
    double total = 0.0, grid = 0.0, batt_min = kInf;
    for (std::size_t t = 0; t < n; ++t) {
        out.battery_kwh.push_back(x[B(t)]);
        out.z_kw.push_back(x[Z(t)]);
        out.curtail_kw.push_back(x[R(t)]);
        total += prof.demand_kw[t];
        grid += x[Z(t)];
        batt_min = std::min(batt_min, x[B(t)]);
    }
    // the balance only fixes B up to a constant; report the trajectory that
    // touches empty
    if (batt_min > 0.0 && std::isfinite(batt_min))
        for (auto& v : out.battery_kwh) v -= batt_min;
    out.renewable_pct = total > 0.0 ? 100.0 * std::clamp(1.0 - grid / total, 0.0, 1.0) : 0.0;
    out.objective = k_batt * out.b_max_kwh + k_power * dt * grid;
    return out;
}

void save_bess(const BessResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    CsvWriter csv({"step", "B", "z", "r_curt"});
    for (std::size_t t = 0; t < r.battery_kwh.size(); ++t)
        csv.row({std::to_string(t), format_number(r.battery_kwh[t]), format_number(r.z_kw[t]),
                 format_number(r.curtail_kw[t])});
    csv.save(dir / "battery.csv");
    nlohmann::ordered_json j;
    j["b_max_kwh"] = r.b_max_kwh;
    j["renewable_pct"] = r.renewable_pct;
    j["objective_usd"] = r.objective;
    write_text_file(dir / "bess_summary.json", j.dump(2) + "\n");
}

}  // namespace escflex
