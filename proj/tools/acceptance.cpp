// Runs the acceptance criteria on the shipped fixtures and prints one
// PASS/FAIL line per criterion. Exit status is 0 only if all pass.

#include "commands.hpp"

#include "escflex/bess.hpp"
#include "escflex/csv.hpp"
#include "escflex/kpi.hpp"
#include "escflex/model.hpp"
#include "escflex/oracle.hpp"
#include "escflex/scenario.hpp"
#include "escflex/solve.hpp"
#include "escflex/sweep.hpp"
#include "escflex/validate.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#ifndef ESCFLEX_FIXTURES
#define ESCFLEX_FIXTURES "tests/fixtures"
#endif

namespace fs = std::filesystem;
using namespace escflex;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

Scenario with_tax(Scenario sc, double tax, std::optional<DemandClearing> clearing = {}) {
    sc.costs.k_power = carbon_tax_to_penalty(tax, sc.costs.emission_factor);
    if (clearing) sc.clearing = *clearing;
    return sc;
}

// Solves are shared between criteria.
class Cache {
public:
    explicit Cache(Scenario base) : base_(std::move(base)) {}
    const Scenario& base() const { return base_; }
    const PlanSolution& get(double tax, DemandClearing clearing) {
        auto key = std::make_pair(tax, clearing);
        auto it = solved_.find(key);
        if (it == solved_.end()) it = solved_.emplace(key, solve_scenario(with_tax(base_, tax, clearing))).first;
        return it->second;
    }

private:
    Scenario base_;
    std::map<std::pair<double, DemandClearing>, PlanSolution> solved_;
};

// Largest residual of the rows closing the horizon (charge and product
// balances at t = 0), relative to the row's size.
double wrap_residual(const Scenario& sc, const PlanSolution& sol) {
    auto lp = build_lp(sc);
    std::vector<double> x(lp.space.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        auto k = lp.space.key(j);
        x[j] = sol[k.kind](k.entity, k.step);
    }
    auto act = lp.lp.row_activity(x);
    std::vector<double> size(lp.lp.num_rows(), 0.0);
    for (std::size_t j = 0; j < x.size(); ++j)
        for (auto k = lp.lp.col_start[j]; k < lp.lp.col_start[j + 1]; ++k)
            size[lp.lp.row_index[k]] += std::abs(lp.lp.value[k] * x[j]);
    double worst = 0.0;
    for (std::size_t i = 0; i < lp.rows.size(); ++i) {
        const auto& tag = lp.rows[i];
        if (!tag.wraps || (tag.role != RowRole::ChargeBalance && tag.role != RowRole::ProductBalance)) continue;
        worst = std::max(worst, std::abs(act[i] - lp.lp.rhs[i]) / std::max({1.0, size[i], std::abs(lp.lp.rhs[i])}));
    }
    return worst;
}

// total production + imports - total demand, kg
double mass_gap(const Scenario& sc, const PlanSolution& sol) {
    const auto sites = sc.process_sites();
    const auto& m = sol[VarKind::ProcessStart];
    double produced = 0.0;
    for (std::size_t k = 0; k < sites.size(); ++k)
        produced += sc.processes[sites[k].process].output_per_unit_kg * m.row_sum(k);
    double imports = 0.0, demand = 0.0;
    for (double q : sc.exogenous.product_kg.values()) (q > 0 ? imports : demand) += std::abs(q);
    return produced + imports - demand;
}

Outcome criterion1(Cache& se, const Scenario& tiny) {
    std::vector<std::pair<std::string, std::pair<Scenario, PlanSolution>>> cases;
    cases.push_back({"southeast tax 0", {with_tax(se.base(), 0, se.base().clearing), se.get(0, se.base().clearing)}});
    cases.push_back(
        {"southeast tax 50", {with_tax(se.base(), 50, se.base().clearing), se.get(50, se.base().clearing)}});
    cases.push_back({"tiny_pair", {tiny, solve_scenario(tiny)}});
    Outcome o{true, ""};
    for (const auto& [name, pair] : cases) {
        const auto& [sc, sol] = pair;
        if (sol.status != SolveStatus::Optimal) {
            o.pass = false;
            o.detail += fmt::format("{}: {}; ", name, to_string(sol.status));
            continue;
        }
        auto viol = validate_solution(sc, sol, 1e-6);
        double wrap = wrap_residual(sc, sol);
        double gap = mass_gap(sc, sol);
        bool ok = viol.empty() && wrap <= 1e-6 && std::abs(gap) <= 1e-4;
        o.pass = o.pass && ok;
        o.detail += fmt::format("{}: {} violations, wrap residual {:.1e}, mass gap {:.1e} kg; ", name, viol.size(),
                                wrap, gap);
    }
    return o;
}

// Tiny instances for the relaxation bound.
std::vector<std::pair<std::string, Scenario>> tiny_instances(const Scenario& tiny) {
    std::vector<std::pair<std::string, Scenario>> out;
    out.push_back({"tiny_pair", tiny});

    Scenario early = tiny;
    early.exogenous.product_kg = Grid(2, tiny.horizon.n_steps);
    early.exogenous.product_kg(1, 3) = -20000;
    out.push_back({"deadline t=3", early});

    Scenario taxed = tiny;
    taxed.exogenous.product_kg = Grid(2, tiny.horizon.n_steps);
    taxed.exogenous.product_kg(1, 2) = -20000;
    taxed.costs.k_power = carbon_tax_to_penalty(250, taxed.costs.emission_factor);
    out.push_back({"deadline t=2, tax 250", taxed});

    Scenario longer = tiny;
    const std::size_t n = 8;
    longer.horizon.n_steps = n;
    for (Grid* g : {&longer.exogenous.product_kg, &longer.exogenous.raw_kg, &longer.exogenous.wind_cf,
                    &longer.exogenous.solar_cf}) {
        Grid wide(2, n);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t t = 0; t < std::min(n, g->cols()); ++t) wide(i, t) = (*g)(i, t);
        *g = wide;
    }
    longer.exogenous.wind_cf(0, 6) = 0.7;
    longer.exogenous.solar_cf(1, 7) = 0.2;
    longer.exogenous.product_kg = Grid(2, n);
    longer.exogenous.product_kg(1, 6) = -20000;
    longer.exogenous.raw_kg = Grid(2, n);
    longer.exogenous.raw_kg(0, 0) = 20000;
    out.push_back({"8 steps, deadline t=6", longer});
    return out;
}

Outcome criterion2(const Scenario& tiny) {
    Outcome o{true, ""};
    for (const auto& [name, sc] : tiny_instances(tiny)) {
        auto relaxed = solve_scenario(sc);
        if (relaxed.status != SolveStatus::Optimal) {
            o.pass = false;
            o.detail += fmt::format("{}: relaxed {}; ", name, to_string(relaxed.status));
            continue;
        }
        OracleResult oracle;
        try {
            oracle = oracle_enumerate_detail(sc);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail += fmt::format("{}: {}; ", name, e.what());
            continue;
        }
        double integer = oracle.objective;
        bool ok = relaxed.objective <= integer + 1e-6 * std::max(1.0, std::abs(integer));
        o.pass = o.pass && ok;
        o.detail += fmt::format("{}: LP {:.6f} <= integer {:.6f} ({} schedules); ", name, relaxed.objective, integer,
                                oracle.schedules);
    }
    return o;
}

const std::vector<double> kLadder{0, 1, 50, 100, 250};

Outcome criterion3(Cache& se) {
    Outcome o{true, ""};
    double prev_z = INFINITY, prev_pct = -INFINITY;
    for (double tax : kLadder) {
        const auto& sol = se.get(tax, se.base().clearing);
        if (sol.status != SolveStatus::Optimal) return {false, fmt::format("tax {}: {}", tax, to_string(sol.status))};
        Scenario sc = with_tax(se.base(), tax);
        double z = sol[VarKind::NonRenewable].sum() * sc.horizon.step_hours;
        double pct = renewable_fractions(sol, sc).pct_of_demand;
        // orderings within the validation tolerance
        if (z > prev_z + 1e-4 + 1e-6 * prev_z || pct < prev_pct - 1e-6) o.pass = false;
        o.detail += fmt::format("${}: z {:.1f} kWh, {:.2f}%; ", tax, z, pct);
        prev_z = z;
        prev_pct = pct;
    }
    return o;
}

Outcome criterion4(Cache& se) {
    Outcome o{true, ""};
    double first = NAN, worst = 0.0;
    for (double tax : kLadder) {
        const auto& sol = se.get(tax, se.base().clearing);
        auto series = manufacturing_energy_series(sol, se.base());
        double e = 0.0;
        for (double v : series) e += v;
        if (std::isnan(first)) first = e;
        worst = std::max(worst, rel_gap(e, first));
    }
    o.pass = worst <= 1e-6;
    o.detail = fmt::format("manufacturing energy {:.1f} kWh at every tax, largest relative spread {:.1e}", first, worst);
    return o;
}

// Longest stretch (hours) over which the cumulative shift keeps one sign and
// stays above 1% of its peak.
double longest_shift_hours(const std::vector<double>& s, double step_hours) {
    double peak = 0.0;
    for (double v : s) peak = std::max(peak, std::abs(v));
    std::size_t best = 0, run = 0;
    int sign = 0;
    // walk twice around the horizon so a stretch across the boundary counts whole
    for (std::size_t k = 0; k < 2 * s.size(); ++k) {
        double v = s[k % s.size()];
        int sg = std::abs(v) > 0.01 * peak ? (v > 0 ? 1 : -1) : 0;
        run = sg != 0 && sg == sign ? run + 1 : (sg != 0 ? 1 : 0);
        sign = sg;
        best = std::max(best, std::min(run, s.size()));
    }
    return static_cast<double>(best) * step_hours;
}

// Both plans of each pair use the least-inventory tie break: with
// renewables fully used, cost alone leaves the timing open and the shift
// would depend on which optimum the backend lands on.
Outcome criterion5(const Scenario& base) {
    Outcome o{true, ""};
    const double dt = base.horizon.step_hours;
    SolverConfig config;
    config.tie_break = TieBreak::LeastInventory;
    double max_abs[2] = {0, 0};
    double longest = 0.0;
    int idx = 0;
    for (auto c : {DemandClearing::Weekly, DemandClearing::Monthly}) {
        auto taxed = solve_scenario(with_tax(base, 50, c), config);
        auto zero = solve_scenario(with_tax(base, 0, c), config);
        if (taxed.status != SolveStatus::Optimal || zero.status != SolveStatus::Optimal)
            return {false, fmt::format("{}: solve failed", to_string(c))};
        auto shift = cumulative_shift(taxed, zero, dt);
        const double total = zero[VarKind::Power].sum() * dt;
        double end = shift.back();
        for (double v : shift) max_abs[idx] = std::max(max_abs[idx], std::abs(v));
        double hours = longest_shift_hours(shift, dt);
        longest = std::max(longest, hours);
        bool closes = std::abs(end) <= 1e-4 * total;
        o.pass = o.pass && closes;
        o.detail += fmt::format("{}: end {:.2e} of total, max |shift| {:.0f} kWh, longest stretch {:.0f} h; ",
                                to_string(c), std::abs(end) / total, max_abs[idx], hours);
        ++idx;
    }
    bool ordered = max_abs[1] >= max_abs[0] * (1 - 1e-6);
    bool multiday = longest >= 48.0;
    o.pass = o.pass && ordered && multiday;
    o.detail += fmt::format("monthly >= weekly: {}; multi-day: {}", ordered ? "yes" : "no", multiday ? "yes" : "no");
    return o;
}

const std::vector<double> kBessLadder{0, 50, 250, 1000, 2000};

Outcome criterion6(Cache& se) {
    Outcome o{true, ""};
    const auto& frozen = se.get(0, se.base().clearing);
    auto profile = derive_fixed_profile(frozen, with_tax(se.base(), 0));
    double prev_b = -INFINITY;
    for (double tax : kBessLadder) {
        Scenario sc = with_tax(se.base(), tax);
        auto batt = size_battery(profile, sc.costs.k_batt, sc.costs.k_power, sc.costs.epsilon);
        double proposed = renewable_fractions(se.get(tax, se.base().clearing), sc).pct_of_demand;
        bool ok = batt.b_max_kwh >= prev_b - 1e-6 * std::max(1.0, prev_b) && proposed >= batt.renewable_pct - 1e-6;
        if (tax == 0.0) ok = ok && batt.b_max_kwh <= 1e-6;
        o.pass = o.pass && ok;
        o.detail += fmt::format("${}: b_max {:.0f} kWh, proposed {:.2f}% vs bess {:.2f}%; ", tax, batt.b_max_kwh,
                                proposed, batt.renewable_pct);
        prev_b = batt.b_max_kwh;
    }
    return o;
}

Outcome criterion7() {
    Outcome o{true, ""};
    double k = carbon_tax_to_penalty(50, 0.389);
    bool tax_ok = std::abs(k * 1000.0 - 19.45) <= 1e-9;
    auto cement = cement_process_params(150000, 0.92, 1400);
    bool e_ok = std::abs(cement.power_per_unit_kw - 53666.7) <= 0.05;
    double discrepancy = kReferenceCementEnergyKwh / cement.power_per_unit_kw - 1.0;
    o.pass = tax_ok && e_ok;
    o.detail = fmt::format("$50/tn at 0.389 kg/kWh -> ${:.4f}/MWh; mcdT -> {:.1f} kWh (reference {:.0f} kWh is {:.2f}% higher)",
                           k * 1000.0, cement.power_per_unit_kw, kReferenceCementEnergyKwh, 100 * discrepancy);
    return o;
}

Outcome criterion8(const Scenario& base) {
    SweepSpec spec;
    spec.taxes = {0, 50};
    spec.truck_scales = {0.1, 1, 10};
    spec.mfg_scales = {0.1, 1, 10};
    auto result = run_sweep(base, spec);
    Outcome o{result.rows.size() == 18, fmt::format("{} rows; ", result.rows.size())};
    std::size_t rising = 0, tagged = 0, mismatched = 0;
    double floor = minimum_feasible_floor(base, FloorQuantity::Fleet);
    for (std::size_t r = 0; r + 1 < result.rows.size(); r += 2) {
        const auto& a = result.rows[r];
        const auto& b = result.rows[r + 1];
        if (a.ok() && b.ok() && a.tax == 0 && b.tax == 50 && b.renewable_pct > a.renewable_pct) ++rising;
    }
    for (const auto& row : result.rows) {
        if (!row.ok()) continue;
        bool expect = std::abs(row.fleet - floor) <= 1e-6 * std::max(1.0, floor);
        tagged += row.fleet_at_floor;
        mismatched += expect != row.fleet_at_floor;
    }
    o.pass = o.pass && rising == 9 && mismatched == 0;
    o.detail += fmt::format("renewable % rises with tax in {}/9 cost rows; fleet floor {:.3f}, {} cells tagged, {} "
                            "tags disagree",
                            rising, floor, tagged, mismatched);
    return o;
}

Outcome criterion9(const fs::path& scenario_dir, const fs::path& work) {
    std::ostringstream log, err;
    std::vector<fs::path> outs{work / "run1", work / "run2"};
    for (const auto& out : outs) {
        fs::remove_all(out);
        cli::SolveArgs args{scenario_dir, 50.0, std::nullopt, out, std::nullopt};
        int code = cli::cmd_solve(args, log, err);
        if (code != cli::kExitOk) return {false, fmt::format("cmd_solve exit {}: {}", code, err.str())};
    }
    std::size_t files = 0, differ = 0;
    for (const auto& e : fs::directory_iterator(outs[0])) {
        if (e.path().extension() != ".csv") continue;
        ++files;
        auto other = outs[1] / e.path().filename();
        if (!fs::exists(other) || read_text_file(e.path()) != read_text_file(other)) ++differ;
    }
    return {files > 0 && differ == 0, fmt::format("{} solution CSVs compared, {} differ", files, differ)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    fs::path fixtures = ESCFLEX_FIXTURES;
    fs::path work = fs::temp_directory_path() / "escflex-acceptance";
    std::vector<int> only;
    app.add_option("--fixtures", fixtures, "Fixture root (southeast/, tiny_pair/)");
    app.add_option("--work", work, "Scratch directory for CLI runs");
    app.add_option("--only", only, "Run only these criteria");
    CLI11_PARSE(app, argc, argv);

    Cache se(load_scenario(fixtures / "southeast"));
    const Scenario tiny = load_scenario(fixtures / "tiny_pair");

    struct Criterion {
        int id;
        std::string name;
        double limit_seconds;  // 0: no limit
        std::function<Outcome()> run;
    };
    std::vector<Criterion> all{
        {1, "feasibility & conservation", 60, [&] { return criterion1(se, tiny); }},
        {2, "relaxation bound", 120, [&] { return criterion2(tiny); }},
        {3, "carbon-tax monotonicity", 300, [&] { return criterion3(se); }},
        {4, "manufacturing-energy constancy", 0, [&] { return criterion4(se); }},
        {5, "demand-shift structure", 0, [&] { return criterion5(se.base()); }},
        {6, "BESS comparison", 180, [&] { return criterion6(se); }},
        {7, "parameter calculator", 0, [&] { return criterion7(); }},
        {8, "sensitivity grid", 900, [&] { return criterion8(se.base()); }},
        {9, "determinism", 0, [&] { return criterion9(fixtures / "southeast", work); }},
    };

    bool all_pass = true;
    for (const auto& c : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool in_time = c.limit_seconds == 0 || secs < c.limit_seconds;
        bool pass = o.pass && in_time;
        all_pass = all_pass && pass;
        std::string budget = c.limit_seconds > 0 ? fmt::format(" / {:.0f} s", c.limit_seconds) : "";
        std::cout << fmt::format("criterion {}: {} - {} ({:.1f} s{}) {}\n", c.id, pass ? "PASS" : "FAIL", c.name, secs,
                                 budget, o.detail)
                  << std::flush;
    }
    return all_pass ? 0 : 1;
}
