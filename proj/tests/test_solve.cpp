#include "helpers.hpp"

#include "escflex/errors.hpp"
#include "escflex/solve.hpp"
#include "escflex/validate.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <json.hpp>

using namespace escflex;

namespace {

// Two steps: 2000 kg of raw at 0, 2000 kg due at 1. Running both units at
// step 0 needs M = 2 and no storage; spreading them needs M = 1 but holds
// 1000 kg of product and 1000 kg of raw through step 0.
Scenario two_step_kiln(double k_equip) {
    auto sc = testing::one_city(2);
    sc.exogenous.raw_kg(0, 0) = 2000;
    sc.exogenous.product_kg(0, 1) = -2000;
    sc.costs.k_equip = {k_equip};
    return sc;
}

double inventory(const PlanSolution& s) { return s[VarKind::Product].sum() + s[VarKind::Raw].sum(); }

void scale_costs(Scenario& sc, double f) {
    sc.costs.k_truck *= f;
    for (auto& k : sc.costs.k_store) k *= f;
    for (auto& k : sc.costs.k_equip) k *= f;
    sc.costs.k_power *= f;
    sc.costs.epsilon *= f;
}

}  // namespace

TEST_SUITE("solve") {

TEST_CASE("hand-solved kiln instance") {
    // energy is 200 kWh either way: 200 * (0.1 + 0.001) = 20.2
    // cheap equipment: M = 2 over 2 h at 0.5 = 2.0
    auto cheap = solve_scenario(two_step_kiln(0.5));
    REQUIRE(cheap.status == SolveStatus::Optimal);
    CHECK(cheap.objective == doctest::Approx(22.2));
    CHECK(cheap[VarKind::EquipCap](0, 0) == doctest::Approx(2.0));
    CHECK(cheap[VarKind::WarehouseCap](0, 0) == doctest::Approx(0.0).scale(1.0));
    // dear equipment: M = 1 (10.0) plus 2000 kg of storage over 2 h (4.0)
    auto dear = solve_scenario(two_step_kiln(5.0));
    REQUIRE(dear.status == SolveStatus::Optimal);
    CHECK(dear.objective == doctest::Approx(34.2));
    CHECK(dear[VarKind::EquipCap](0, 0) == doctest::Approx(1.0));
    CHECK(dear[VarKind::WarehouseCap](0, 0) == doctest::Approx(2000.0));
    CHECK(dear.breakdown.capex_warehouse == doctest::Approx(4.0));
    CHECK(dear.breakdown.opex_nonrenewable_penalty == doctest::Approx(20.0));
    CHECK(dear.breakdown.opex_base_energy == doctest::Approx(0.2));
}

TEST_CASE("infeasible LPs come back with hints") {
    auto sc = testing::one_city(3);
    sc.exogenous.product_kg(0, 2) = -5000;
    sc.exogenous.raw_kg(0, 0) = 1000;
    auto sol = solve(build_lp(sc, {.precheck = false}));
    CHECK(sol.status == SolveStatus::Infeasible);
    CHECK_FALSE(sol.infeasibility_hint.empty());
    auto json = nlohmann::json::parse(solution_summary_json(sol));
    CHECK(json["status"] == "infeasible");
}

TEST_CASE("z is the renewable shortfall") {
    auto sc = load_scenario(testing::fixture("tiny_pair"));
    sc.costs.k_power = 0.0;
    auto sol = solve_scenario(sc);
    REQUIRE(sol.status == SolveStatus::Optimal);
    for (std::size_t t = 0; t < sc.horizon.n_steps; ++t)
        CHECK(sol[VarKind::NonRenewable](0, t) ==
              doctest::Approx(std::max(0.0, sol[VarKind::Power].column_sum(t) - sc.renewable_total_kw(t))).scale(1.0));
}

TEST_CASE("solves are bit-identical") {
    auto sc = load_scenario(testing::fixture("tiny_pair"));
    auto a = solve_scenario(sc);
    auto b = solve_scenario(sc);
    for (auto k : kAllVarKinds) CHECK(a[k] == b[k]);
    CHECK(a.objective == b.objective);
}

TEST_CASE("non-renewable use falls as its price rises") {
    auto sc = load_scenario(testing::fixture("tiny_pair"));
    double last_z = kInf, last_obj = -kInf;
    for (double k : {0.001, 0.01, 0.05, 0.2, 1.0, 5.0}) {
        sc.costs.k_power = k;
        auto sol = solve_scenario(sc);
        REQUIRE(sol.status == SolveStatus::Optimal);
        double z = sol[VarKind::NonRenewable].sum();
        CAPTURE(k);
        CHECK(z <= last_z + 1e-6);
        CHECK(sol.objective >= last_obj - 1e-9);
        last_z = z;
        last_obj = sol.objective;
    }
}

TEST_CASE("scaling every price scales the optimum") {
    auto sc = load_scenario(testing::fixture("tiny_pair"));
    auto base = solve_scenario(sc);
    REQUIRE(base.status == SolveStatus::Optimal);
    for (double f : {0.5, 2.0}) {
        auto scaled = sc;
        scale_costs(scaled, f);
        auto sol = solve_scenario(scaled);
        REQUIRE(sol.status == SolveStatus::Optimal);
        CHECK(sol.objective == doctest::Approx(f * base.objective).epsilon(1e-7));
    }
}

TEST_CASE("scaling demand and raw supply scales production and cost") {
    // storage and equipment carry no fixed charge, so production follows
    // demand exactly; with renewables scaled too the whole LP is homogeneous
    auto sc = load_scenario(testing::fixture("southeast"));
    sc.costs.k_power = carbon_tax_to_penalty(50, sc.costs.emission_factor);
    auto base = solve_scenario(sc);
    REQUIRE(base.status == SolveStatus::Optimal);
    const auto sites = sc.process_sites();
    auto mfg_kwh = [&](const PlanSolution& s) {
        double e = 0.0;
        for (std::size_t k = 0; k < sites.size(); ++k) {
            const auto& proc = sc.processes[sites[k].process];
            e += proc.power_per_unit_kw * proc.duration_steps * sc.horizon.step_hours * s[VarKind::ProcessStart].row_sum(k);
        }
        return e;
    };
    for (double lambda : {0.5, 2.0}) {
        auto scaled = sc;
        for (Grid* g : {&scaled.exogenous.product_kg, &scaled.exogenous.raw_kg})
            for (std::size_t i = 0; i < g->rows(); ++i)
                for (double& v : g->row(i)) v *= lambda;
        auto sol = solve_scenario(scaled);
        REQUIRE(sol.status == SolveStatus::Optimal);
        CAPTURE(lambda);
        CHECK(sol[VarKind::ProcessStart].sum() == doctest::Approx(lambda * base[VarKind::ProcessStart].sum()));
        CHECK(mfg_kwh(sol) == doctest::Approx(lambda * mfg_kwh(base)));

        for (auto& loc : scaled.locations) {
            loc.wind_mw *= lambda;
            loc.solar_mw *= lambda;
        }
        auto homogeneous = solve_scenario(scaled);
        REQUIRE(homogeneous.status == SolveStatus::Optimal);
        CHECK(homogeneous.objective == doctest::Approx(lambda * base.objective).epsilon(1e-6));
    }
}

TEST_CASE("manufacturing output is fixed by demand") {
    auto sc = load_scenario(testing::fixture("tiny_pair"));
    double units = -1.0;
    for (double k : {0.0, 0.05, 1.0}) {
        sc.costs.k_power = k;
        auto sol = solve_scenario(sc);
        REQUIRE(sol.status == SolveStatus::Optimal);
        double m = sol[VarKind::ProcessStart].sum();
        if (units < 0) units = m;
        CHECK(m == doctest::Approx(units));
    }
    CHECK(units == doctest::Approx(2.0));  // 20 t at 10 t per unit
}

TEST_CASE("least-inventory tie break keeps the cost") {
    auto sc = load_scenario(testing::fixture("tiny_pair"));
    auto plain = solve_scenario(sc);
    SolverConfig cfg;
    cfg.tie_break = TieBreak::LeastInventory;
    auto tied = solve_scenario(sc, cfg);
    REQUIRE(tied.status == SolveStatus::Optimal);
    CHECK(tied.objective <= plain.objective + cfg.tie_break_slack * plain.objective + 1e-9);
    CHECK(tied.objective >= plain.objective - 1e-7);
    CHECK(inventory(tied) <= inventory(plain) + 1e-6);
    CHECK(tied.meta.tie_break == "least_inventory");
    CHECK(validate_solution(sc, tied).empty());
}

TEST_CASE("time limits are reported, not thrown") {
    auto sc = load_scenario(testing::fixture("southeast"));
    SolverConfig cfg;
    cfg.time_limit_seconds = 1e-6;
    auto sol = solve_scenario(sc, cfg);
    CHECK(sol.status == SolveStatus::TimeLimit);
}

TEST_CASE("configuration errors") {
    SolverConfig cfg;
    cfg.feasibility_tol = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.tie_break_slack = -1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK_THROWS_AS(make_backend("cplex"), std::invalid_argument);
    CHECK(parse_tie_break("least_inventory") == TieBreak::LeastInventory);
    CHECK_THROWS_AS(parse_tie_break("most"), std::invalid_argument);
}

TEST_CASE("saved solutions") {
    auto sc = load_scenario(testing::fixture("tiny_pair"));
    auto sol = solve_scenario(sc);
    auto dir = testing::scratch_dir("save-solution");
    save_solution(sol, sc, dir);
    for (auto name : {"C", "Y", "X", "F", "p", "z", "y", "y_empty", "m", "Yhat", "W", "M"})
        CHECK(std::filesystem::exists(dir / (std::string(name) + ".csv")));
    std::ifstream in(dir / "summary.json");
    auto json = nlohmann::json::parse(in);
    CHECK(json["objective_usd"].get<double>() == doctest::Approx(sol.objective));
    CHECK(json["breakdown_usd"]["capex_truck"].get<double>() == doctest::Approx(sol.breakdown.capex_truck));
    std::ifstream y(dir / "y.csv");
    std::string header;
    std::getline(y, header);
    CHECK(header == "entity,step,value");
}

}  // TEST_SUITE
