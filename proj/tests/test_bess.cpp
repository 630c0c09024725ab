#include "helpers.hpp"

#include "escflex/bess.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace escflex;

namespace {

// A day of hourly steps: flat load under a solar bell.
FixedLoadProfile solar_day(double peak_kw = 40.0) {
    FixedLoadProfile prof;
    prof.step_hours = 1.0;
    for (int h = 0; h < 24; ++h) {
        prof.demand_kw.push_back(10.0 + 2.0 * (h % 3));
        double sun = (h > 6 && h < 19) ? std::sin(M_PI * (h - 6) / 13.0) : 0.0;
        prof.renewable_kw.push_back(peak_kw * sun);
    }
    return prof;
}

void check_invariants(const FixedLoadProfile& prof, const BessResult& r) {
    const auto n = prof.demand_kw.size();
    REQUIRE(r.battery_kwh.size() == n);
    REQUIRE(r.z_kw.size() == n);
    REQUIRE(r.curtail_kw.size() == n);
    for (std::size_t t = 0; t < n; ++t) {
        CHECK(r.battery_kwh[t] >= -1e-9);
        CHECK(r.battery_kwh[t] <= r.b_max_kwh + 1e-6);
        CHECK(r.z_kw[t] >= -1e-9);
        CHECK(r.curtail_kw[t] >= -1e-9);
        // periodic balance, the step before 0 being the last one
        double before = r.battery_kwh[(t + n - 1) % n];
        double flow = prof.step_hours * (prof.renewable_kw[t] - prof.demand_kw[t] + r.z_kw[t] - r.curtail_kw[t]);
        CHECK(r.battery_kwh[t] - before == doctest::Approx(flow).scale(1.0).epsilon(1e-6));
    }
}

}  // namespace

TEST_SUITE("bess") {

TEST_CASE("three steps by hand") {
    // 30 kW of sun at step 0 and none after, 10 kW of load throughout:
    // storing 20 kWh covers steps 1 and 2 and is worth it when a kWh of
    // battery is cheaper than a kWh of grid power
    FixedLoadProfile prof{{10, 10, 10}, {30, 0, 0}, 1.0};
    CHECK(prof.renewable_pct() == doctest::Approx(100.0 / 3.0));
    CHECK(prof.energy_kwh() == 30.0);

    auto cheap = size_battery(prof, 0.5, 1.0);
    CHECK(cheap.b_max_kwh == doctest::Approx(20.0));
    CHECK(cheap.objective == doctest::Approx(10.0));
    CHECK(cheap.renewable_pct == doctest::Approx(100.0));
    check_invariants(prof, cheap);

    auto dear = size_battery(prof, 2.0, 1.0);
    CHECK(dear.b_max_kwh == doctest::Approx(0.0).scale(1.0));
    CHECK(dear.objective == doctest::Approx(20.0));
    CHECK(dear.renewable_pct == doctest::Approx(100.0 / 3.0));
    check_invariants(prof, dear);
}

TEST_CASE("no penalty, no battery") {
    auto prof = solar_day();
    auto r = size_battery(prof, 0.01, 0.0);
    CHECK(r.b_max_kwh == 0.0);
    CHECK(r.renewable_pct == doctest::Approx(prof.renewable_pct()));
    check_invariants(prof, r);
}

TEST_CASE("ample renewables need no battery") {
    FixedLoadProfile prof{{5, 8, 3, 9}, {10, 8, 12, 9}, 0.5};
    auto r = size_battery(prof, 0.01, 1.0);
    CHECK(r.b_max_kwh == 0.0);
    for (double z : r.z_kw) CHECK(z == 0.0);
    CHECK(r.renewable_pct == doctest::Approx(100.0));
}

TEST_CASE("battery size is monotone in both prices") {
    auto prof = solar_day();
    double last = -1.0;
    for (double k_power : {0.0, 0.01, 0.05, 0.2, 1.0}) {
        auto r = size_battery(prof, 0.05, k_power);
        CAPTURE(k_power);
        CHECK(r.b_max_kwh >= last - 1e-6);
        last = r.b_max_kwh;
        check_invariants(prof, r);
    }
    CHECK(last > 0.0);
    last = kInf;
    for (double k_batt : {0.001, 0.02, 0.1, 0.5, 5.0}) {
        auto r = size_battery(prof, k_batt, 0.2);
        CAPTURE(k_batt);
        CHECK(r.b_max_kwh <= last + 1e-6);
        last = r.b_max_kwh;
    }
    CHECK(last == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("a battery never lowers the renewable share") {
    for (double peak : {5.0, 20.0, 40.0, 120.0}) {
        auto prof = solar_day(peak);
        for (double k_power : {0.0, 0.05, 1.0}) {
            auto r = size_battery(prof, 0.05, k_power);
            CHECK(r.renewable_pct >= prof.renewable_pct() - 1e-9);
            CHECK(r.renewable_pct <= 100.0);
        }
    }
}

TEST_CASE("profiles come from zero-tax optimal plans") {
    auto sc = load_scenario(testing::fixture("tiny_pair"));
    sc.costs.k_power = 0.0;
    auto sol = solve_scenario(sc);
    REQUIRE(sol.status == SolveStatus::Optimal);
    auto prof = derive_fixed_profile(sol, sc);
    REQUIRE(prof.demand_kw.size() == 6);
    CHECK(prof.step_hours == 1.0);
    for (std::size_t t = 0; t < 6; ++t) {
        CHECK(prof.demand_kw[t] == sol[VarKind::Power].column_sum(t));
        CHECK(prof.renewable_kw[t] == sc.renewable_total_kw(t));
    }
    CHECK(prof.energy_kwh() == doctest::Approx(sol[VarKind::Power].sum()));

    auto taxed = sc;
    taxed.costs.k_power = 0.05;
    auto taxed_sol = solve_scenario(taxed);
    CHECK_THROWS_AS(derive_fixed_profile(taxed_sol, taxed), std::invalid_argument);
    PlanSolution failed;
    CHECK_THROWS_AS(derive_fixed_profile(failed, sc), std::invalid_argument);
}

TEST_CASE("zero demand") {
    FixedLoadProfile prof{{0, 0, 0}, {1, 2, 0}, 1.0};
    CHECK(prof.renewable_pct() == 0.0);
    auto r = size_battery(prof, 0.1, 1.0);
    CHECK(r.b_max_kwh == 0.0);
    CHECK(r.objective == 0.0);
}

TEST_CASE("bad profiles are rejected") {
    CHECK_THROWS_AS(size_battery({{}, {}, 1.0}, 0.1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(size_battery({{1, 2}, {1}, 1.0}, 0.1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(size_battery({{1}, {-1}, 1.0}, 0.1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(size_battery({{1}, {1}, 0.0}, 0.1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(size_battery({{1}, {1}, 1.0}, -0.1, 0.1), std::invalid_argument);
}

TEST_CASE("saved results") {
    FixedLoadProfile prof{{10, 10, 10}, {30, 0, 0}, 1.0};
    auto r = size_battery(prof, 0.5, 1.0);
    auto dir = testing::scratch_dir("bess-save");
    save_bess(r, dir);
    CHECK(std::filesystem::exists(dir / "battery.csv"));
    CHECK(std::filesystem::exists(dir / "bess_summary.json"));
}

}  // TEST_SUITE
