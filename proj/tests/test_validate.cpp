#include "helpers.hpp"

#include "escflex/validate.hpp"

#include <doctest.h>

#include <algorithm>

using namespace escflex;

namespace {

bool flags(const std::vector<Violation>& v, RowRole role, std::size_t entity, std::size_t step) {
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) {
        return x.tag.role == role && x.tag.entity == entity && x.tag.step == step;
    });
}

// Three steps: raw arrives at 0, one kiln unit runs at 0, product waits one
// step and is consumed at 2. Written out by hand.
std::pair<Scenario, PlanSolution> hand_plan() {
    auto sc = testing::one_city(3);
    sc.exogenous.raw_kg(0, 0) = 1000;
    sc.exogenous.product_kg(0, 2) = -1000;
    auto sol = PlanSolution::zeros(VariableSpace(sc));
    sol[VarKind::ProcessStart](0, 0) = 1;
    sol[VarKind::Power](0, 0) = 100;
    sol[VarKind::NonRenewable](0, 0) = 100;
    sol[VarKind::Product](0, 1) = 1000;
    sol[VarKind::WarehouseCap](0, 0) = 1000;
    sol[VarKind::EquipCap](0, 0) = 1;
    return {sc, sol};
}

}  // namespace

TEST_SUITE("validate") {

TEST_CASE("a hand-written plan passes") {
    auto [sc, sol] = hand_plan();
    auto v = validate_solution(sc, sol);
    for (const auto& x : v) MESSAGE(x.what);
    CHECK(v.empty());
}

TEST_CASE("breaking the hand plan is caught where it breaks") {
    auto [sc, sol] = hand_plan();
    SUBCASE("product kept one step too long") {
        sol[VarKind::Product](0, 2) = 1000;
        auto v = validate_solution(sc, sol);
        CHECK(flags(v, RowRole::ProductBalance, 0, 2));
        CHECK(flags(v, RowRole::ProductBalance, 0, 0));
    }
    SUBCASE("kiln without power") {
        sol[VarKind::Power](0, 0) = 0;
        auto v = validate_solution(sc, sol);
        CHECK(flags(v, RowRole::ChargeBalance, 0, 0));
        CHECK_FALSE(flags(v, RowRole::PowerBalance, 0, 0));
    }
    SUBCASE("power bought without paying for it") {
        sol[VarKind::NonRenewable](0, 0) = 0;
        auto v = validate_solution(sc, sol);
        REQUIRE(v.size() == 1);
        CHECK(v[0].tag.role == RowRole::PowerBalance);
        CHECK(v[0].magnitude == doctest::Approx(100.0));
    }
    SUBCASE("equipment too small") {
        sol[VarKind::EquipCap](0, 0) = 0.5;
        auto v = validate_solution(sc, sol);
        REQUIRE(v.size() == 1);
        CHECK(v[0].tag.role == RowRole::EquipmentCapacity);
    }
    SUBCASE("negative values") {
        sol[VarKind::Raw](0, 1) = -1;
        sol[VarKind::Raw](0, 2) = -1;
        auto v = validate_solution(sc, sol);
        CHECK(std::any_of(v.begin(), v.end(), [](const Violation& x) { return x.tag.role == RowRole::Nonnegativity; }));
    }
}

TEST_CASE("solver output validates cleanly") {
    for (const char* name : {"tiny_pair", "southeast"}) {
        auto sc = load_scenario(testing::fixture(name));
        auto sol = solve_scenario(sc);
        REQUIRE(sol.status == SolveStatus::Optimal);
        auto v = validate_solution(sc, sol);
        for (const auto& x : v) MESSAGE(x.what);
        CHECK(v.empty());
    }
}

TEST_CASE("a bumped charge shows up in its own and the next step") {
    auto sc = load_scenario(testing::fixture("tiny_pair"));
    auto sol = solve_scenario(sc);
    REQUIRE(sol.status == SolveStatus::Optimal);
    sol[VarKind::Charge](1, 2) += 50.0;
    auto v = validate_solution(sc, sol);
    CHECK(flags(v, RowRole::ChargeBalance, 1, 2));
    CHECK(flags(v, RowRole::ChargeBalance, 1, 3));
    for (const auto& x : v) {
        CHECK(x.tag.entity == 1);
        CHECK((x.tag.step == 2 || x.tag.step == 3));
    }
}

TEST_CASE("zero trajectories violate the demand rows") {
    auto sc = load_scenario(testing::fixture("tiny_pair"));
    auto sol = PlanSolution::zeros(VariableSpace(sc));
    auto v = validate_solution(sc, sol);
    CHECK(flags(v, RowRole::ProductBalance, 1, 5));
    CHECK(flags(v, RowRole::RawBalance, 0, 0));
    for (const auto& x : v) CHECK((x.tag.role == RowRole::ProductBalance || x.tag.role == RowRole::RawBalance));
}

TEST_CASE("wrap-around rows are marked") {
    auto [sc, sol] = hand_plan();
    sol[VarKind::Product](0, 2) = 1000;
    auto v = validate_solution(sc, sol);
    for (const auto& x : v)
        if (x.tag.role == RowRole::ProductBalance) CHECK(x.tag.wraps == (x.tag.step == 0));
    CHECK(std::any_of(v.begin(), v.end(), [](const Violation& x) {
        return x.what.find("periodic boundary") != std::string::npos;
    }));
}

TEST_CASE("misshapen solutions are rejected") {
    auto [sc, sol] = hand_plan();
    sol[VarKind::Charge] = Grid(1, 4);
    CHECK_THROWS_AS(validate_solution(sc, sol), std::invalid_argument);
}

}  // TEST_SUITE
