#include "helpers.hpp"

#include "escflex/csv.hpp"
#include "escflex/errors.hpp"
#include "escflex/scenario.hpp"

#include <doctest.h>

#include <fstream>

using namespace escflex;
namespace fs = std::filesystem;

namespace {

// Copy of a fixture that a test may edit.
fs::path editable_copy(const std::string& fixture_name, const std::string& tag) {
    auto dir = testing::scratch_dir(tag);
    fs::copy(testing::fixture(fixture_name), dir, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
    return dir;
}

void replace_in_file(const fs::path& file, const std::string& from, const std::string& to) {
    auto text = read_text_file(file);
    auto at = text.find(from);
    REQUIRE(at != std::string::npos);
    text.replace(at, from.size(), to);
    write_text_file(file, text);
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("carbon tax converts to a per-kWh penalty") {
    CHECK(carbon_tax_to_penalty(50, 0.389) == doctest::Approx(0.01945).epsilon(1e-12));
    CHECK(carbon_tax_to_penalty(0, 0.389) == 0.0);
    CHECK(carbon_tax_to_penalty(250, 0.389) == doctest::Approx(0.09725).epsilon(1e-12));
    CHECK_THROWS_AS(carbon_tax_to_penalty(-1, 0.389), std::invalid_argument);
    CHECK_THROWS_AS(carbon_tax_to_penalty(1, -0.1), std::invalid_argument);
}

TEST_CASE("carbon tax conversion is linear in tax and factor") {
    for (double tax : {1.0, 7.5, 50.0, 333.0})
        for (double f : {0.1, 0.389, 0.9}) {
            CHECK(carbon_tax_to_penalty(2 * tax, f) == doctest::Approx(2 * carbon_tax_to_penalty(tax, f)));
            CHECK(carbon_tax_to_penalty(tax, 3 * f) == doctest::Approx(3 * carbon_tax_to_penalty(tax, f)));
            CHECK(carbon_tax_to_penalty(tax + 10, f) ==
                  doctest::Approx(carbon_tax_to_penalty(tax, f) + carbon_tax_to_penalty(10, f)));
        }
}

TEST_CASE("levelize spreads capital over lifetime hours") {
    CHECK(levelize(150000, 30) == doctest::Approx(150000.0 / (30 * 8760)));
    CHECK(levelize(150000, 30) == doctest::Approx(0.5708).epsilon(1e-4));
    CHECK(levelize(0, 30) == 0.0);
    CHECK(levelize(25000, 40) == doctest::Approx(0.07134).epsilon(1e-4));
    CHECK_THROWS_AS(levelize(1, 0), std::invalid_argument);
}

TEST_CASE("battery cost scales with the horizon's share of lifetime") {
    CHECK(battery_cost_over_horizon(400, 5, 168) == doctest::Approx(168.0 / (5 * 8760) * 400));
    CHECK(battery_cost_over_horizon(400, 5, 5 * 8760) == doctest::Approx(400));
}

TEST_CASE("cement energy from m c dT") {
    auto e = cement_process_params(150000, 0.92, 1400);
    CHECK(e.power_per_unit_kw == doctest::Approx(53666.6667).epsilon(1e-9));
    CHECK(e.output_per_unit_kg == 150000);
    CHECK(e.raw_per_unit_kg == 150000);
    CHECK(cement_process_params(1, 1, 3600).power_per_unit_kw == doctest::Approx(1.0));
    // the published figure sits about 5.6% above the bare heating energy
    CHECK(kReferenceCementEnergyKwh == 56667.0);
    CHECK(kReferenceCementEnergyKwh / e.power_per_unit_kw == doctest::Approx(1.0559).epsilon(1e-3));
    CHECK_THROWS(cement_process_params(0, 1, 1));
}

TEST_CASE("warehouse cost per kg hour") {
    double k = warehouse_cost_per_kg_hour(4645, 9.88, 1440, 1150000, 30);
    CHECK(k == doctest::Approx(6.62e-8).epsilon(2e-3));
    CHECK(warehouse_cost_per_kg_hour(4645, 9.88, 1440, 2300000, 30) == doctest::Approx(2 * k).epsilon(1e-14));
    CHECK(warehouse_cost_per_kg_hour(1, 1, 1, 8760, 1) == doctest::Approx(1.0));
    CHECK_THROWS(warehouse_cost_per_kg_hour(0, 1, 1, 1, 1));
}

TEST_CASE("theta is the empty share of a loaded truck's weight") {
    TruckSpec t{900, 20000, 10000, 2, 1, 1, true};
    CHECK(t.theta() == doctest::Approx(1.0 / 3.0));
    t.empty_weight_kg = t.load_kg;
    CHECK(t.theta() == doctest::Approx(0.5));
    for (double w : {1.0, 100.0, 1e6}) {
        t.empty_weight_kg = w;
        CHECK(t.theta() > 0.0);
        CHECK(t.theta() < 1.0);
    }
}

TEST_CASE("southeast fixture loads") {
    auto sc = load_scenario(testing::fixture("southeast"));
    CHECK(sc.locations.size() == 3);
    CHECK(sc.paths.size() == 6);
    CHECK(sc.horizon.n_steps == 168);
    CHECK(sc.processes.size() == 1);
    CHECK(sc.clearing == DemandClearing::Weekly);
    CHECK(sc.costs.emission_factor == 0.389);
    // nameplates are MW on disk, availability is kW
    CHECK(sc.renewable_kw(0, 0) ==
          doctest::Approx(1000 * (sc.locations[0].wind_mw * sc.exogenous.wind_cf(0, 0) +
                                  sc.locations[0].solar_mw * sc.exogenous.solar_cf(0, 0))));
    CHECK(sc.costs.k_batt == doctest::Approx(400.0 * 336 / (5 * 8760)));
}

TEST_CASE("negative capacity factor is rejected with its row") {
    auto dir = editable_copy("tiny_pair", "negcf");
    replace_in_file(dir / "capacity_factors.csv", "2,A,0,0", "2,A,-0.1,0");
    try {
        load_scenario(dir);
        FAIL("expected a ScenarioError");
    } catch (const ScenarioError& e) {
        CHECK(e.file() == "capacity_factors.csv");
        CHECK(e.field() == "wind_cf");
        CHECK(e.line() == 6);  // header + rows for steps 0, 1 (two each) + A at step 2
        CHECK(std::string(e.what()).find("capacity_factors.csv:6") != std::string::npos);
    }
}

TEST_CASE("path energy above the battery is unreachable") {
    auto dir = editable_copy("tiny_pair", "farpath");
    replace_in_file(dir / "paths.csv", "A,B,1,300", "A,B,1,950");
    try {
        load_scenario(dir);
        FAIL("expected a ScenarioError");
    } catch (const ScenarioError& e) {
        CHECK(std::string(e.what()).find("path unreachable on one charge") != std::string::npos);
        CHECK(e.field() == "energy_kwh");
    }
}

TEST_CASE("missing files and columns are named") {
    auto dir = editable_copy("tiny_pair", "missing");
    fs::remove(dir / "raw_arrivals.csv");
    CHECK_THROWS_WITH_AS(load_scenario(dir), doctest::Contains("raw_arrivals.csv"), ScenarioError);

    dir = editable_copy("tiny_pair", "badcol");
    replace_in_file(dir / "paths.csv", "travel_steps", "steps");
    CHECK_THROWS_WITH_AS(load_scenario(dir), doctest::Contains("travel_steps"), ScenarioError);

    dir = editable_copy("tiny_pair", "unknownloc");
    replace_in_file(dir / "demand.csv", "B,5", "Z,5");
    CHECK_THROWS_WITH_AS(load_scenario(dir), doctest::Contains("unknown location 'Z'"), ScenarioError);

    CHECK_THROWS_AS(load_scenario(dir / "nope"), ScenarioError);
}

TEST_CASE("load after save is the identity") {
    for (const char* name : {"southeast", "tiny_pair"}) {
        auto sc = load_scenario(testing::fixture(name));
        auto dir = testing::scratch_dir(std::string("roundtrip-") + name);
        save_scenario(sc, dir);
        auto back = load_scenario(dir);
        CHECK(back == sc);
        // and the text is stable on a second pass
        auto dir2 = testing::scratch_dir(std::string("roundtrip2-") + name);
        save_scenario(back, dir2);
        for (const auto& e : fs::directory_iterator(dir))
            CHECK(read_text_file(e.path()) == read_text_file(dir2 / e.path().filename()));
    }
}

TEST_CASE("round trip keeps in-memory scenarios and awkward numbers") {
    auto sc = testing::two_city(5, 2);
    sc.exogenous.product_kg(1, 4) = -1234.5678901234567;
    sc.exogenous.raw_kg(0, 0) = 1234.5678901234567;
    sc.exogenous.wind_cf(0, 1) = 0.1 + 0.2;  // not representable as a short decimal
    sc.locations[0].wind_mw = 1.0 / 3.0;
    sc.truck.charge_before_departure = false;
    auto dir = testing::scratch_dir("roundtrip-mem");
    save_scenario(sc, dir);
    CHECK(load_scenario(dir) == sc);
}

TEST_CASE("demand clearing moves demand to window deadlines") {
    auto sc = testing::one_city(400);
    sc.exogenous.product_kg(0, 3) = -10;
    sc.exogenous.product_kg(0, 170) = -20;
    sc.exogenous.product_kg(0, 5) = 7;  // an import stays put
    sc.clearing = DemandClearing::PerStep;
    CHECK(sc.product_injection() == sc.exogenous.product_kg);

    sc.clearing = DemandClearing::Weekly;  // 168 one-hour steps per week
    auto q = sc.product_injection();
    CHECK(q(0, 167) == -10);
    CHECK(q(0, 335) == -20);
    CHECK(q(0, 5) == 7);
    CHECK(q(0, 3) == 0);
    CHECK(q.sum() == doctest::Approx(-23));

    sc.clearing = DemandClearing::Monthly;
    q = sc.product_injection();
    CHECK(q(0, 399) == -30);
    CHECK(q.sum() == doctest::Approx(-23));
}

TEST_CASE("clearing names parse") {
    CHECK(parse_clearing("weekly") == DemandClearing::Weekly);
    CHECK(parse_clearing("monthly") == DemandClearing::Monthly);
    CHECK(parse_clearing("per-step") == DemandClearing::PerStep);
    CHECK_THROWS_AS(parse_clearing("daily"), ScenarioError);
}

TEST_CASE("validate catches broken invariants") {
    auto sc = testing::two_city(4);
    CHECK_NOTHROW(sc.validate());
    auto bad = sc;
    bad.paths[0].dest = 0;
    CHECK_THROWS_AS(bad.validate(), ScenarioError);
    bad = sc;
    bad.exogenous.raw_kg(0, 0) = -1;
    CHECK_THROWS_AS(bad.validate(), ScenarioError);
    bad = sc;
    bad.exogenous.wind_cf = Grid(2, 3);
    CHECK_THROWS_AS(bad.validate(), ScenarioError);
    bad = sc;
    bad.costs.k_store.pop_back();
    CHECK_THROWS_AS(bad.validate(), ScenarioError);
}

}  // TEST_SUITE
