#include "helpers.hpp"

#include "escflex/errors.hpp"
#include "escflex/sweep.hpp"

#include <doctest.h>

#include <fstream>
#include <json.hpp>

using namespace escflex;

TEST_SUITE("sweep") {

TEST_CASE("a one-point grid is a direct solve") {
    auto sc = load_scenario(testing::fixture("tiny_pair"));
    SweepSpec spec;
    spec.taxes = {0.0};
    auto r = run_sweep(sc, spec);
    REQUIRE(r.rows.size() == 1);
    auto direct_sc = sc;
    direct_sc.costs.k_power = 0.0;
    auto direct = solve_scenario(direct_sc);
    const auto& row = r.rows[0];
    CHECK(row.ok());
    CHECK(row.clearing == sc.clearing);
    CHECK(row.objective == direct.objective);
    CHECK(row.fleet == direct[VarKind::FleetSize](0, 0));
    CHECK(row.equipment == direct[VarKind::EquipCap].sum());
    CHECK(row.energy_kwh == doctest::Approx(direct[VarKind::Power].sum()));
}

TEST_CASE("grid cardinality, order and orderings") {
    auto sc = load_scenario(testing::fixture("tiny_pair"));
    SweepSpec spec;
    spec.taxes = {0.0, 50.0};
    spec.truck_scales = {0.1, 1.0, 10.0};
    spec.mfg_scales = {0.1, 1.0, 10.0};
    spec.workers = 2;
    auto r = run_sweep(sc, spec);
    REQUIRE(r.rows.size() == 18);
    std::size_t i = 0;
    for (double ts : spec.truck_scales)
        for (double ms : spec.mfg_scales)
            for (double tax : spec.taxes) {
                const auto& row = r.rows[i++];
                CHECK(row.truck_scale == ts);
                CHECK(row.mfg_scale == ms);
                CHECK(row.tax == tax);
                CHECK(row.ok());
            }
    // a tax only ever raises the renewable share
    for (std::size_t k = 0; k < r.rows.size(); k += 2)
        CHECK(r.rows[k + 1].renewable_pct >= r.rows[k].renewable_pct - 1e-9);
    // dearer trucks, no larger a fleet
    for (std::size_t m = 0; m < 3; ++m)
        for (std::size_t t = 0; t < 2; ++t)
            for (std::size_t s = 1; s < 3; ++s) {
                const auto& cheap = r.rows[((s - 1) * 3 + m) * 2 + t];
                const auto& dear = r.rows[(s * 3 + m) * 2 + t];
                CHECK(dear.fleet <= cheap.fleet + 1e-9);
            }
    auto csv = sweep_csv(r);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 19);
}

TEST_CASE("rows do not depend on the worker count") {
    auto sc = load_scenario(testing::fixture("tiny_pair"));
    SweepSpec spec;
    spec.taxes = {0.0, 50.0, 250.0};
    spec.truck_scales = {0.5, 2.0};
    spec.workers = 1;
    auto one = sweep_csv(run_sweep(sc, spec));
    spec.workers = 3;
    auto three = sweep_csv(run_sweep(sc, spec));
    CHECK(one == three);
    CHECK(sweep_csv(run_sweep(sc, spec)) == three);
}

TEST_CASE("floors") {
    auto sc = load_scenario(testing::fixture("tiny_pair"));
    // a single truckload over a one-step path: the relaxed fleet needs at
    // most one truck, and some fraction of one
    double fleet = minimum_feasible_floor(sc, FloorQuantity::Fleet);
    CHECK(fleet <= 1.0 + 1e-9);
    CHECK(fleet > 0.0);
    double equip = minimum_feasible_floor(sc, FloorQuantity::Equipment);
    CHECK(equip > 0.0);
    // the cost-optimal plan can never sit below its floor
    auto sol = solve_scenario(sc);
    CHECK(sol[VarKind::FleetSize](0, 0) >= fleet - 1e-9);
    CHECK(sol[VarKind::EquipCap].sum() >= equip - 1e-9);

    auto idle = sc;
    idle.exogenous.product_kg = Grid(2, 6);
    idle.exogenous.raw_kg = Grid(2, 6);
    CHECK(minimum_feasible_floor(idle, FloorQuantity::Fleet) == 0.0);
    CHECK(minimum_feasible_floor(idle, FloorQuantity::Equipment) == 0.0);
    CHECK(minimum_feasible_floor(testing::one_city(3), FloorQuantity::Fleet) == 0.0);
}

TEST_CASE("cells at their floor are tagged") {
    auto sc = load_scenario(testing::fixture("tiny_pair"));
    SweepSpec spec;
    spec.taxes = {0.0};
    spec.truck_scales = {1.0, 100.0};
    auto r = run_sweep(sc, spec);
    REQUIRE(r.fleet_floor.count(sc.clearing) == 1);
    double floor = r.fleet_floor.at(sc.clearing);
    for (const auto& row : r.rows)
        CHECK(row.fleet_at_floor == (std::abs(row.fleet - floor) <= 1e-6 * std::max(1.0, floor)));
    // very dear trucks push the fleet down to the floor
    CHECK(r.rows[1].fleet_at_floor);
    CHECK(sweep_table(r).find("†") != std::string::npos);
}

TEST_CASE("a failing cell does not stop the grid") {
    auto sc = testing::two_city(3);
    sc.exogenous.product_kg(1, 2) = -1000;
    sc.exogenous.raw_kg(0, 0) = 1000;
    sc.paths.clear();  // B is cut off
    SweepSpec spec;
    spec.taxes = {0.0, 50.0};
    auto r = run_sweep(sc, spec);
    REQUIRE(r.rows.size() == 2);
    for (const auto& row : r.rows) CHECK_FALSE(row.ok());
}

TEST_CASE("sweep specs") {
    auto dir = testing::scratch_dir("sweep-spec");
    {
        std::ofstream f(dir / "grid.json");
        f << R"({"taxes": [0, 50], "truck_scales": [0.1, 1], "clearings": ["weekly", "monthly"], "workers": 2})";
    }
    auto spec = load_sweep_spec(dir / "grid.json");
    CHECK(spec.taxes == std::vector<double>{0, 50});
    CHECK(spec.truck_scales == std::vector<double>{0.1, 1});
    CHECK(spec.mfg_scales == std::vector<double>{1.0});
    CHECK(spec.clearings == std::vector<DemandClearing>{DemandClearing::Weekly, DemandClearing::Monthly});
    CHECK(spec.workers == 2);
    {
        std::ofstream f(dir / "bad.json");
        f << R"({"taxes": []})";
    }
    CHECK_THROWS(load_sweep_spec(dir / "bad.json"));
    {
        std::ofstream f(dir / "broken.json");
        f << "{";
    }
    CHECK_THROWS_AS(load_sweep_spec(dir / "broken.json"), ScenarioError);
    SweepSpec neg;
    neg.truck_scales = {0.0};
    CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
}

TEST_CASE("grid point scenarios") {
    auto sc = load_scenario(testing::fixture("tiny_pair"));
    auto p = sweep_point(sc, 50.0, 10.0, 0.1, DemandClearing::Monthly);
    CHECK(p.clearing == DemandClearing::Monthly);
    CHECK(p.costs.k_truck == doctest::Approx(10.0 * sc.costs.k_truck));
    CHECK(p.costs.k_equip[0] == doctest::Approx(0.1 * sc.costs.k_equip[0]));
    CHECK(p.costs.k_power == doctest::Approx(0.01945));
    CHECK(p.costs.k_store == sc.costs.k_store);
}

TEST_CASE("saved sweeps") {
    auto sc = load_scenario(testing::fixture("tiny_pair"));
    SweepSpec spec;
    spec.taxes = {0.0, 50.0};
    auto r = run_sweep(sc, spec);
    auto dir = testing::scratch_dir("sweep-save");
    save_sweep(r, dir);
    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) files += e.is_regular_file();
    CHECK(files >= 2);
    auto j = nlohmann::json::parse(sweep_json(r));
    CHECK(j["cells"].size() == 2);
}

}  // TEST_SUITE
